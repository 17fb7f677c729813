#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entprop/linalg.hpp"
#include "entprop/network_spec.hpp"
#include "entprop/tensor.hpp"

namespace entprop {

// ---------------------------------------------------------------------------
// Dense layers
//
// A dense layer maps x -> W x with W of shape N x d (outputs x inputs). W is
// embedded in a square block-triangular matrix W' whose determinant equals
// that of W's leading k x k block (k = min(N, d)), so the entropy change of
// the pre-activations is log|det(square part)|.
// ---------------------------------------------------------------------------

struct SquarifiedDense {
  std::size_t original_rows = 0;  // N
  std::size_t original_cols = 0;  // d
  Matrix wprime;                  // max(N, d) square
  Matrix square_part;             // min(N, d) square
};

/// Leading min(N, d) x min(N, d) block of W.
Matrix square_part(const Matrix& w);

/// Builds W'. For N < d:  [[W_s, W_r], [0, I_{d-N}]] where W_r holds the
/// remaining columns. For N > d:  [[W_s, 0], [W_r, I_{N-d}]] where W_r holds
/// the remaining rows. For N = d, W' = W.
SquarifiedDense squarify_dense(const Matrix& w);

/// Entropy change of a dense layer's pre-activations: log|det(square_part(W))|.
LogDet dense_entropy_delta(const Matrix& w);

// ---------------------------------------------------------------------------
// 2D convolutions
// ---------------------------------------------------------------------------

/// Matrix form of a valid p x q convolution over an l x w input.
///
/// `cm` is (l-p+1)(w-q+1) x lw: block row i holds B_1..B_p at block columns
/// i..i+p-1, where B_j is the (w-q+1) x w Toeplitz band built from filter
/// row j. Then flatten(conv2d(X, C)) = cm * flatten(X).
///
/// `cm_prime` is lw x lw: each B_j is padded to w x w as [[B_j], [0, I_{q-1}]],
/// and identity rows I_{(p-1)w} are appended below. It is block upper
/// triangular with diagonal blocks B_1', so det = c11^((l-p+1)(w-q+1)).
struct ConvMatrix {
  Matrix filter;
  std::size_t input_h = 0;
  std::size_t input_w = 0;
  Matrix cm;
  Matrix cm_prime;
};

ConvMatrix build_conv_matrix(const Matrix& filter, std::size_t input_h, std::size_t input_w);

struct EntropyDelta {
  std::size_t layer_index = 0;
  std::size_t unit_index = 0;     // filter, or 0 for a dense layer
  std::size_t channel_index = 0;  // input channel slice of the filter
  double delta_total = 0.0;       // nats
  double delta_per_element = 0.0; // nats per output element
};

/// Closed-form entropy change of one 2D convolution slice:
/// per element ln|c11|, total (l-p+1)(w-q+1) ln|c11|; -inf when c11 == 0.
EntropyDelta conv_entropy_delta(const Matrix& filter, std::size_t input_h, std::size_t input_w);

// ---------------------------------------------------------------------------
// Network profiling
// ---------------------------------------------------------------------------

struct Outlier {
  std::size_t unit = 0;
  double value = 0.0;
};

/// Box-plot summary: quartiles by linear interpolation between order
/// statistics, outliers outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
struct BoxSummary {
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::vector<Outlier> outliers;
};

/// Quantile of `values` (any order) at probability `prob` in [0, 1], with
/// linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

BoxSummary summarize(const std::vector<double>& values);

enum class LayerKind { dense, conv2d };

struct LayerProfile {
  std::size_t layer_index = 0;  // position in NetworkSpec::layers
  LayerKind kind = LayerKind::dense;
  std::size_t input_h = 0;      // tracked spatial dims entering the layer
  std::size_t input_w = 0;
  /// Every (filter, channel) slice for conv layers; one entry for dense layers.
  std::vector<EntropyDelta> slices;
  /// Per-unit values (mean over channel slices for a filter).
  std::vector<double> unit_total;
  std::vector<double> unit_per_element;
  BoxSummary total;
  BoxSummary per_element;
};

struct ProfileReport {
  std::vector<LayerProfile> layers;
};

/// Walks the network tracking spatial dims (conv: l-p+1, w-q+1; maxpool:
/// floor halving) and computes entropy deltas for every dense and conv layer.
/// For dense layers delta_per_element is log|det| / min(N, d).
ProfileReport profile_network(const NetworkSpec& spec, const Parameters& params,
                              std::size_t input_h, std::size_t input_w);

std::string to_string(LayerKind kind);

}  // namespace entprop
