#include "entprop/entropy_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

Matrix square_part(const Matrix& w) {
  if (w.empty()) throw DimensionError("square_part of an empty matrix");
  const std::size_t k = std::min(w.rows(), w.cols());
  return w.block(0, 0, k, k);
}

SquarifiedDense squarify_dense(const Matrix& w) {
  if (w.empty()) throw DimensionError("squarify_dense of an empty matrix");
  const std::size_t n_out = w.rows(), d_in = w.cols();
  const std::size_t n = std::max(n_out, d_in);
  SquarifiedDense out{n_out, d_in, Matrix(n, n), square_part(w)};

  // In both rectangular cases W sits unchanged in the top-left corner (top
  // rows when N < d, left columns when N > d) and the identity block fills
  // the remaining diagonal.
  out.wprime.set_block(0, 0, w);
  for (std::size_t i = std::min(n_out, d_in); i < n; ++i) out.wprime(i, i) = 1.0;
  return out;
}

LogDet dense_entropy_delta(const Matrix& w) { return lu_logabsdet(square_part(w)); }

namespace {

void check_filter_fits(const Matrix& filter, std::size_t l, std::size_t w) {
  if (filter.rows() == 0 || filter.cols() == 0 || filter.rows() > l || filter.cols() > w) {
    throw DimensionError(fmt::format("filter {}x{} larger than input {}x{}", filter.rows(),
                                     filter.cols(), l, w));
  }
}

}  // namespace

ConvMatrix build_conv_matrix(const Matrix& filter, std::size_t l, std::size_t w) {
  check_filter_fits(filter, l, w);
  const std::size_t p = filter.rows(), q = filter.cols();
  const std::size_t out_h = l - p + 1, out_w = w - q + 1;

  ConvMatrix res{filter, l, w, Matrix(out_h * out_w, l * w), Matrix(l * w, l * w)};

  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const std::size_t r = i * out_w + j;
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t m = 0; m < q; ++m) res.cm(r, (i + k) * w + j + m) = filter(k, m);
    }
  }

  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t jr = 0; jr < w; ++jr) {
      const std::size_t r = i * w + jr;
      if (jr < out_w) {
        for (std::size_t k = 0; k < p; ++k)
          for (std::size_t m = 0; m < q; ++m) res.cm_prime(r, (i + k) * w + jr + m) = filter(k, m);
      } else {
        // I_{q-1} padding row, present in every B_k' of the block row.
        for (std::size_t k = 0; k < p; ++k) res.cm_prime(r, (i + k) * w + jr) = 1.0;
      }
    }
  }
  for (std::size_t r = out_h * w; r < l * w; ++r) res.cm_prime(r, r) = 1.0;
  return res;
}

EntropyDelta conv_entropy_delta(const Matrix& filter, std::size_t l, std::size_t w) {
  check_filter_fits(filter, l, w);
  const double outputs = static_cast<double>((l - filter.rows() + 1) * (w - filter.cols() + 1));
  const double c11 = std::fabs(filter(0, 0));
  EntropyDelta d;
  if (c11 == 0.0) {
    d.delta_per_element = -std::numeric_limits<double>::infinity();
    d.delta_total = d.delta_per_element;
  } else {
    d.delta_per_element = std::log(c11);
    d.delta_total = outputs * d.delta_per_element;
  }
  return d;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DimensionError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= values.size() || frac == 0.0 || values[lo] == values[lo + 1]) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BoxSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw DimensionError("summary of an empty sample");
  BoxSummary s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo = s.q1 - 1.5 * iqr, hi = s.q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < lo || values[i] > hi) s.outliers.push_back({i, values[i]});
  return s;
}

ProfileReport profile_network(const NetworkSpec& spec, const Parameters& params,
                              std::size_t input_h, std::size_t input_w) {
  if (input_h == 0 || input_w == 0) throw DimensionError("profile input dims must be positive");
  check_params(spec, params);

  ProfileReport report;
  std::size_t h = input_h, w = input_w;
  std::size_t channels = 0;  // unknown until the first conv layer
  bool flat = false;

  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const Layer& layer = spec.layers[li];
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      if (flat) throw DimensionError(fmt::format("layer {}: conv after a dense layer", li));
      if (channels != 0 && channels != conv->in_channels) {
        throw DimensionError(fmt::format("layer {}: conv expects {} channels, tracked {}", li,
                                         conv->in_channels, channels));
      }
      if (conv->kernel_h > h || conv->kernel_w > w) {
        throw DimensionError(fmt::format("layer {}: {}x{} filter leaves non-positive dims from {}x{}",
                                         li, conv->kernel_h, conv->kernel_w, h, w));
      }
      LayerProfile lp;
      lp.layer_index = li;
      lp.kind = LayerKind::conv2d;
      lp.input_h = h;
      lp.input_w = w;
      const Matrix& weights = params[li].weights;
      const std::size_t slice = conv->kernel_h * conv->kernel_w;
      for (std::size_t f = 0; f < conv->filters; ++f) {
        double total = 0.0, per = 0.0;
        for (std::size_t c = 0; c < conv->in_channels; ++c) {
          const auto row = weights.row(f).subspan(c * slice, slice);
          Matrix filter(conv->kernel_h, conv->kernel_w, std::vector<double>(row.begin(), row.end()));
          EntropyDelta d = conv_entropy_delta(filter, h, w);
          d.layer_index = li;
          d.unit_index = f;
          d.channel_index = c;
          total += d.delta_total;
          per += d.delta_per_element;
          lp.slices.push_back(d);
        }
        lp.unit_total.push_back(total / static_cast<double>(conv->in_channels));
        lp.unit_per_element.push_back(per / static_cast<double>(conv->in_channels));
      }
      lp.total = summarize(lp.unit_total);
      lp.per_element = summarize(lp.unit_per_element);
      report.layers.push_back(std::move(lp));

      h = h - conv->kernel_h + 1;
      w = w - conv->kernel_w + 1;
      channels = conv->filters;
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      if (!flat) {
        const std::size_t plane = h * w;
        const bool ok = channels != 0 ? dense->in == channels * plane : dense->in % plane == 0;
        if (!ok) {
          throw DimensionError(fmt::format(
              "layer {}: dense expects {} inputs, tracked {}x{}x{}", li, dense->in,
              channels == 0 ? dense->in / std::max<std::size_t>(plane, 1) : channels, h, w));
        }
      }
      LayerProfile lp;
      lp.layer_index = li;
      lp.kind = LayerKind::dense;
      lp.input_h = flat ? 1 : h;
      lp.input_w = flat ? dense->in : w;
      const LogDet ld = dense_entropy_delta(params[li].weights);
      const double k = static_cast<double>(std::min(dense->in, dense->out));
      EntropyDelta d;
      d.layer_index = li;
      d.delta_total = ld.log_abs;
      d.delta_per_element = ld.log_abs / k;
      lp.slices.push_back(d);
      lp.unit_total.push_back(d.delta_total);
      lp.unit_per_element.push_back(d.delta_per_element);
      lp.total = summarize(lp.unit_total);
      lp.per_element = summarize(lp.unit_per_element);
      report.layers.push_back(std::move(lp));

      flat = true;
      h = 1;
      w = dense->out;
    } else if (std::holds_alternative<MaxPool2Layer>(layer)) {
      if (flat) throw DimensionError(fmt::format("layer {}: maxpool2 after a dense layer", li));
      h /= 2;
      w /= 2;
      if (h == 0 || w == 0) {
        throw DimensionError(fmt::format("layer {}: maxpool2 leaves non-positive dims", li));
      }
    }
  }
  return report;
}

std::string to_string(LayerKind kind) { return kind == LayerKind::dense ? "dense" : "conv2d"; }

}  // namespace entprop
