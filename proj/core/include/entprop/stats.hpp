#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace entprop {

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;  // Welch-Satterthwaite
  double p_two_tailed = 1.0;
  /// P(T >= t): the p-value for H1 "mean(a) > mean(b)".
  double p_one_tailed = 0.5;
};

double mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Student-t distribution with `dof` > 0 degrees of freedom.
double student_t_cdf(double t, double dof);
/// Upper tail P(T > t), computed without cancellation for large t.
double student_t_sf(double t, double dof);
/// Inverse CDF, prob in (0, 1).
double student_t_quantile(double prob, double dof);

/// Unequal-variance two-sample t-test. Needs two samples of size >= 2 and a
/// nonzero standard error; throws StatsError otherwise.
TTestResult welch_t(std::span<const double> a, std::span<const double> b);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Mean and half-width of the two-sided 95% t-interval. Needs n >= 2.
MeanCi mean_ci95(std::span<const double> sample);

enum class Cell { blank, plus, minus };
char to_char(Cell c);

/// Degenerate pairs (zero standard error) either throw or read as blank.
enum class DegeneratePolicy { raise, blank };

struct SignificanceGrid {
  std::vector<std::string> labels;
  std::vector<std::vector<Cell>> cells;  // cells[i][j] compares group i with group j
  double alpha = 0.01;
  /// Pairs (i < j) whose test was undefined and which were left blank.
  std::vector<std::pair<std::size_t, std::size_t>> degenerate;
};

using LabeledSample = std::pair<std::string, std::vector<double>>;

/// cell(i, j) = plus when the two-tailed p < alpha and mean_i > mean_j,
/// minus when p < alpha and mean_i < mean_j, blank otherwise.
SignificanceGrid significance_grid(std::span<const LabeledSample> groups, double alpha,
                                   DegeneratePolicy policy = DegeneratePolicy::raise);

/// "*", "**" or "***" for p below 0.05, 0.01, 0.001; empty otherwise.
std::string star_tier(double p);

/// Signed four-decimal delta; when p < 0.05 followed by its stars and the
/// parenthesized p, e.g. "+0.0052** (0.0035)".
std::string format_delta(double delta, double p);

}  // namespace entprop
