#include "entprop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw StatsError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw StatsError("variance needs at least 2 values");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

namespace {

// Continued fraction for I_x(a, b) (modified Lentz); converges fast for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError(fmt::format("incomplete beta did not converge (a={}, b={}, x={})", a, b, x));
}

// x^a (1-x)^b / (a B(a, b)) evaluated in logs.
double beta_prefactor(double a, double b, double x) {
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  return std::exp(log_front);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw StatsError(fmt::format("incomplete beta outside its domain (a={}, b={}, x={})", a, b, x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return beta_prefactor(a, b, x) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - beta_prefactor(b, a, 1.0 - x) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// P(|T| > |t|) / 2.
double half_two_tail(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // For small t the complement form avoids dof / (dof + t^2) rounding to 1.
  if (t2 < dof) {
    return 0.5 - 0.5 * incomplete_beta(0.5, 0.5 * dof, t2 / (dof + t2));
  }
  return 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2));
}

void check_dof(double dof) {
  if (!(dof > 0.0)) throw StatsError(fmt::format("degrees of freedom {} must be positive", dof));
}

}  // namespace

double student_t_cdf(double t, double dof) {
  check_dof(dof);
  if (std::isnan(t)) throw StatsError("t statistic is NaN");
  const double tail = half_two_tail(t, dof);
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_sf(double t, double dof) {
  check_dof(dof);
  if (std::isnan(t)) throw StatsError("t statistic is NaN");
  const double tail = half_two_tail(t, dof);
  return t > 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double prob, double dof) {
  check_dof(dof);
  if (!(prob > 0.0 && prob < 1.0)) throw StatsError(fmt::format("quantile probability {} outside (0, 1)", prob));
  if (prob == 0.5) return 0.0;
  if (prob < 0.5) return -student_t_quantile(1.0 - prob, dof);
  // Upper half: bracket on the survival function, then bisect.
  const double target = 1.0 - prob;
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_sf(hi, dof) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw StatsError("t quantile bracket overflow");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_sf(mid, dof) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TTestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw StatsError(fmt::format("welch t-test needs two samples of size >= 2 (got {} and {})",
                                 a.size(), b.size()));
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw StatsError("welch t-test: both samples have zero variance");
  TTestResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_two_tailed = std::min(1.0, 2.0 * half_two_tail(r.t, r.dof));
  r.p_one_tailed = student_t_sf(r.t, r.dof);
  return r;
}

MeanCi mean_ci95(std::span<const double> sample) {
  if (sample.size() < 2) throw StatsError("confidence interval needs at least 2 values");
  const double n = static_cast<double>(sample.size());
  const double s = std::sqrt(sample_variance(sample));
  return {mean(sample), student_t_quantile(0.975, n - 1.0) * s / std::sqrt(n)};
}

char to_char(Cell c) {
  switch (c) {
    case Cell::plus:
      return '+';
    case Cell::minus:
      return '-';
    case Cell::blank:
      break;
  }
  return ' ';
}

SignificanceGrid significance_grid(std::span<const LabeledSample> groups, double alpha,
                                   DegeneratePolicy policy) {
  if (groups.size() < 2) throw StatsError("significance grid needs at least 2 groups");
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError(fmt::format("alpha {} outside (0, 1)", alpha));
  const std::size_t k = groups.size();
  SignificanceGrid g;
  g.alpha = alpha;
  g.cells.assign(k, std::vector<Cell>(k, Cell::blank));
  for (const auto& [label, sample] : groups) {
    if (sample.size() < 2) {
      throw StatsError(fmt::format("group '{}' has {} replications, need >= 2", label, sample.size()));
    }
    g.labels.push_back(label);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      TTestResult r;
      try {
        r = welch_t(groups[i].second, groups[j].second);
      } catch (const StatsError&) {
        if (policy == DegeneratePolicy::raise) throw;
        g.degenerate.emplace_back(i, j);
        continue;
      }
      if (r.p_two_tailed < alpha && r.t != 0.0) {
        const Cell c = r.t > 0.0 ? Cell::plus : Cell::minus;
        g.cells[i][j] = c;
        g.cells[j][i] = c == Cell::plus ? Cell::minus : Cell::plus;
      }
    }
  }
  return g;
}

std::string star_tier(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string format_delta(double delta, double p) {
  std::string s = fmt::format("{:+.4f}", delta);
  if (p < 0.05) s += fmt::format("{} ({:.4f})", star_tier(p), p);
  return s;
}

}  // namespace entprop
