#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace replica {

// Standard normal helpers. Infinite arguments are handled explicitly so the
// truncated-moment formulas below can be used with open regions.

inline double normal_pdf(double u) {
  if (std::isinf(u)) return 0.0;
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

// Q(u) = P(U > u).
inline double normal_upper_tail(double u) {
  return 0.5 * std::erfc(u / std::numbers::sqrt2);
}

inline double normal_cdf(double u) { return normal_upper_tail(-u); }

// P(lo <= U <= hi), computed from the tail nearest the interval so that
// probabilities deep in a tail keep their relative precision.
inline double normal_interval(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) return normal_upper_tail(lo) - normal_upper_tail(hi);
  if (hi <= 0.0) return normal_upper_tail(-hi) - normal_upper_tail(-lo);
  return 1.0 - normal_upper_tail(hi) - normal_upper_tail(-lo);
}

// E[(alpha + slope*U)^2 ; lo <= U <= hi] for U ~ N(0,1).
inline double truncated_square_moment(double alpha, double slope, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  const double p = normal_interval(lo, hi);
  const double m1 = normal_pdf(lo) - normal_pdf(hi);
  const double lo_term = std::isinf(lo) ? 0.0 : lo * normal_pdf(lo);
  const double hi_term = std::isinf(hi) ? 0.0 : hi * normal_pdf(hi);
  const double m2 = p + lo_term - hi_term;
  return alpha * alpha * p + 2.0 * alpha * slope * m1 + slope * slope * m2;
}

// P(|Z| > c) for Z ~ N(mean, var). var == 0 degenerates to an indicator.
inline double gaussian_abs_exceed(double mean, double var, double c) {
  if (var <= 0.0) return std::abs(mean) > c ? 1.0 : 0.0;
  const double sd = std::sqrt(var);
  return normal_upper_tail((c - mean) / sd) + normal_upper_tail((c + mean) / sd);
}

/// Gauss-Hermite rule for expectations over v ~ N(0,1):
/// E[g(v)] ~= sum_i weights[i] * g(nodes[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermiteRule(int n);

  template <class F>
  double expect(F&& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
    return acc;
  }
};

// Shared, lazily built rule for n nodes. Thread-safe.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace replica
