#include "emtk/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace emtk {

namespace {

constexpr double kEps = 1e-15;
constexpr int kMaxIterations = 500;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("regularized_gamma: series failed to converge within 500 iterations");
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("regularized_gamma: continued fraction failed to converge within 500 iterations");
}

}  // namespace

double regularized_gamma_lower(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::runtime_error("regularized_gamma: domain error");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_upper(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::runtime_error("regularized_gamma: domain error");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_squared_sf(double x, double dof) {
  if (dof <= 0.0) throw std::runtime_error("chi_squared_sf: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return regularized_gamma_upper(dof / 2.0, x / 2.0);
}

double g_statistic(const CountVector& observed, std::span<const double> reference) {
  if (observed.counts.size() != reference.size())
    throw std::runtime_error("g_statistic: count/reference size mismatch");
  const double n = static_cast<double>(observed.total());
  if (n == 0.0) return 0.0;
  double g = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double obs = static_cast<double>(observed.counts[i]);
    if (obs == 0.0) continue;
    if (reference[i] <= 0.0) return std::numeric_limits<double>::infinity();
    g += obs * std::log(obs / (n * reference[i]));
  }
  return std::max(0.0, 2.0 * g);
}

GTestResult g_test(const CountVector& observed, std::span<const double> reference, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw std::runtime_error("g_test: alpha must lie in (0, 1)");
  GTestResult result;
  result.g = g_statistic(observed, reference);
  const double dof = static_cast<double>(reference.size()) - 1.0;
  if (dof <= 0.0) {
    result.p_value = 1.0;
    result.reject = false;
    return result;
  }
  result.p_value = std::isinf(result.g) ? 0.0 : chi_squared_sf(result.g, dof);
  result.reject = result.p_value < alpha;
  return result;
}

}  // namespace emtk
