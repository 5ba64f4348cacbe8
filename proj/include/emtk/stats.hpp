#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace emtk {

// Per-symbol event counts for one history or pooled state.
struct CountVector {
  std::vector<std::uint64_t> counts;

  CountVector() = default;
  explicit CountVector(std::size_t n_symbols) : counts(n_symbols, 0) {}

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  void add(const CountVector& other) {
    if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0);
    for (std::size_t i = 0; i < other.counts.size(); ++i) counts[i] += other.counts[i];
  }

  void subtract(const CountVector& other) {
    for (std::size_t i = 0; i < other.counts.size(); ++i) counts[i] -= other.counts[i];
  }

  std::vector<double> distribution() const {
    std::vector<double> p(counts.size(), 0.0);
    const double t = static_cast<double>(total());
    if (t > 0)
      for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / t;
    return p;
  }
};

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x),
// accurate to ~1e-12 relative.
double regularized_gamma_lower(double a, double x);
double regularized_gamma_upper(double a, double x);

// Survival function of the chi-squared distribution with dof degrees of
// freedom, P(X > x).
double chi_squared_sf(double x, double dof);

// Likelihood-ratio statistic G = 2 sum_x n_x ln(n_x / (N p_x)), with
// 0 ln 0 = 0.  A positive observed count on a zero-probability reference
// symbol yields +infinity (a definite rejection).  Empty counts yield 0.
double g_statistic(const CountVector& observed, std::span<const double> reference);

struct GTestResult {
  bool reject = false;
  double p_value = 1.0;
  double g = 0.0;
};

// G-test of the observed counts against the reference distribution at
// significance level alpha; p-value from chi-squared with |alphabet|-1
// degrees of freedom.  A one-symbol alphabet always accepts.
GTestResult g_test(const CountVector& observed, std::span<const double> reference, double alpha);

}  // namespace emtk
