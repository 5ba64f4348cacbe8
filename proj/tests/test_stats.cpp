#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "emtk/rng.hpp"
#include "emtk/stats.hpp"

using emtk::CountVector;
using emtk::SplitMix64;

namespace {

CountVector counts(std::vector<std::uint64_t> values) {
  CountVector c;
  c.counts = std::move(values);
  return c;
}

// Scratch re-evaluation of the G formula, written independently of the
// library implementation (long double accumulation, explicit 0 ln 0 = 0).
long double scratch_g(const CountVector& observed, const std::vector<double>& reference) {
  long double total = 0.0L;
  for (auto c : observed.counts) total += c;
  long double g = 0.0L;
  for (std::size_t i = 0; i < observed.counts.size(); ++i) {
    if (observed.counts[i] == 0) continue;
    const long double n = static_cast<long double>(observed.counts[i]);
    g += n * std::log(n / (total * static_cast<long double>(reference[i])));
  }
  return 2.0L * g;
}

}  // namespace

TEST_CASE("g_statistic hand cases") {
  const std::vector<double> half = {0.5, 0.5};
  CHECK(emtk::g_statistic(counts({50, 50}), half) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(emtk::g_statistic(counts({0, 0}), half) == 0.0);
  const double g = emtk::g_statistic(counts({90, 10}), half);
  CHECK(std::abs(g - static_cast<double>(scratch_g(counts({90, 10}), half))) < 1e-9);
}

TEST_CASE("g_statistic matches the scratch oracle on 1000 random pairs") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.next_below(4);
    CountVector obs(k);
    for (auto& c : obs.counts) c = rng.next_below(500);
    std::vector<double> ref(k);
    double total = 0.0;
    for (auto& p : ref) {
      p = 0.05 + rng.next_double();
      total += p;
    }
    for (auto& p : ref) p /= total;
    const double got = emtk::g_statistic(obs, ref);
    const double want = static_cast<double>(scratch_g(obs, ref));
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("g is nonnegative and zero only at exact agreement") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    CountVector obs(2);
    obs.counts = {rng.next_below(200), rng.next_below(200)};
    std::vector<double> ref = {0.25, 0.75};
    CHECK(emtk::g_statistic(obs, ref) >= 0.0);
  }
  // exact agreement at the reference proportions
  CHECK(emtk::g_statistic(counts({25, 75}), std::vector<double>{0.25, 0.75}) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("g is invariant under symbol permutation") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    CountVector obs(3);
    obs.counts = {rng.next_below(100), rng.next_below(100), rng.next_below(100)};
    std::vector<double> ref = {0.2, 0.3, 0.5};
    const double before = emtk::g_statistic(obs, ref);
    std::swap(obs.counts[0], obs.counts[2]);
    std::swap(ref[0], ref[2]);
    CHECK(emtk::g_statistic(obs, ref) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("zero-probability symbol with observations rejects definitely") {
  const std::vector<double> ref = {1.0, 0.0};
  CHECK(emtk::g_statistic(counts({5, 1}), ref) == std::numeric_limits<double>::infinity());
  const auto result = emtk::g_test(counts({5, 1}), ref, 0.001);
  CHECK(result.reject);
  CHECK(result.p_value == 0.0);
}

TEST_CASE("chi-squared survival function against closed forms") {
  // dof 1: sf(x) = erfc(sqrt(x/2)); dof 2: sf(x) = exp(-x/2).
  for (double x : {0.1, 0.5, 1.0, 3.841, 6.635, 10.83, 25.0}) {
    CHECK(emtk::chi_squared_sf(x, 1) ==
          doctest::Approx(std::erfc(std::sqrt(x / 2.0))).epsilon(1e-10));
    CHECK(emtk::chi_squared_sf(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-10));
  }
  // published critical values
  CHECK(emtk::chi_squared_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(emtk::chi_squared_sf(10.827566170662733, 1) == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("g_test hand cases") {
  const std::vector<double> half = {0.5, 0.5};
  const auto accept = emtk::g_test(counts({50, 50}), half, 0.001);
  CHECK_FALSE(accept.reject);
  CHECK(accept.p_value == doctest::Approx(1.0));
  const auto reject = emtk::g_test(counts({90, 10}), half, 0.001);
  CHECK(reject.reject);
  CHECK(reject.g > 10.83);  // far beyond the 0.001 critical value of chi-squared(1)
}

TEST_CASE("one-symbol alphabet always accepts") {
  const auto result = emtk::g_test(counts({42}), std::vector<double>{1.0}, 0.001);
  CHECK_FALSE(result.reject);
  CHECK(result.p_value == 1.0);
}

namespace {

double calibration_rate(std::size_t alphabet, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::vector<double> ref(alphabet, 1.0 / static_cast<double>(alphabet));
  int rejections = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    CountVector obs(alphabet);
    for (int i = 0; i < 500; ++i) ++obs.counts[rng.next_below(alphabet)];
    if (emtk::g_test(obs, ref, 0.05).reject) ++rejections;
  }
  return rejections / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("type-I calibration at alpha 0.05 for alphabets 2 and 4") {
  const double rate2 = calibration_rate(2, 101);
  CHECK(rate2 >= 0.03);
  CHECK(rate2 <= 0.07);
  const double rate4 = calibration_rate(4, 202);
  CHECK(rate4 >= 0.03);
  CHECK(rate4 <= 0.07);
}
