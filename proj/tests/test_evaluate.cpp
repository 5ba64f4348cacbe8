#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "emtk/evaluate.hpp"
#include "emtk/parametric.hpp"
#include "test_helpers.hpp"

using emtk::BinarySeries;
using emtk::CVConfig;
using emtk::EvaluationRecord;
using emtk::JointSeries;
using emtk::Machine;
using emtk::Prediction;
using emtk::SplitMix64;

TEST_CASE("filtering a bernoulli machine synchronizes immediately") {
  const Machine m = emtk::bernoulli_machine(0.3);
  const BinarySeries s = BinarySeries::single_segment({0, 1, 1, 0, 1});
  const Prediction pred = emtk::filter_predict(m, s);
  REQUIRE(pred.p_one.size() == s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    CHECK(pred.p_one[t] == doctest::Approx(0.3));
    CHECK(pred.synchronized[t] == 1);
  }
}

TEST_CASE("filtering the golden mean forbids a 1 right after a 1") {
  Machine m;
  m.states.resize(2);
  m.states[0].emission = {0.5, 0.5};
  m.states[1].emission = {1.0, 0.0};
  m.transitions = {{0, 1}, {0, -1}};
  m.history_length = 1;
  m.suffix_map[std::string(1, '\0')] = 0;
  m.suffix_map[std::string(1, '\x01')] = 1;
  emtk::validate_machine(m);

  const BinarySeries s = BinarySeries::single_segment({0, 1, 0, 0, 1, 0});
  const Prediction pred = emtk::filter_predict(m, s);
  // bin 0 is unsynchronized: stationary mixture (2/3) 0.5 + (1/3) 0 = 1/3
  CHECK(pred.synchronized[0] == 0);
  CHECK(pred.p_one[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  // after observing a 1 the next prediction is exactly 0
  CHECK(pred.synchronized[2] == 1);
  CHECK(pred.p_one[2] == doctest::Approx(0.0));
  CHECK(pred.p_one[5] == doctest::Approx(0.0));
  // after a 0 the machine is in the mixing state
  CHECK(pred.p_one[1] == doctest::Approx(0.5));
  CHECK(pred.p_one[4] == doctest::Approx(0.5));
}

TEST_CASE("filter desynchronizes on a probability-zero observation") {
  Machine m;
  m.states.resize(2);
  m.states[0].emission = {0.5, 0.5};
  m.states[1].emission = {1.0, 0.0};
  m.transitions = {{0, 1}, {0, -1}};
  m.history_length = 1;
  m.suffix_map[std::string(1, '\0')] = 0;
  emtk::validate_machine(m);  // "1" unmapped: seeing a 1 cannot re-synchronize

  const BinarySeries s = BinarySeries::single_segment({0, 1, 1, 0, 0});
  const Prediction pred = emtk::filter_predict(m, s);
  CHECK(pred.synchronized[1] == 1);   // after the 0
  CHECK(pred.synchronized[2] == 1);   // state 1 reached on the first 1
  CHECK(pred.synchronized[3] == 0);   // state 1 has no transition on 1
  CHECK(pred.synchronized[4] == 1);   // "0" suffix re-synchronizes
}

TEST_CASE("segments reset synchronization") {
  const Machine m = emtk::family_to_machine([] {
    emtk::RenewalFamily f;
    f.head = {0.1, 0.3, 0.4};
    return f;
  }());
  BinarySeries s;
  s.values = {0, 0, 1, 0, 0, 1};
  s.segments = {{0, 3, 0}, {3, 3, 1}};
  s.validate();
  const Prediction pred = emtk::filter_predict(m, s);
  // history_length is 2, so each segment starts unsynchronized
  CHECK(pred.synchronized[0] == 0);
  CHECK(pred.synchronized[3] == 0);
  CHECK(pred.synchronized[2] == 1);
  CHECK(pred.synchronized[5] == 1);
}

TEST_CASE("filtering the mention-gated transducer reacts to mentions") {
  const Machine m = emtk::mention_gated_transducer(0.1, 0.7, 0.5);
  JointSeries joint;
  joint.input = BinarySeries::single_segment({0, 1, 0, 0, 0});
  joint.output = BinarySeries::single_segment({0, 0, 1, 0, 0});
  const Prediction pred = emtk::filter_predict(m, joint);
  // the mention at t=1 makes the t=2 prediction the mentioned rate
  CHECK(pred.p_one[2] == doctest::Approx(0.5));
  // activity at t=2 without a fresh mention gives the active rate at t=3
  CHECK(pred.p_one[3] == doctest::Approx(0.7));
  // inactivity without mentions decays back to the quiet rate
  CHECK(pred.p_one[4] == doctest::Approx(0.1));
}

TEST_CASE("filter_predict rejects mismatched machine and series kinds") {
  const Machine machine = emtk::bernoulli_machine(0.3);
  JointSeries joint;
  joint.input = BinarySeries::single_segment({0, 1});
  joint.output = BinarySeries::single_segment({1, 0});
  CHECK_THROWS_AS(emtk::filter_predict(machine, joint), std::runtime_error);
  const Machine trans = emtk::mention_gated_transducer(0.1, 0.7, 0.5);
  CHECK_THROWS_AS(emtk::filter_predict(trans, joint.output), std::runtime_error);
}

TEST_CASE("etv hand cases") {
  const BinarySeries s = BinarySeries::single_segment({1, 0, 1});
  const std::vector<double> exact = {1.0, 0.0, 1.0};
  CHECK(emtk::etv(s, exact) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> p = {0.8, 0.3, 0.6};
  CHECK(emtk::etv(s, p) == doctest::Approx(0.3).epsilon(1e-12));
  const std::vector<double> worst = {0.0, 1.0, 0.0};
  CHECK(emtk::etv(s, worst) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("etv rejects degenerate inputs") {
  BinarySeries empty;
  CHECK_THROWS_AS(emtk::etv(empty, std::vector<double>{}), std::runtime_error);
  const BinarySeries s = BinarySeries::single_segment({1, 0});
  CHECK_THROWS_AS(emtk::etv(s, std::vector<double>{0.5}), std::runtime_error);
}

TEST_CASE("etv lies in [0,1] and is invariant to joint permutation") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next_below(40);
    std::vector<std::uint8_t> values(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = rng.bernoulli(0.5) ? 1 : 0;
      p[i] = rng.next_double();
    }
    const double before = emtk::etv(BinarySeries::single_segment(values), p);
    CHECK(before >= 0.0);
    CHECK(before <= 1.0);
    // permute bins jointly: the mean of per-bin errors cannot change
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
    std::vector<std::uint8_t> pv(n);
    std::vector<double> pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      pv[i] = values[order[i]];
      pp[i] = p[order[i]];
    }
    CHECK(emtk::etv(BinarySeries::single_segment(pv), pp) ==
          doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("assign_folds partitions the segments deterministically") {
  CVConfig cfg;
  cfg.folds = 5;
  cfg.seed = 42;
  const auto folds = emtk::assign_folds(23, cfg);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    CHECK(std::is_sorted(fold.begin(), fold.end()));
    for (std::size_t idx : fold) {
      CHECK(idx < 23);
      CHECK(seen.insert(idx).second);
    }
  }
  CHECK(seen.size() == 23);
  // balanced within one element
  for (const auto& fold : folds) {
    CHECK(fold.size() >= 23 / 5);
    CHECK(fold.size() <= 23 / 5 + 1);
  }
  CHECK(emtk::assign_folds(23, cfg) == folds);
  CVConfig other = cfg;
  other.seed = 43;
  CHECK(emtk::assign_folds(23, other) != folds);
}

TEST_CASE("cv config validation") {
  CVConfig cfg;
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
  cfg.folds = 2;
  cfg.l_max_min = 3;
  cfg.l_max_max = 2;
  CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
}

TEST_CASE("cross validation of strict alternation is near zero error") {
  // two identical days of deterministic alternation; only the first bin of
  // each day is unsynchronized and costs 0.5
  std::vector<std::uint8_t> values(156);
  for (std::size_t t = 0; t < values.size(); ++t) values[t] = t % 2;
  const BinarySeries s = emtk::testing::segmented(values, 78);
  CVConfig cv;
  cv.folds = 2;
  cv.l_max_min = 1;
  cv.l_max_max = 2;
  emtk::ReconstructionConfig recon;
  const auto result = emtk::cross_validate(s, cv, recon);
  CHECK(result.chosen_l_max == 1);  // ties break toward smaller l_max
  CHECK(result.mean_etv <= 0.01);
  CHECK(result.final_machine.num_states() == 2);
}

TEST_CASE("cross validation prefers the informative l_max for the golden mean") {
  Machine gm;
  gm.states.resize(2);
  gm.states[0].emission = {0.5, 0.5};
  gm.states[1].emission = {1.0, 0.0};
  gm.transitions = {{0, 1}, {0, -1}};
  const BinarySeries long_run = emtk::simulate(gm, 78 * 40, 77);
  const BinarySeries s = emtk::testing::segmented(long_run.values, 78);
  CVConfig cv;
  cv.folds = 5;
  cv.l_max_min = 1;
  cv.l_max_max = 3;
  emtk::ReconstructionConfig recon;
  const auto result = emtk::cross_validate(s, cv, recon);
  CHECK(result.final_machine.num_states() == 2);
  // the fitted machine clearly beats a memoryless fit on held-out data
  const double marginal = 1.0 / 3.0;
  double best_memoryless = 2.0 * marginal * (1.0 - marginal);  // expected ETV of p=1/3
  CHECK(result.mean_etv < best_memoryless - 0.02);
}

TEST_CASE("cross validation is deterministic") {
  const BinarySeries iid = emtk::iid_series(0.3, 78 * 20, 15);
  const BinarySeries s = emtk::testing::segmented(iid.values, 78);
  CVConfig cv;
  cv.folds = 5;
  cv.l_max_max = 3;
  emtk::ReconstructionConfig recon;
  const auto a = emtk::cross_validate(s, cv, recon);
  const auto b = emtk::cross_validate(s, cv, recon);
  CHECK(a.chosen_l_max == b.chosen_l_max);
  CHECK(a.fold_etv == b.fold_etv);
  CHECK(a.final_machine == b.final_machine);
}

TEST_CASE("score_models hand cases") {
  EvaluationRecord seasonal;
  seasonal.model = "seasonal";
  seasonal.test_etv = 0.4;
  EvaluationRecord better;
  better.model = "machine";
  better.test_etv = 0.2;
  EvaluationRecord worse;
  worse.model = "transducer-memoryless";
  worse.test_etv = 0.5;
  const std::vector<EvaluationRecord> models = {better, worse};
  const auto table = emtk::score_models(seasonal, models);

  REQUIRE(table.scores.size() == 3);
  CHECK(table.scores[0].first == "seasonal");
  CHECK(table.scores[0].second == doctest::Approx(1.0));
  CHECK(table.scores[1].second == doctest::Approx(2.0));
  CHECK(table.scores[2].second == doctest::Approx(0.8));

  bool found = false;
  for (const auto& [a, b, win] : table.pairwise) {
    if (a == "machine" && b == "seasonal") {
      CHECK(win);
      found = true;
    }
    if (a == "transducer-memoryless" && b == "seasonal") CHECK_FALSE(win);
  }
  CHECK(found);
}

TEST_CASE("a perfect model scores infinity against an imperfect baseline") {
  EvaluationRecord seasonal;
  seasonal.model = "seasonal";
  seasonal.test_etv = 0.4;
  EvaluationRecord perfect;
  perfect.model = "machine";
  perfect.test_etv = 0.0;
  const std::vector<EvaluationRecord> models = {perfect};
  const auto table = emtk::score_models(seasonal, models);
  CHECK(table.scores[1].second == std::numeric_limits<double>::infinity());
}

TEST_CASE("filtering is deterministic") {
  SplitMix64 rng(1234);
  const Machine m = emtk::testing::random_unifilar_machine(rng);
  const BinarySeries s = emtk::simulate(m, 5000, 9);
  const Prediction a = emtk::filter_predict(m, s);
  const Prediction b = emtk::filter_predict(m, s);
  CHECK(a.p_one == b.p_one);
  CHECK(a.synchronized == b.synchronized);
}
