#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "emtk/parametric.hpp"
#include "emtk/reconstruct.hpp"
#include "test_helpers.hpp"

using emtk::BinarySeries;
using emtk::CandidateStateSet;
using emtk::JointSeries;
using emtk::Machine;
using emtk::MachineKind;
using emtk::ReconstructionConfig;
using emtk::SplitMix64;
using emtk::SuffixTable;

namespace {

ReconstructionConfig config(int l_max, MachineKind mode = MachineKind::epsilon_machine) {
  ReconstructionConfig cfg;
  cfg.l_max = l_max;
  cfg.mode = mode;
  return cfg;
}

Machine golden_mean_machine() {
  Machine m;
  m.states.resize(2);
  m.states[0].emission = {0.5, 0.5};
  m.states[1].emission = {1.0, 0.0};
  m.transitions = {{0, 1}, {0, -1}};
  emtk::validate_machine(m);
  return m;
}

Machine even_process_machine() {
  Machine m;
  m.states.resize(2);
  m.states[0].emission = {0.5, 0.5};
  m.states[1].emission = {0.0, 1.0};
  m.transitions = {{0, 1}, {-1, 0}};
  emtk::validate_machine(m);
  return m;
}

std::string raw(std::initializer_list<int> symbols) {
  std::string h;
  for (int s : symbols) h.push_back(static_cast<char>(s));
  return h;
}

}  // namespace

TEST_CASE("suffix table hand enumeration on 0,1,0,1") {
  const BinarySeries s = BinarySeries::single_segment({0, 1, 0, 1});
  const SuffixTable table = emtk::build_suffix_table(s, config(1));
  REQUIRE(table.find(raw({0})) != nullptr);
  CHECK(table.find(raw({0}))->counts == std::vector<std::uint64_t>{0, 2});
  REQUIRE(table.find(raw({1})) != nullptr);
  CHECK(table.find(raw({1}))->counts == std::vector<std::uint64_t>{1, 0});
  CHECK(table.occurrences(std::string()) == 3);
}

TEST_CASE("suffix table never counts across segment boundaries") {
  BinarySeries s;
  s.values = {0, 1, 0, 1};
  s.segments = {{0, 2, 0}, {2, 2, 1}};
  s.validate();
  const SuffixTable table = emtk::build_suffix_table(s, config(1));
  REQUIRE(table.find(raw({0})) != nullptr);
  CHECK(table.find(raw({0}))->counts == std::vector<std::uint64_t>{0, 2});
  CHECK(table.find(raw({1})) == nullptr);  // "1" only ends segments
}

TEST_CASE("suffix table equals a brute-force enumeration on random series") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> values(120);
    for (auto& v : values) v = rng.bernoulli(0.4) ? 1 : 0;
    const BinarySeries s = emtk::testing::segmented(values, 30);
    const int l_max = 1 + static_cast<int>(rng.next_below(3));
    const SuffixTable table = emtk::build_suffix_table(s, config(l_max));

    std::map<std::string, std::vector<std::uint64_t>> brute;
    for (const auto& seg : s.segments) {
      for (std::size_t t = seg.start + l_max; t < seg.start + seg.length; ++t) {
        for (int len = 0; len <= l_max; ++len) {
          std::string h(s.values.begin() + t - len, s.values.begin() + t);
          auto& counts = brute[h];
          counts.resize(2, 0);
          ++counts[s.values[t]];
        }
      }
    }
    CHECK(table.next_counts.size() == brute.size());
    for (const auto& [h, counts] : brute) {
      REQUIRE(table.find(h) != nullptr);
      CHECK(table.find(h)->counts == counts);
    }
  }
}

TEST_CASE("history counts are the sum of their one-symbol extensions") {
  const BinarySeries s =
      emtk::simulate(golden_mean_machine(), 20000, /*seed=*/5);
  const SuffixTable table = emtk::build_suffix_table(s, config(3));
  for (const auto& [h, counts] : table.next_counts) {
    if (static_cast<int>(h.size()) >= 3) continue;
    std::uint64_t extended = 0;
    for (int a = 0; a < 2; ++a) {
      const auto* child = table.find(std::string(1, static_cast<char>(a)) + h);
      if (child) extended += child->total();
    }
    CHECK(table.occurrences(h) == extended);
  }
}

TEST_CASE("suffix table errors when every segment is too short") {
  const BinarySeries s = BinarySeries::single_segment({0, 1});
  CHECK_THROWS_WITH_AS(emtk::build_suffix_table(s, config(3)),
                       "insufficient data: no day segment is longer than l_max",
                       std::runtime_error);
}

TEST_CASE("bernoulli suffix statistics concentrate near the rate") {
  const BinarySeries s = emtk::iid_series(0.3, 100000, 77);
  const SuffixTable table = emtk::build_suffix_table(s, config(3));
  for (int bits = 0; bits < 8; ++bits) {
    const std::string h = raw({(bits >> 2) & 1, (bits >> 1) & 1, bits & 1});
    REQUIRE(table.find(h) != nullptr);
    const auto dist = table.find(h)->distribution();
    CHECK(std::abs(dist[1] - 0.3) < 0.02);
  }
}

TEST_CASE("homogenize leaves an i.i.d. sample in one candidate state") {
  const BinarySeries s = emtk::iid_series(0.5, 100000, 13);
  const SuffixTable table = emtk::build_suffix_table(s, config(3));
  const CandidateStateSet states = emtk::homogenize(table, config(3));
  int populated = 0;
  for (const auto& st : states.states)
    if (st.alive && !st.histories.empty()) ++populated;
  CHECK(populated == 1);
}

TEST_CASE("homogenize separates golden-mean histories by their last symbol") {
  const BinarySeries s = emtk::simulate(golden_mean_machine(), 100000, 21);
  const SuffixTable table = emtk::build_suffix_table(s, config(3));
  const CandidateStateSet states = emtk::homogenize(table, config(3));

  std::set<int> states_with_long_histories;
  std::map<int, std::set<char>> last_symbols;
  for (const auto& [h, idx] : states.assignment) {
    if (h.empty()) continue;
    states_with_long_histories.insert(idx);
    last_symbols[idx].insert(h.back());
  }
  CHECK(states_with_long_histories.size() == 2);
  for (const auto& [idx, symbols] : last_symbols) CHECK(symbols.size() == 1);
}

TEST_CASE("homogenize groups an order-2 source by its last two symbols") {
  // P(1 | last two symbols): 00 -> 0.1, 01 -> 0.8, 10 -> 0.4, 11 -> 0.6
  const double table2[4] = {0.1, 0.8, 0.4, 0.6};
  SplitMix64 rng(31);
  std::vector<std::uint8_t> values(200000);
  int ctx = 0;
  for (auto& v : values) {
    v = rng.bernoulli(table2[ctx]) ? 1 : 0;
    ctx = ((ctx << 1) | v) & 3;
  }
  const BinarySeries s = BinarySeries::single_segment(std::move(values));
  const SuffixTable table = emtk::build_suffix_table(s, config(3));
  const CandidateStateSet states = emtk::homogenize(table, config(3));

  // Brute-force oracle: group length-3 histories by their last two symbols.
  std::map<std::string, int> suffix2_to_state;
  std::set<int> states_of_full_histories;
  for (const auto& [h, idx] : states.assignment) {
    if (h.size() != 3) continue;
    states_of_full_histories.insert(idx);
    const std::string key = h.substr(1);
    auto [it, inserted] = suffix2_to_state.emplace(key, idx);
    CHECK(it->second == idx);
  }
  CHECK(states_of_full_histories.size() <= 4);
}

TEST_CASE("reconstruct bernoulli sample to a single state") {
  const BinarySeries s = emtk::iid_series(0.3, 100000, 41);
  const Machine m = emtk::reconstruct_machine(s, config(2));
  REQUIRE(m.num_states() == 1);
  CHECK(std::abs(m.states[0].emission[1] - 0.3) < 0.01);
}

TEST_CASE("reconstruct golden mean with calibrated probabilities") {
  const BinarySeries s = emtk::simulate(golden_mean_machine(), 100000, 61);
  const Machine m = emtk::reconstruct_machine(s, config(3));
  REQUIRE(m.num_states() == 2);
  // one state emits 1 with probability ~0.5, the other never emits 1
  std::vector<double> p1 = {m.states[0].emission[1], m.states[1].emission[1]};
  std::sort(p1.begin(), p1.end());
  CHECK(std::abs(p1[0] - 0.0) < 0.02);
  CHECK(std::abs(p1[1] - 0.5) < 0.02);
}

TEST_CASE("determinization splits period-3 histories that share a next distribution") {
  // Pattern 001001001...: "01" and "10" both deterministically emit 0 but
  // lead to different successor states, so homogenization alone leaves an
  // ambiguous state that determinization must split.
  std::vector<std::uint8_t> values(9000);
  for (std::size_t t = 0; t < values.size(); ++t) values[t] = (t % 3 == 2) ? 1 : 0;
  const BinarySeries s = BinarySeries::single_segment(std::move(values));
  const Machine m = emtk::reconstruct_machine(s, config(3));
  REQUIRE(m.num_states() == 3);
  // deterministic emissions everywhere
  for (const auto& st : m.states)
    CHECK(std::max(st.emission[0], st.emission[1]) == doctest::Approx(1.0));
}

TEST_CASE("reconstruct renewal chain with n_tilde 2 to the 3-state shape") {
  emtk::RenewalFamily fam;
  fam.head = {0.1, 0.3, 0.4};
  const Machine truth = emtk::family_to_machine(fam);
  const BinarySeries s = emtk::simulate(truth, 500000, 17);
  const Machine m = emtk::reconstruct_machine(s, config(3));
  REQUIRE(m.num_states() == 3);
  // unique state entered on 1
  std::set<int> entered_on_one;
  for (int st = 0; st < 3; ++st)
    if (m.transitions[st][1] >= 0) entered_on_one.insert(m.transitions[st][1]);
  CHECK(entered_on_one.size() == 1);
}

TEST_CASE("reconstruct even process to two recurrent states") {
  const BinarySeries s = emtk::simulate(even_process_machine(), 300000, 23);
  const Machine m = emtk::reconstruct_machine(s, config(5));
  CHECK(m.num_states() == 2);
}

TEST_CASE("transducer reconstruction of a copy channel") {
  // X_t = Y_{t-1}: two-state memoryful transducer with deterministic output
  SplitMix64 rng(8);
  const std::size_t n = 200000;
  std::vector<std::uint8_t> input(n), output(n);
  for (std::size_t t = 0; t < n; ++t) {
    input[t] = rng.bernoulli(0.5) ? 1 : 0;
    output[t] = t == 0 ? 0 : input[t - 1];
  }
  JointSeries joint;
  joint.input = BinarySeries::single_segment(std::move(input));
  joint.output = BinarySeries::single_segment(std::move(output));
  const Machine m = emtk::reconstruct_transducer(joint, config(1, MachineKind::transducer_memoryful));
  REQUIRE(m.num_states() == 2);
  for (const auto& st : m.states)
    CHECK(std::max(st.emission[0], st.emission[1]) > 0.999);
}

TEST_CASE("transducer reconstruction of an input-independent output") {
  const std::size_t n = 100000;
  const BinarySeries input = emtk::iid_series(0.5, n, 3);
  const BinarySeries output = emtk::iid_series(0.4, n, 4);
  JointSeries joint{input, output};
  const Machine m = emtk::reconstruct_transducer(joint, config(2, MachineKind::transducer_memoryful));
  REQUIRE(m.num_states() == 1);
  CHECK(std::abs(m.states[0].emission[1] - 0.4) < 0.01);
}

TEST_CASE("memoryless transducer on an all-zero input degenerates to one state") {
  const std::size_t n = 50000;
  const BinarySeries input = BinarySeries::single_segment(std::vector<std::uint8_t>(n, 0));
  const BinarySeries output = emtk::iid_series(0.3, n, 9);
  JointSeries joint{input, output};
  const Machine m =
      emtk::reconstruct_transducer(joint, config(2, MachineKind::transducer_memoryless));
  CHECK(m.num_states() == 1);
}

TEST_CASE("reconstruction is deterministic") {
  const BinarySeries s = emtk::simulate(golden_mean_machine(), 50000, 100);
  const Machine a = emtk::reconstruct_machine(s, config(3));
  const Machine b = emtk::reconstruct_machine(s, config(3));
  CHECK(a == b);
}

TEST_CASE("partition property: every observed full-length history is mapped") {
  SplitMix64 rng(500);
  for (int trial = 0; trial < 30; ++trial) {
    const Machine source = emtk::testing::random_unifilar_machine(rng, 4);
    const BinarySeries s = emtk::simulate(source, 30000, rng.next_u64());
    const Machine m = emtk::reconstruct_machine(s, config(2));
    const SuffixTable table = emtk::build_suffix_table(s, config(2));
    for (const auto& [h, counts] : table.next_counts) {
      if (h.size() != 2 || counts.total() == 0) continue;
      CHECK(m.suffix_map.count(h) == 1);
    }
  }
}

TEST_CASE("determinization refines the homogenized partition") {
  const BinarySeries s = emtk::simulate(even_process_machine(), 100000, 3);
  const SuffixTable table = emtk::build_suffix_table(s, config(4));
  const CandidateStateSet homog = emtk::homogenize(table, config(4));
  const Machine m = emtk::determinize(homog, table, config(4));

  std::map<int, int> final_to_homog;
  for (const auto& [h, final_state] : m.suffix_map) {
    const int homog_state = homog.assignment.at(h);
    auto [it, inserted] = final_to_homog.emplace(final_state, homog_state);
    CHECK(it->second == homog_state);
  }
}
