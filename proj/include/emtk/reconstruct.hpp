#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "emtk/machine.hpp"
#include "emtk/series.hpp"
#include "emtk/stats.hpp"

namespace emtk {

struct ReconstructionConfig {
  int l_max = 3;
  double alpha = 0.001;
  // Histories with fewer occurrences than this are attached to their parent
  // state without testing (the G-test is asymptotic).
  std::uint64_t min_count = 5;
  MachineKind mode = MachineKind::epsilon_machine;

  void validate() const;
};

// Occurrence and next-output counts for every history of length <= l_max.
// Histories are strings of raw transition-symbol bytes, oldest symbol
// first.  Counting starts at offset l_max within each day segment, so the
// count of a history equals the sum over its one-symbol extensions and no
// count spans a daycast gap.
struct SuffixTable {
  int l_max = 0;
  int n_transition_symbols = 2;
  std::unordered_map<std::string, CountVector> next_counts;

  const CountVector* find(const std::string& history) const {
    auto it = next_counts.find(history);
    return it == next_counts.end() ? nullptr : &it->second;
  }
  std::uint64_t occurrences(const std::string& history) const {
    const CountVector* c = find(history);
    return c ? c->total() : 0;
  }
};

SuffixTable build_suffix_table(const BinarySeries& series, const ReconstructionConfig& cfg);
SuffixTable build_suffix_table(const JointSeries& series, const ReconstructionConfig& cfg);

// Working partition of histories during reconstruction.
struct CandidateStateSet {
  struct Candidate {
    std::vector<std::string> histories;  // insertion order
    CountVector pooled;
    bool alive = true;
  };
  std::vector<Candidate> states;
  std::unordered_map<std::string, int> assignment;  // history -> state index

  int add_state() {
    states.push_back({});
    states.back().pooled = CountVector(2);
    return static_cast<int>(states.size()) - 1;
  }
  void place(const std::string& history, int state, const CountVector& counts) {
    states[state].histories.push_back(history);
    states[state].pooled.add(counts);
    assignment[history] = state;
  }
};

// Phase II: grow histories from length 0 to l_max, keeping each with its
// parent state when the G-test accepts, otherwise moving it to the
// accepting state with the highest p-value, otherwise splitting off a new
// state.
CandidateStateSet homogenize(const SuffixTable& table, const ReconstructionConfig& cfg);

// Phase III: split states until transitions are deterministic, remove
// transient states, and assemble the final machine with emissions
// re-estimated from the length-l_max partition.
Machine determinize(CandidateStateSet states, const SuffixTable& table,
                    const ReconstructionConfig& cfg);

Machine reconstruct_machine(const BinarySeries& series, const ReconstructionConfig& cfg);
Machine reconstruct_transducer(const JointSeries& series, const ReconstructionConfig& cfg);

}  // namespace emtk
