#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "emtk/machine.hpp"

namespace emtk {

enum class Family {
  bernoulli,
  renewal,
  reverse_renewal,
  alternating_renewal,
  transducer_renewal_like,
  transducer_alt_renewal_like,
  other,
};

std::string family_name(Family family);

struct ArchitectureReport {
  Family family = Family::other;
  std::optional<int> order;  // none for family other
  int state_count = 0;
  double topological_complexity = 0.0;  // log2(state_count)
  // Transducer chain lengths keyed by (previous run symbol, run symbol).
  std::vector<std::tuple<std::string, std::string, int>> chain_lengths;
  std::vector<std::string> notes;
};

// Order-1 structural rule: for each symbol x, exactly one state is entered
// on x from states entered on a symbol other than x.
bool passes_alternating_order1(const Machine& m);

// Order-k rule on the suffix map: the state must be a function of the
// last-k-runs encoding of each full-length suffix.  The oldest run of a
// suffix with at most k runs may be truncated by the window, so those
// encodings carry a censoring flag and only match each other.
bool passes_run_encoding_order(const Machine& m, int k);

// Architecture taxonomy for binary epsilon-machines: Bernoulli, renewal,
// reverse renewal, alternating renewal of order k, or other.
ArchitectureReport classify_machine(const Machine& m);

// Architecture taxonomy for binary transducers: counting chains for the
// memoryless kind, run-structured quadrants and thirds for the memoryful
// kind, with the order-k suffix fallback shared with classify_machine.
ArchitectureReport classify_transducer(const Machine& m);

// Dispatches on the machine kind.
ArchitectureReport classify_any(const Machine& m);

}  // namespace emtk
