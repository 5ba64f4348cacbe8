#include "emtk/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace emtk {

namespace {

double topo_complexity(int state_count) { return std::log2(static_cast<double>(state_count)); }

// Per-symbol sets of states with at least one incoming transition on that
// symbol.
std::vector<std::set<int>> entered_on(const Machine& m) {
  std::vector<std::set<int>> in(m.num_transition_symbols());
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < m.num_transition_symbols(); ++a)
      if (m.transitions[s][a] >= 0) in[a].insert(m.transitions[s][a]);
  return in;
}

// Walks repeated-`symbol` transitions from `head`.  Returns the number of
// steps before the terminal state (a self-loop or an absent transition),
// or -1 if the walk revisits an earlier state.  Visited states are added
// to `covered`.
int chain_walk(const Machine& m, int head, int symbol, std::set<int>& covered) {
  std::set<int> seen;
  int state = head;
  int steps = 0;
  while (true) {
    seen.insert(state);
    covered.insert(state);
    const int next = m.transitions[state][symbol];
    if (next < 0 || next == state) return steps;
    if (seen.count(next)) return -1;
    state = next;
    ++steps;
  }
}

// Run encoding of a raw-symbol history: (symbol, length) pairs for the
// last k runs, plus a flag marking that the oldest included run reaches
// the start of the window and may be truncated.
using RunKey = std::pair<std::vector<std::pair<char, int>>, bool>;

RunKey encode_runs(const std::string& history, int k) {
  std::vector<std::pair<char, int>> runs;
  for (char c : history) {
    if (!runs.empty() && runs.back().first == c)
      ++runs.back().second;
    else
      runs.emplace_back(c, 1);
  }
  const bool censored = static_cast<int>(runs.size()) <= k;
  if (static_cast<int>(runs.size()) > k)
    runs.erase(runs.begin(), runs.end() - k);
  return {std::move(runs), censored};
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::bernoulli: return "bernoulli";
    case Family::renewal: return "renewal";
    case Family::reverse_renewal: return "reverse_renewal";
    case Family::alternating_renewal: return "alternating_renewal";
    case Family::transducer_renewal_like: return "transducer_renewal_like";
    case Family::transducer_alt_renewal_like: return "transducer_alt_renewal_like";
    case Family::other: return "other";
  }
  throw std::runtime_error("family_name: unknown family");
}

bool passes_alternating_order1(const Machine& m) {
  const auto in = entered_on(m);
  const int n_symbols = m.num_transition_symbols();
  for (int a = 0; a < n_symbols; ++a) {
    std::set<int> targets;
    for (int other = 0; other < n_symbols; ++other) {
      if (other == a) continue;
      for (int s : in[other])
        if (m.transitions[s][a] >= 0) targets.insert(m.transitions[s][a]);
    }
    if (targets.size() > 1) return false;
  }
  return true;
}

bool passes_run_encoding_order(const Machine& m, int k) {
  if (k < 1) throw std::runtime_error("passes_run_encoding_order: k must be positive");
  std::map<RunKey, int> key_to_state;
  bool any = false;
  for (const auto& [history, state] : m.suffix_map) {
    if (static_cast<int>(history.size()) != m.history_length) continue;
    any = true;
    RunKey key = encode_runs(history, k);
    auto [it, inserted] = key_to_state.emplace(std::move(key), state);
    if (!inserted && it->second != state) return false;
  }
  return any;
}

ArchitectureReport classify_machine(const Machine& m) {
  if (m.kind != MachineKind::epsilon_machine)
    throw std::runtime_error("classify_machine: expected an epsilon-machine");
  validate_machine(m);

  ArchitectureReport report;
  report.state_count = m.num_states();
  report.topological_complexity = topo_complexity(report.state_count);

  if (report.state_count == 1) {
    report.family = Family::bernoulli;
    report.order = 0;
    return report;
  }

  if (passes_alternating_order1(m)) {
    const auto in = entered_on(m);
    report.order = 1;
    // Renewal machines reset to a single state on a 1; reverse renewal on
    // a 0.  Machines satisfying both reset rules count as renewal.
    if (in[1].size() == 1)
      report.family = Family::renewal;
    else if (in[0].size() == 1)
      report.family = Family::reverse_renewal;
    else
      report.family = Family::alternating_renewal;
    return report;
  }

  for (int k = 2; k <= m.history_length; ++k) {
    if (passes_run_encoding_order(m, k)) {
      report.family = Family::alternating_renewal;
      report.order = k;
      report.notes.push_back("order determined by the last-" + std::to_string(k) +
                             "-runs suffix encoding");
      return report;
    }
  }

  report.family = Family::other;
  return report;
}

namespace {

// Memoryless transducers: a single state entered on input 1, and a simple
// counting chain on input 0 that covers every state.
bool memoryless_chain(const Machine& m, ArchitectureReport& report) {
  const auto in = entered_on(m);
  if (in[1].size() != 1) return false;
  const int head = *in[1].begin();
  std::set<int> covered;
  const int length = chain_walk(m, head, 0, covered);
  if (length < 0) return false;
  if (static_cast<int>(covered.size()) != m.num_states()) return false;
  report.chain_lengths.emplace_back(m.symbol_name(1), m.symbol_name(0), length);
  return true;
}

// Memoryful transducers: for each ordered pair of distinct joint symbols
// (a_prev, a), at most one head state is entered on a from states entered
// on a_prev, and repeated-a transitions from each head form a chain.  The
// chains must cover the whole state set.
bool memoryful_quadrants(const Machine& m, ArchitectureReport& report) {
  const auto in = entered_on(m);
  const int n_symbols = m.num_transition_symbols();

  // heads[a_prev][a]: head of the (a_prev -> a) third, or -1 if that cell
  // has no transitions.
  std::vector<std::vector<int>> heads(n_symbols, std::vector<int>(n_symbols, -1));
  for (int a_prev = 0; a_prev < n_symbols; ++a_prev) {
    for (int a = 0; a < n_symbols; ++a) {
      if (a == a_prev) continue;
      std::set<int> targets;
      for (int s : in[a_prev])
        if (m.transitions[s][a] >= 0) targets.insert(m.transitions[s][a]);
      if (targets.size() > 1) return false;
      if (!targets.empty()) heads[a_prev][a] = *targets.begin();
    }
  }

  std::set<int> covered;
  for (int a = 0; a < n_symbols; ++a) {
    std::set<int> quadrant_heads;
    int cells = 0;
    for (int a_prev = 0; a_prev < n_symbols; ++a_prev) {
      const int head = heads[a_prev][a];
      if (head < 0) continue;
      ++cells;
      quadrant_heads.insert(head);
      const int length = chain_walk(m, head, a, covered);
      if (length < 0) return false;
      report.chain_lengths.emplace_back(m.symbol_name(a_prev), m.symbol_name(a), length);
    }
    if (cells >= 2 && quadrant_heads.size() == 1)
      report.notes.push_back("thirds collapsed for symbol " + m.symbol_name(a));
  }
  if (static_cast<int>(covered.size()) != m.num_states()) return false;

  // States entered on several joint symbols merge those quadrants.
  for (int s = 0; s < m.num_states(); ++s) {
    std::vector<std::string> symbols;
    for (int a = 0; a < n_symbols; ++a)
      if (in[a].count(s)) symbols.push_back(m.symbol_name(a));
    if (symbols.size() > 1) {
      std::string note = "quadrants merged at state " + std::to_string(s) + ":";
      for (const std::string& name : symbols) note += " " + name;
      report.notes.push_back(note);
    }
  }

  if (m.history_length > 0) {
    const int bound = m.history_length * 4 * 3;
    if (m.num_states() > bound)
      report.notes.push_back("state count exceeds the run-structure bound " +
                             std::to_string(bound));
  }
  return true;
}

}  // namespace

ArchitectureReport classify_transducer(const Machine& m) {
  if (m.kind == MachineKind::epsilon_machine)
    throw std::runtime_error("classify_transducer: expected a transducer");
  validate_machine(m);

  ArchitectureReport report;
  report.state_count = m.num_states();
  report.topological_complexity = topo_complexity(report.state_count);

  if (m.kind == MachineKind::transducer_memoryless) {
    if (memoryless_chain(m, report)) {
      report.family = Family::transducer_renewal_like;
      report.order = 1;
      return report;
    }
  } else {
    if (memoryful_quadrants(m, report)) {
      report.family = Family::transducer_alt_renewal_like;
      report.order = 1;
      return report;
    }
  }

  report.chain_lengths.clear();
  report.notes.clear();
  for (int k = 2; k <= m.history_length; ++k) {
    if (passes_run_encoding_order(m, k)) {
      report.family = Family::transducer_alt_renewal_like;
      report.order = k;
      report.notes.push_back("order determined by the last-" + std::to_string(k) +
                             "-runs suffix encoding");
      return report;
    }
  }

  report.family = Family::other;
  return report;
}

ArchitectureReport classify_any(const Machine& m) {
  return m.kind == MachineKind::epsilon_machine ? classify_machine(m) : classify_transducer(m);
}

}  // namespace emtk
