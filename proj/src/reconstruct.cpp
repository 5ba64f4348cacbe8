#include "emtk/reconstruct.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace emtk {

void ReconstructionConfig::validate() const {
  if (l_max < 1) throw std::runtime_error("reconstruction config: l_max must be >= 1");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::runtime_error("reconstruction config: alpha must lie in (0, 1)");
}

namespace {

int transition_symbol_count(MachineKind mode) {
  return mode == MachineKind::transducer_memoryful ? 4 : 2;
}

// Encodes the per-bin transition symbols and next outputs, then counts
// every history of length 0..l_max.  Counting starts at offset l_max
// within each segment so the table is internally consistent: count(h) ==
// sum_a count(a h) for every history shorter than l_max.
SuffixTable count_histories(const std::vector<std::uint8_t>& symbols,
                            const std::vector<std::uint8_t>& outputs,
                            const std::vector<DaySegment>& segments,
                            const ReconstructionConfig& cfg, MachineKind mode) {
  SuffixTable table;
  table.l_max = cfg.l_max;
  table.n_transition_symbols = transition_symbol_count(mode);

  const std::size_t l_max = static_cast<std::size_t>(cfg.l_max);
  for (const DaySegment& seg : segments) {
    if (seg.length < l_max + 1) continue;
    for (std::size_t t = seg.start + l_max; t < seg.start + seg.length; ++t) {
      const int next = outputs[t];
      std::string history;
      history.reserve(l_max);
      for (std::size_t len = 0; len <= l_max; ++len) {
        if (len > 0)
          history.insert(history.begin(), static_cast<char>(symbols[t - len]));
        auto [it, inserted] = table.next_counts.try_emplace(history, CountVector(2));
        it->second.counts[next]++;
      }
    }
  }
  if (table.next_counts.empty())
    throw std::runtime_error("insufficient data: no day segment is longer than l_max");
  return table;
}

}  // namespace

SuffixTable build_suffix_table(const BinarySeries& series, const ReconstructionConfig& cfg) {
  cfg.validate();
  series.validate();
  if (cfg.mode != MachineKind::epsilon_machine)
    throw std::runtime_error("build_suffix_table: output-only series requires epsilon_machine mode");
  return count_histories(series.values, series.values, series.segments, cfg, cfg.mode);
}

SuffixTable build_suffix_table(const JointSeries& series, const ReconstructionConfig& cfg) {
  cfg.validate();
  series.validate();
  if (cfg.mode == MachineKind::epsilon_machine)
    throw std::runtime_error("build_suffix_table: epsilon_machine mode takes an output series");
  std::vector<std::uint8_t> symbols(series.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    symbols[i] = cfg.mode == MachineKind::transducer_memoryful
                     ? static_cast<std::uint8_t>(joint_symbol(series.input.values[i],
                                                              series.output.values[i]))
                     : series.input.values[i];
  }
  return count_histories(symbols, series.output.values, series.output.segments, cfg, cfg.mode);
}

CandidateStateSet homogenize(const SuffixTable& table, const ReconstructionConfig& cfg) {
  cfg.validate();
  CandidateStateSet result;

  const CountVector* root = table.find("");
  if (!root) throw std::runtime_error("insufficient data: empty suffix table");
  result.add_state();
  result.place("", 0, *root);

  for (int level = 0; level < cfg.l_max; ++level) {
    const int n_states_at_level = static_cast<int>(result.states.size());
    for (int s = 0; s < n_states_at_level; ++s) {
      // Member list may grow while extensions are appended to this same
      // state; extensions have length level+1 and are skipped by the
      // length filter.
      for (std::size_t mi = 0; mi < result.states[s].histories.size(); ++mi) {
        const std::string history = result.states[s].histories[mi];
        if (static_cast<int>(history.size()) != level) continue;
        for (int a = 0; a < table.n_transition_symbols; ++a) {
          std::string extended;
          extended.reserve(history.size() + 1);
          extended.push_back(static_cast<char>(a));
          extended += history;
          const CountVector* counts = table.find(extended);
          if (!counts) continue;

          if (counts->total() < cfg.min_count) {
            result.place(extended, s, *counts);
            continue;
          }
          const GTestResult null_test =
              g_test(*counts, result.states[s].pooled.distribution(), cfg.alpha);
          if (!null_test.reject) {
            result.place(extended, s, *counts);
            continue;
          }
          // Restricted alternative: the accepting state with the highest
          // p-value; ties resolve to the lowest state id.
          int best_state = -1;
          double best_p = -1.0;
          for (int s2 = 0; s2 < static_cast<int>(result.states.size()); ++s2) {
            if (s2 == s || !result.states[s2].alive) continue;
            const GTestResult alt =
                g_test(*counts, result.states[s2].pooled.distribution(), cfg.alpha);
            if (!alt.reject && alt.p_value > best_p) {
              best_p = alt.p_value;
              best_state = s2;
            }
          }
          if (best_state >= 0) {
            result.place(extended, best_state, *counts);
          } else {
            const int fresh = result.add_state();
            result.place(extended, fresh, *counts);
          }
        }
      }
    }
  }
  return result;
}

namespace {

// State of the longest observed suffix of `word`, or -1.
int epsilon_map(const CandidateStateSet& states, const SuffixTable& table, std::string word) {
  if (static_cast<int>(word.size()) > table.l_max)
    word.erase(0, word.size() - static_cast<std::size_t>(table.l_max));
  while (true) {
    auto it = states.assignment.find(word);
    if (it != states.assignment.end() && states.states[it->second].alive) return it->second;
    if (word.empty()) return -1;
    word.erase(0, 1);
  }
}

// Successor state of a history on one more symbol, by exact lookup of the
// (truncated) extension.
int successor(const CandidateStateSet& states, const SuffixTable& table,
              const std::string& history, int symbol) {
  std::string word = history;
  word.push_back(static_cast<char>(symbol));
  if (static_cast<int>(word.size()) > table.l_max)
    word.erase(0, word.size() - static_cast<std::size_t>(table.l_max));
  auto it = states.assignment.find(word);
  if (it == states.assignment.end()) return -1;
  return states.states[it->second].alive ? it->second : -1;
}

void move_history(CandidateStateSet& states, const SuffixTable& table, const std::string& history,
                  int from, int to) {
  auto& members = states.states[from].histories;
  members.erase(std::find(members.begin(), members.end(), history));
  const CountVector* counts = table.find(history);
  states.states[from].pooled.subtract(*counts);
  states.states[to].histories.push_back(history);
  states.states[to].pooled.add(*counts);
  states.assignment[history] = to;
}

}  // namespace

Machine determinize(CandidateStateSet states, const SuffixTable& table,
                    const ReconstructionConfig& cfg) {
  const int n_symbols = table.n_transition_symbols;
  const std::size_t split_length = static_cast<std::size_t>(cfg.l_max) - 1;

  // Split until all length-(l_max - 1) members of every state agree on
  // their successor for every symbol.  Splitting is monotone, so this
  // terminates.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < static_cast<int>(states.states.size()); ++s) {
      if (!states.states[s].alive) continue;
      for (int a = 0; a < n_symbols; ++a) {
        int canonical = -2;  // successor of the first member with evidence
        std::vector<std::pair<std::string, int>> dissenters;
        for (const std::string& h : states.states[s].histories) {
          if (h.size() != split_length) continue;
          const int target = successor(states, table, h, a);
          if (target < 0) continue;
          if (canonical == -2)
            canonical = target;
          else if (target != canonical)
            dissenters.emplace_back(h, target);
        }
        if (dissenters.empty()) continue;
        changed = true;
        // One new state per distinct dissenting successor.
        std::vector<std::pair<int, int>> fresh;  // (successor, new state)
        for (const auto& [h, target] : dissenters) {
          int destination = -1;
          for (const auto& [succ, st] : fresh)
            if (succ == target) destination = st;
          if (destination < 0) {
            destination = states.add_state();
            fresh.emplace_back(target, destination);
          }
          move_history(states, table, h, s, destination);
        }
      }
    }
  }

  // Transition evidence per state: prefer length-(l_max - 1) members (they
  // agree by construction), fall back to the longest available member.
  const int n_candidates = static_cast<int>(states.states.size());
  std::vector<std::vector<int>> delta(n_candidates, std::vector<int>(n_symbols, -1));
  for (int s = 0; s < n_candidates; ++s) {
    if (!states.states[s].alive) continue;
    std::vector<std::string> members = states.states[s].histories;
    std::stable_sort(members.begin(), members.end(),
                     [&](const std::string& a, const std::string& b) {
                       if (a.size() != b.size()) {
                         const bool a_pref = a.size() == split_length;
                         const bool b_pref = b.size() == split_length;
                         if (a_pref != b_pref) return a_pref;
                         return a.size() > b.size();
                       }
                       return false;
                     });
    for (int a = 0; a < n_symbols; ++a) {
      for (const std::string& h : members) {
        std::string word = h;
        word.push_back(static_cast<char>(a));
        const int target = epsilon_map(states, table, word);
        if (target >= 0) {
          delta[s][a] = target;
          break;
        }
      }
    }
  }

  // Remove transient states: keep only terminal strongly-connected
  // components, and require at least one defined transition.
  Machine graph;
  graph.kind = cfg.mode;
  graph.states.resize(n_candidates);
  graph.transitions = delta;
  for (auto& st : graph.states) st.emission = {1.0, 0.0};  // placeholder for SCC pass
  std::vector<int> keep_ids = recurrent_states(graph);
  std::vector<int> keep;
  for (int s : keep_ids) {
    if (!states.states[s].alive) continue;
    bool has_transition = false;
    for (int a = 0; a < n_symbols; ++a)
      if (delta[s][a] >= 0) has_transition = true;
    if (has_transition) keep.push_back(s);
  }
  if (keep.empty()) throw std::runtime_error("reconstruction failed: no recurrent states");

  std::vector<int> remap(n_candidates, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<int>(i);

  Machine m;
  m.kind = cfg.mode;
  m.history_length = cfg.l_max;
  m.states.resize(keep.size());
  m.transitions.assign(keep.size(), std::vector<int>(n_symbols, -1));

  for (std::size_t i = 0; i < keep.size(); ++i) {
    const int s = keep[i];
    // Emissions from the length-l_max members: those histories partition
    // the counted positions exactly, so the estimate is unbiased.
    CountVector emission_counts(2);
    for (const std::string& h : states.states[s].histories)
      if (static_cast<int>(h.size()) == cfg.l_max) emission_counts.add(*table.find(h));
    if (emission_counts.total() == 0) emission_counts = states.states[s].pooled;
    const std::vector<double> dist = emission_counts.distribution();
    m.states[i].emission = {dist[0], dist[1]};
    for (int a = 0; a < n_symbols; ++a)
      if (delta[s][a] >= 0 && remap[delta[s][a]] >= 0)
        m.transitions[i][a] = remap[delta[s][a]];
  }

  for (const auto& [history, state] : states.assignment)
    if (remap[state] >= 0) m.suffix_map[history] = remap[state];

  // Full-length histories whose candidate state was transient still need a
  // home so that observed pasts partition into states: fall back to the
  // longest proper suffix that is mapped.
  std::vector<std::string> orphans;
  for (const auto& [history, state] : states.assignment)
    if (static_cast<int>(history.size()) == cfg.l_max && remap[state] < 0)
      orphans.push_back(history);
  std::sort(orphans.begin(), orphans.end());
  std::map<std::string, int> base(m.suffix_map.begin(), m.suffix_map.end());
  for (const std::string& h : orphans) {
    for (std::size_t len = h.size(); len-- > 0;) {
      auto it = base.find(h.substr(h.size() - len));
      if (it != base.end()) {
        m.suffix_map[h] = it->second;
        break;
      }
    }
  }

  validate_machine(m);
  return m;
}

Machine reconstruct_machine(const BinarySeries& series, const ReconstructionConfig& cfg) {
  ReconstructionConfig local = cfg;
  local.mode = MachineKind::epsilon_machine;
  const SuffixTable table = build_suffix_table(series, local);
  return determinize(homogenize(table, local), table, local);
}

Machine reconstruct_transducer(const JointSeries& series, const ReconstructionConfig& cfg) {
  if (cfg.mode == MachineKind::epsilon_machine)
    throw std::runtime_error("reconstruct_transducer: mode must be a transducer kind");
  const SuffixTable table = build_suffix_table(series, cfg);
  return determinize(homogenize(table, cfg), table, cfg);
}

}  // namespace emtk
