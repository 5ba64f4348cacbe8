#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace emtk {

enum class MachineKind { epsilon_machine, transducer_memoryless, transducer_memoryful };

std::string to_string(MachineKind kind);
MachineKind machine_kind_from_string(const std::string& s);

// Joint input-output symbol encoding used for memoryful transducer
// transitions: index = y * 2 + x.
inline int joint_symbol(int y, int x) { return y * 2 + x; }
inline int joint_input(int symbol) { return symbol >> 1; }
inline int joint_output(int symbol) { return symbol & 1; }

// Unifilar stochastic finite automaton.  Houses epsilon-machines (output
// transitions) and epsilon-transducers (input or joint transitions with
// emission distributions over outputs only; the input is exogenous).
struct Machine {
  struct State {
    // P(next output | state); indexed by output symbol, sums to 1.
    std::array<double, 2> emission{0.0, 0.0};
    std::string label;  // optional human annotation; never used for identity
  };

  MachineKind kind = MachineKind::epsilon_machine;
  std::vector<State> states;
  // transitions[state][transition symbol] -> successor id, or -1 if absent.
  std::vector<std::vector<int>> transitions;
  // Histories (sequences of transition symbols, rawest-first) retained from
  // reconstruction; used for filter synchronization.  Keys are raw symbol
  // bytes (values 0..3), not printable characters.
  std::map<std::string, int> suffix_map;
  // Maximum history length the suffix map was built with.
  int history_length = 0;
  std::string sync_policy = "longest-suffix";

  int num_states() const { return static_cast<int>(states.size()); }
  int num_transition_symbols() const {
    return kind == MachineKind::transducer_memoryful ? 4 : 2;
  }
  // Output component of a transition symbol, per kind.  For memoryless
  // transducers the transition symbol is the input and carries no output.
  int transition_output(int symbol) const {
    return kind == MachineKind::transducer_memoryful ? joint_output(symbol) : symbol;
  }

  int transition(int state, int symbol) const { return transitions[state][symbol]; }

  // Display name of a transition symbol: "0"/"1", or "y|x" for joint pairs.
  std::string symbol_name(int symbol) const;
  int symbol_from_name(const std::string& name) const;

  bool operator==(const Machine& other) const;
};

// Throws std::runtime_error naming the violated invariant.
void validate_machine(const Machine& m);

struct StationaryDistribution {
  std::vector<double> weights;  // per state; transient states carry 0
  double tolerance = 0.0;       // residual of the fixed-point check
};

// Stationary distribution of the recurrent component.  For transducer
// kinds, input symbols are assumed i.i.d. with marginal P(y=1) =
// input_one_rate, since the transducer itself does not model its input.
StationaryDistribution stationary_distribution(const Machine& m, double input_one_rate = 0.5);

// Probability the machine assigns to taking transition `symbol` from
// `state` (for transducers, combined with the i.i.d. input marginal).
double symbol_probability(const Machine& m, int state, int symbol, double input_one_rate = 0.5);

// State ids belonging to terminal strongly-connected components of the
// transition graph (the recurrent states).
std::vector<int> recurrent_states(const Machine& m);

// Native JSON format; round-trips losslessly.
std::string machine_to_json(const Machine& m);
Machine machine_from_json(const std::string& text);

// Graphviz DOT rendering; transitions labeled "symbol : probability"
// ("y|x : p" for transducers).
std::string machine_to_dot(const Machine& m, const std::string& name = "machine");

// Text form of a history key: symbols joined by ',' ("0,1" or "0|1,1|0").
std::string history_to_text(const Machine& m, const std::string& history);
std::string history_from_text(const Machine& m, const std::string& text);

// Exact distribution over length-L output blocks implied by the machine,
// started from its stationary distribution.  Indexing: block b maps to
// bit i = (b >> (L-1-i)) & 1.  Epsilon-machines only.
std::vector<double> block_distribution(const Machine& m, int block_length);

}  // namespace emtk
