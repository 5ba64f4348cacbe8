#include "emtk/parametric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "emtk/rng.hpp"

namespace emtk {

void RenewalFamily::validate() const {
  if (head.empty()) throw std::runtime_error("renewal family invariant violated: empty head");
  double partial = 0.0;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (head[i] < 0.0 || head[i] > 1.0)
      throw std::runtime_error("renewal family invariant violated: head entries must lie in [0, 1]");
    if (i + 1 < head.size()) {
      partial += head[i];
      if (partial >= 1.0)
        throw std::runtime_error(
            "renewal family invariant violated: partial sums must stay below 1 through n_tilde - 1");
    }
  }
  if (partial + head.back() > 1.0 + 1e-12)
    throw std::runtime_error("renewal family invariant violated: head mass exceeds 1");
  if (head.back() <= 0.0)
    throw std::runtime_error("renewal family invariant violated: head must end with positive mass");
  const double lambda = lambda_tail();
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::runtime_error("renewal family invariant violated: tail ratio must lie in [0, 1)");
}

double RenewalFamily::lambda_tail() const {
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < head.size(); ++i) partial += head[i];
  const double tail_before = 1.0 - partial;            // w(n_tilde)
  const double tail_after = tail_before - head.back();  // mass beyond n_tilde
  return tail_after / tail_before;
}

void AlternatingRenewalFamily::validate() const {
  if (quiescence.kind != RenewalFamily::Kind::renewal)
    throw std::runtime_error("alternating family: quiescence component must have kind renewal");
  if (activity.kind != RenewalFamily::Kind::reverse_renewal)
    throw std::runtime_error("alternating family: activity component must have kind reverse_renewal");
  quiescence.validate();
  activity.validate();
}

double interevent_pmf(const RenewalFamily& fam, int n) {
  if (n < 0) throw std::runtime_error("interevent_pmf: n must be nonnegative");
  const int nt = fam.n_tilde();
  if (n <= nt) return fam.head[static_cast<std::size_t>(n)];
  return fam.head.back() * std::pow(fam.lambda_tail(), n - nt);
}

namespace {

// Hazard of ending the gap at length i, P(N = i | N >= i).
double hazard(const RenewalFamily& fam, int i) {
  double survivor = 1.0;
  for (int k = 0; k < i; ++k) survivor -= fam.head[static_cast<std::size_t>(k)];
  return fam.head[static_cast<std::size_t>(i)] / survivor;
}

void set_transition_if_live(Machine& m, int from, int symbol, int to, double probability) {
  if (probability > 0.0) m.transitions[from][symbol] = to;
}

// Fills the suffix map with every binary history of length `window`, with
// the state given by `state_of(history)`, so constructed machines can be
// filtered directly.  Skipped for impractically wide windows.
template <typename StateOf>
void populate_suffix_map(Machine& m, int window, StateOf state_of) {
  if (window > 16) return;
  m.history_length = window;
  if (window == 0) {
    m.suffix_map[std::string()] = state_of(std::string());
    return;
  }
  for (std::uint32_t bits = 0; bits < (1u << window); ++bits) {
    std::string history(window, '\0');
    for (int i = 0; i < window; ++i)
      history[i] = static_cast<char>((bits >> (window - 1 - i)) & 1u);
    m.suffix_map[history] = state_of(history);
  }
}

// Length of the trailing run of `symbol` in a raw history.
int trailing_run(const std::string& history, char symbol) {
  int run = 0;
  for (auto it = history.rbegin(); it != history.rend() && *it == symbol; ++it) ++run;
  return run;
}

}  // namespace

Machine family_to_machine(const RenewalFamily& fam) {
  fam.validate();
  const int n = fam.n_tilde() + 1;
  Machine m;
  m.kind = MachineKind::epsilon_machine;
  m.states.resize(n);
  m.transitions.assign(n, std::vector<int>(2, -1));
  const bool reverse = fam.kind == RenewalFamily::Kind::reverse_renewal;
  const int fire = reverse ? 0 : 1;  // symbol that resets the chain
  for (int i = 0; i < n; ++i) {
    const double h = i == fam.n_tilde() ? 1.0 - fam.lambda_tail() : hazard(fam, i);
    m.states[i].emission[fire] = h;
    m.states[i].emission[1 - fire] = 1.0 - h;
    m.states[i].label = (reverse ? "m=" : "n=") + std::to_string(i);
    set_transition_if_live(m, i, fire, 0, h);
    set_transition_if_live(m, i, 1 - fire, std::min(i + 1, fam.n_tilde()), 1.0 - h);
  }
  // A window of n_tilde symbols pins the state: the count of trailing
  // non-fire symbols, capped at n_tilde.
  populate_suffix_map(m, fam.n_tilde(), [&](const std::string& h) {
    return std::min(trailing_run(h, static_cast<char>(1 - fire)), fam.n_tilde());
  });
  validate_machine(m);
  return m;
}

Machine family_to_machine(const AlternatingRenewalFamily& fam) {
  fam.validate();
  const int m_tilde = fam.activity.n_tilde();
  const int n_tilde = fam.quiescence.n_tilde();
  const int n_active = m_tilde + 1;
  const int n_quiet = n_tilde + 1;
  Machine m;
  m.kind = MachineKind::epsilon_machine;
  m.states.resize(n_active + n_quiet);
  m.transitions.assign(m.states.size(), std::vector<int>(2, -1));
  const int quiet_base = n_active;
  // Activity chain: state i means the current run of 1s has length i + 1.
  for (int i = 0; i < n_active; ++i) {
    const double h = i == m_tilde ? 1.0 - fam.activity.lambda_tail() : hazard(fam.activity, i);
    m.states[i].emission = {h, 1.0 - h};
    m.states[i].label = "A" + std::to_string(i);
    set_transition_if_live(m, i, 0, quiet_base, h);
    set_transition_if_live(m, i, 1, std::min(i + 1, m_tilde), 1.0 - h);
  }
  // Quiescence chain: state j means the current run of 0s has length j + 1.
  for (int j = 0; j < n_quiet; ++j) {
    const int id = quiet_base + j;
    const double h = j == n_tilde ? 1.0 - fam.quiescence.lambda_tail() : hazard(fam.quiescence, j);
    m.states[id].emission = {1.0 - h, h};
    m.states[id].label = "Q" + std::to_string(j);
    set_transition_if_live(m, id, 1, 0, h);
    set_transition_if_live(m, id, 0, quiet_base + std::min(j + 1, n_tilde), 1.0 - h);
  }
  // The state is a function of the trailing run, with its length capped by
  // the owning chain, so a window one longer than the longer chain suffices.
  populate_suffix_map(m, std::max(m_tilde, n_tilde) + 1, [&](const std::string& h) {
    const int ones = trailing_run(h, 1);
    if (ones > 0) return std::min(ones - 1, m_tilde);
    return quiet_base + std::min(trailing_run(h, 0) - 1, n_tilde);
  });
  validate_machine(m);
  return m;
}

Machine bernoulli_machine(double p_one) {
  if (p_one < 0.0 || p_one > 1.0) throw std::runtime_error("bernoulli_machine: p must lie in [0, 1]");
  Machine m;
  m.kind = MachineKind::epsilon_machine;
  m.states.resize(1);
  m.states[0].emission = {1.0 - p_one, p_one};
  m.transitions.assign(1, std::vector<int>(2, -1));
  set_transition_if_live(m, 0, 0, 0, 1.0 - p_one);
  set_transition_if_live(m, 0, 1, 0, p_one);
  m.suffix_map[std::string()] = 0;
  validate_machine(m);
  return m;
}

Machine mention_gated_transducer(double quiet_rate, double active_rate, double mentioned_rate) {
  for (double p : {quiet_rate, active_rate, mentioned_rate})
    if (p < 0.0 || p > 1.0)
      throw std::runtime_error("mention_gated_transducer: rates must lie in [0, 1]");
  Machine m;
  m.kind = MachineKind::transducer_memoryful;
  m.states.resize(3);
  m.states[0].emission = {1.0 - quiet_rate, quiet_rate};
  m.states[0].label = "(0,0)";
  m.states[1].emission = {1.0 - active_rate, active_rate};
  m.states[1].label = "(0,1)";
  m.states[2].emission = {1.0 - mentioned_rate, mentioned_rate};
  m.states[2].label = "(1,*)";
  m.transitions.assign(3, std::vector<int>(4, -1));
  for (int s = 0; s < 3; ++s) {
    m.transitions[s][joint_symbol(0, 0)] = 0;
    m.transitions[s][joint_symbol(0, 1)] = 1;
    m.transitions[s][joint_symbol(1, 0)] = 2;
    m.transitions[s][joint_symbol(1, 1)] = 2;
  }
  // The last joint symbol determines the state.
  m.history_length = 1;
  m.suffix_map[std::string(1, static_cast<char>(joint_symbol(0, 0)))] = 0;
  m.suffix_map[std::string(1, static_cast<char>(joint_symbol(0, 1)))] = 1;
  m.suffix_map[std::string(1, static_cast<char>(joint_symbol(1, 0)))] = 2;
  m.suffix_map[std::string(1, static_cast<char>(joint_symbol(1, 1)))] = 2;
  validate_machine(m);
  return m;
}

BinarySeries simulate(const Machine& m, std::size_t steps, std::uint64_t seed,
                      const BinarySeries* input) {
  validate_machine(m);
  if (steps == 0) throw std::runtime_error("simulate: steps must be positive");
  const bool transducer = m.kind != MachineKind::epsilon_machine;
  if (transducer) {
    if (!input) throw std::runtime_error("simulate: transducer kinds require an input series");
    if (input->size() < steps)
      throw std::runtime_error("simulate: input series shorter than requested steps");
  }

  double input_rate = 0.5;
  if (transducer && input->size() > 0) {
    std::size_t ones = 0;
    for (std::uint8_t v : input->values) ones += v;
    input_rate = static_cast<double>(ones) / static_cast<double>(input->size());
  }
  const StationaryDistribution pi = stationary_distribution(m, transducer ? input_rate : 0.5);

  SplitMix64 rng(seed);
  auto draw_state = [&]() {
    const double u = rng.next_double();
    double acc = 0.0;
    for (int s = 0; s < m.num_states(); ++s) {
      acc += pi.weights[s];
      if (u < acc) return s;
    }
    return m.num_states() - 1;
  };

  int state = draw_state();
  std::vector<std::uint8_t> values(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const int x = rng.bernoulli(m.states[state].emission[1]) ? 1 : 0;
    values[t] = static_cast<std::uint8_t>(x);
    int symbol;
    switch (m.kind) {
      case MachineKind::epsilon_machine: symbol = x; break;
      case MachineKind::transducer_memoryful: symbol = joint_symbol(input->values[t], x); break;
      case MachineKind::transducer_memoryless: symbol = input->values[t]; break;
      default: symbol = x; break;
    }
    const int next = m.transitions[state][symbol];
    state = next >= 0 ? next : draw_state();
  }
  return BinarySeries::single_segment(std::move(values),
                                      input ? input->bin_width_seconds : 600);
}

BinarySeries seasonal_sampler(std::span<const double> weekly_profile, int weeks,
                              std::uint64_t seed, int bins_per_day, int bin_width_seconds) {
  if (weeks <= 0) throw std::runtime_error("seasonal_sampler: weeks must be positive");
  if (weekly_profile.size() != static_cast<std::size_t>(bins_per_day) * 7)
    throw std::runtime_error("seasonal_sampler: profile length must equal bins per week");
  for (double p : weekly_profile)
    if (p < 0.0 || p > 1.0)
      throw std::runtime_error("seasonal_sampler: profile values must lie in [0, 1]");

  SplitMix64 rng(seed);
  BinarySeries out;
  out.bin_width_seconds = bin_width_seconds;
  const std::size_t total = static_cast<std::size_t>(weeks) * weekly_profile.size();
  out.values.resize(total);
  for (std::size_t t = 0; t < total; ++t)
    out.values[t] = rng.bernoulli(weekly_profile[t % weekly_profile.size()]) ? 1 : 0;
  const int n_days = weeks * 7;
  for (int d = 0; d < n_days; ++d)
    out.segments.push_back({static_cast<std::size_t>(d) * bins_per_day,
                            static_cast<std::size_t>(bins_per_day), d});
  out.validate();
  return out;
}

BinarySeries iid_series(double p_one, std::size_t steps, std::uint64_t seed,
                        int bin_width_seconds) {
  if (p_one < 0.0 || p_one > 1.0) throw std::runtime_error("iid_series: p must lie in [0, 1]");
  SplitMix64 rng(seed);
  std::vector<std::uint8_t> values(steps);
  for (auto& v : values) v = rng.bernoulli(p_one) ? 1 : 0;
  return BinarySeries::single_segment(std::move(values), bin_width_seconds);
}

}  // namespace emtk
