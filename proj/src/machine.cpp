#include "emtk/machine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace emtk {

namespace {
constexpr double kEmissionTolerance = 1e-9;
}

std::string to_string(MachineKind kind) {
  switch (kind) {
    case MachineKind::epsilon_machine: return "epsilon_machine";
    case MachineKind::transducer_memoryless: return "transducer_memoryless";
    case MachineKind::transducer_memoryful: return "transducer_memoryful";
  }
  throw std::runtime_error("machine: unknown kind");
}

MachineKind machine_kind_from_string(const std::string& s) {
  if (s == "epsilon_machine") return MachineKind::epsilon_machine;
  if (s == "transducer_memoryless") return MachineKind::transducer_memoryless;
  if (s == "transducer_memoryful") return MachineKind::transducer_memoryful;
  throw std::runtime_error("machine: unknown kind '" + s + "'");
}

std::string Machine::symbol_name(int symbol) const {
  if (kind == MachineKind::transducer_memoryful)
    return std::to_string(joint_input(symbol)) + "|" + std::to_string(joint_output(symbol));
  return std::to_string(symbol);
}

int Machine::symbol_from_name(const std::string& name) const {
  for (int a = 0; a < num_transition_symbols(); ++a)
    if (symbol_name(a) == name) return a;
  throw std::runtime_error("machine: unknown transition symbol '" + name + "'");
}

bool Machine::operator==(const Machine& other) const {
  auto states_equal = [&] {
    if (states.size() != other.states.size()) return false;
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].emission != other.states[i].emission || states[i].label != other.states[i].label)
        return false;
    return true;
  };
  return kind == other.kind && states_equal() && transitions == other.transitions &&
         suffix_map == other.suffix_map && history_length == other.history_length &&
         sync_policy == other.sync_policy;
}

void validate_machine(const Machine& m) {
  const int n = m.num_states();
  if (n == 0) throw std::runtime_error("machine invariant violated: no states");
  if (m.transitions.size() != m.states.size())
    throw std::runtime_error("machine invariant violated: transition table size mismatch");
  for (int s = 0; s < n; ++s) {
    double total = 0.0;
    for (double p : m.states[s].emission) {
      if (p < 0.0 || !std::isfinite(p))
        throw std::runtime_error("machine invariant violated: emission probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > kEmissionTolerance)
      throw std::runtime_error("machine invariant violated: emission distribution does not sum to 1");
    if (static_cast<int>(m.transitions[s].size()) != m.num_transition_symbols())
      throw std::runtime_error("machine invariant violated: transition row size mismatch");
    for (int target : m.transitions[s])
      if (target < -1 || target >= n)
        throw std::runtime_error("machine invariant violated: transition target out of range");
  }
  for (const auto& [history, state] : m.suffix_map) {
    if (state < 0 || state >= n)
      throw std::runtime_error("machine invariant violated: suffix_map targets a missing state");
    if (static_cast<int>(history.size()) > m.history_length)
      throw std::runtime_error("machine invariant violated: suffix_map history longer than history_length");
    for (unsigned char c : history)
      if (c >= m.num_transition_symbols())
        throw std::runtime_error("machine invariant violated: suffix_map history has an invalid symbol");
  }
  // Unifilarity is structural here (one successor slot per symbol); the
  // remaining check is that every defined transition symbol with positive
  // modeled probability has a successor where one is required.
}

double symbol_probability(const Machine& m, int state, int symbol, double input_one_rate) {
  const double q1 = input_one_rate;
  switch (m.kind) {
    case MachineKind::epsilon_machine:
      return m.states[state].emission[symbol];
    case MachineKind::transducer_memoryful: {
      const double qy = joint_input(symbol) == 1 ? q1 : 1.0 - q1;
      return qy * m.states[state].emission[joint_output(symbol)];
    }
    case MachineKind::transducer_memoryless:
      return symbol == 1 ? q1 : 1.0 - q1;
  }
  return 0.0;
}

namespace {

// Tarjan strongly-connected components over the defined-transition graph.
struct SccResult {
  std::vector<int> component;  // state -> component id
  int count = 0;
};

SccResult strongly_connected_components(const Machine& m) {
  const int n = m.num_states();
  SccResult result;
  result.component.assign(n, -1);
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;

  std::function<void(int)> strongconnect = [&](int v) {
    index[v] = lowlink[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int target : m.transitions[v]) {
      if (target < 0) continue;
      if (index[target] < 0) {
        strongconnect(target);
        lowlink[v] = std::min(lowlink[v], lowlink[target]);
      } else if (on_stack[target]) {
        lowlink[v] = std::min(lowlink[v], index[target]);
      }
    }
    if (lowlink[v] == index[v]) {
      while (true) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        result.component[w] = result.count;
        if (w == v) break;
      }
      ++result.count;
    }
  };

  for (int v = 0; v < n; ++v)
    if (index[v] < 0) strongconnect(v);
  return result;
}

}  // namespace

std::vector<int> recurrent_states(const Machine& m) {
  const SccResult scc = strongly_connected_components(m);
  std::vector<bool> terminal(scc.count, true);
  for (int s = 0; s < m.num_states(); ++s)
    for (int target : m.transitions[s])
      if (target >= 0 && scc.component[target] != scc.component[s])
        terminal[scc.component[s]] = false;
  std::vector<int> out;
  for (int s = 0; s < m.num_states(); ++s)
    if (terminal[scc.component[s]]) out.push_back(s);
  return out;
}

StationaryDistribution stationary_distribution(const Machine& m, double input_one_rate) {
  validate_machine(m);
  const std::vector<int> recurrent = recurrent_states(m);
  if (recurrent.empty())
    throw std::runtime_error("stationary_distribution: machine has no recurrent component");

  const SccResult scc = strongly_connected_components(m);
  std::vector<int> components;
  for (int s : recurrent)
    if (std::find(components.begin(), components.end(), scc.component[s]) == components.end())
      components.push_back(scc.component[s]);

  StationaryDistribution result;
  result.weights.assign(m.num_states(), 0.0);

  // Solve pi P = pi per terminal component; a direct solve also covers
  // periodic chains where power iteration would not settle.
  for (int comp : components) {
    std::vector<int> members;
    for (int s = 0; s < m.num_states(); ++s)
      if (scc.component[s] == comp) members.push_back(s);
    const int k = static_cast<int>(members.size());
    std::vector<int> local(m.num_states(), -1);
    for (int i = 0; i < k; ++i) local[members[i]] = i;

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      const int s = members[i];
      double row_total = 0.0;
      for (int a = 0; a < m.num_transition_symbols(); ++a) {
        const int target = m.transitions[s][a];
        if (target < 0) continue;
        const double prob = symbol_probability(m, s, a, input_one_rate);
        p(i, local[target]) += prob;
        row_total += prob;
      }
      if (row_total <= 0.0)
        throw std::runtime_error("stationary_distribution: recurrent state has no outgoing probability");
      p.row(i) /= row_total;
    }

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd lhs = p.transpose() - Eigen::MatrixXd::Identity(k, k);
    lhs.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1.0;
    Eigen::VectorXd pi = lhs.fullPivLu().solve(rhs);

    double residual = (pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff();
    if (!pi.allFinite() || residual > 1e-8)
      throw std::runtime_error(
          "stationary_distribution: fixed-point solve failed to converge within tolerance 1e-8");
    result.tolerance = std::max(result.tolerance, residual);

    const double share = 1.0 / static_cast<double>(components.size());
    for (int i = 0; i < k; ++i)
      result.weights[members[i]] = std::max(0.0, pi(i)) * share;
  }

  double total = 0.0;
  for (double w : result.weights) total += w;
  for (double& w : result.weights) w /= total;
  return result;
}

std::string history_to_text(const Machine& m, const std::string& history) {
  std::string out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += ',';
    out += m.symbol_name(static_cast<unsigned char>(history[i]));
  }
  return out;
}

std::string history_from_text(const Machine& m, const std::string& text) {
  std::string out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ','))
    out.push_back(static_cast<char>(m.symbol_from_name(token)));
  return out;
}

std::string machine_to_json(const Machine& m) {
  validate_machine(m);
  nlohmann::json doc;
  doc["kind"] = to_string(m.kind);
  nlohmann::json alphabet = nlohmann::json::array();
  for (int a = 0; a < m.num_transition_symbols(); ++a) alphabet.push_back(m.symbol_name(a));
  doc["alphabet"] = alphabet;
  doc["history_length"] = m.history_length;
  doc["sync_policy"] = m.sync_policy;

  nlohmann::json states = nlohmann::json::array();
  for (int s = 0; s < m.num_states(); ++s) {
    nlohmann::json js;
    js["id"] = s;
    nlohmann::json emissions;
    for (int x = 0; x < 2; ++x) emissions[std::to_string(x)] = m.states[s].emission[x];
    js["emissions"] = emissions;
    if (!m.states[s].label.empty()) js["label"] = m.states[s].label;
    states.push_back(js);
  }
  doc["states"] = states;

  nlohmann::json transitions = nlohmann::json::array();
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < m.num_transition_symbols(); ++a)
      if (m.transitions[s][a] >= 0)
        transitions.push_back({{"from", s}, {"symbol", m.symbol_name(a)}, {"to", m.transitions[s][a]}});
  doc["transitions"] = transitions;

  nlohmann::json suffixes;
  for (const auto& [history, state] : m.suffix_map)
    suffixes[history_to_text(m, history)] = state;
  doc["suffix_map"] = suffixes;
  return doc.dump(2);
}

Machine machine_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  Machine m;
  m.kind = machine_kind_from_string(doc.at("kind").get<std::string>());
  m.history_length = doc.at("history_length").get<int>();
  m.sync_policy = doc.at("sync_policy").get<std::string>();

  const auto& states = doc.at("states");
  m.states.resize(states.size());
  m.transitions.assign(states.size(), std::vector<int>(m.num_transition_symbols(), -1));
  for (const auto& js : states) {
    const int id = js.at("id").get<int>();
    if (id < 0 || id >= static_cast<int>(m.states.size()))
      throw std::runtime_error("machine json: state id out of range");
    for (int x = 0; x < 2; ++x)
      m.states[id].emission[x] = js.at("emissions").at(std::to_string(x)).get<double>();
    if (js.contains("label")) m.states[id].label = js.at("label").get<std::string>();
  }
  for (const auto& jt : doc.at("transitions")) {
    const int from = jt.at("from").get<int>();
    const int to = jt.at("to").get<int>();
    const int symbol = m.symbol_from_name(jt.at("symbol").get<std::string>());
    m.transitions.at(from).at(symbol) = to;
  }
  for (const auto& [key, value] : doc.at("suffix_map").items())
    m.suffix_map[history_from_text(m, key)] = value.get<int>();
  validate_machine(m);
  return m;
}

std::string machine_to_dot(const Machine& m, const std::string& name) {
  validate_machine(m);
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n";
  for (int s = 0; s < m.num_states(); ++s) {
    out << "  s" << s << " [shape=circle, label=\"" << s;
    if (!m.states[s].label.empty()) out << "\\n" << m.states[s].label;
    out << "\"];\n";
  }
  out.setf(std::ios::fmtflags(0), std::ios::floatfield);
  out.precision(6);
  for (int s = 0; s < m.num_states(); ++s) {
    for (int a = 0; a < m.num_transition_symbols(); ++a) {
      const int target = m.transitions[s][a];
      if (target < 0) continue;
      out << "  s" << s << " -> s" << target << " [label=\"" << m.symbol_name(a) << " : ";
      if (m.kind == MachineKind::transducer_memoryless)
        out << "-";
      else
        out << m.states[s].emission[m.transition_output(a)];
      out << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::vector<double> block_distribution(const Machine& m, int block_length) {
  if (m.kind != MachineKind::epsilon_machine)
    throw std::runtime_error("block_distribution: epsilon-machines only");
  const StationaryDistribution pi = stationary_distribution(m);
  const std::size_t n_blocks = std::size_t{1} << block_length;
  std::vector<double> dist(n_blocks, 0.0);
  // weight[state] holds the joint probability of the block prefix and state.
  for (std::size_t block = 0; block < n_blocks; ++block) {
    std::vector<double> weight = pi.weights;
    for (int i = 0; i < block_length; ++i) {
      const int x = static_cast<int>((block >> (block_length - 1 - i)) & 1);
      std::vector<double> next(m.num_states(), 0.0);
      for (int s = 0; s < m.num_states(); ++s) {
        if (weight[s] <= 0.0) continue;
        const double p = weight[s] * m.states[s].emission[x];
        if (p <= 0.0) continue;
        const int target = m.transitions[s][x];
        if (target < 0) continue;
        next[target] += p;
      }
      weight = std::move(next);
    }
    for (double w : weight) dist[block] += w;
  }
  return dist;
}

}  // namespace emtk
