#include "emtk/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "emtk/rng.hpp"

namespace emtk {

namespace {

struct FilterInput {
  const std::vector<std::uint8_t>* symbols;  // transition symbols per bin
  const BinarySeries* output;                // scored output series
  double input_one_rate = 0.5;
};

Prediction run_filter(const Machine& m, const FilterInput& in) {
  validate_machine(m);
  const StationaryDistribution pi = stationary_distribution(m, in.input_one_rate);
  double mixture = 0.0;
  for (int s = 0; s < m.num_states(); ++s) mixture += pi.weights[s] * m.states[s].emission[1];

  const std::size_t l_max = static_cast<std::size_t>(m.history_length);
  Prediction pred;
  pred.p_one.resize(in.output->size());
  pred.synchronized.resize(in.output->size());

  for (const DaySegment& seg : in.output->segments) {
    std::string buffer;
    int state = -1;
    for (std::size_t t = seg.start; t < seg.start + seg.length; ++t) {
      if (state < 0) {
        // Longest suffix of the segment-so-far present in the suffix map.
        for (std::size_t len = buffer.size() + 1; len-- > 0;) {
          auto it = m.suffix_map.find(buffer.substr(buffer.size() - len));
          if (it != m.suffix_map.end()) {
            state = it->second;
            break;
          }
        }
      }
      pred.synchronized[t] = state >= 0;
      pred.p_one[t] = state >= 0 ? m.states[state].emission[1] : mixture;

      const int symbol = (*in.symbols)[t];
      if (state >= 0) state = m.transitions[state][symbol];  // -1 desynchronizes
      buffer.push_back(static_cast<char>(symbol));
      if (buffer.size() > l_max) buffer.erase(0, buffer.size() - l_max);
    }
  }
  return pred;
}

}  // namespace

Prediction filter_predict(const Machine& m, const BinarySeries& series) {
  if (m.kind != MachineKind::epsilon_machine)
    throw std::runtime_error("filter_predict: transducer machines require a joint series");
  series.validate();
  return run_filter(m, {&series.values, &series, 0.5});
}

Prediction filter_predict(const Machine& m, const JointSeries& series) {
  if (m.kind == MachineKind::epsilon_machine)
    throw std::runtime_error("filter_predict: epsilon-machines take an output series");
  series.validate();
  std::vector<std::uint8_t> symbols(series.size());
  for (std::size_t i = 0; i < symbols.size(); ++i)
    symbols[i] = m.kind == MachineKind::transducer_memoryful
                     ? static_cast<std::uint8_t>(
                           joint_symbol(series.input.values[i], series.output.values[i]))
                     : series.input.values[i];
  double rate = 0.5;
  if (!series.input.values.empty()) {
    std::size_t ones = 0;
    for (std::uint8_t v : series.input.values) ones += v;
    rate = static_cast<double>(ones) / static_cast<double>(series.input.values.size());
  }
  return run_filter(m, {&symbols, &series.output, rate});
}

double etv(const BinarySeries& observed, std::span<const double> p_one) {
  if (observed.size() == 0) throw std::runtime_error("etv: empty series");
  if (observed.size() != p_one.size())
    throw std::runtime_error("etv: series and prediction lengths differ");
  double total = 0.0;
  for (std::size_t t = 0; t < p_one.size(); ++t)
    total += std::abs(static_cast<double>(observed.values[t]) - p_one[t]);
  return total / static_cast<double>(p_one.size());
}

double etv(const BinarySeries& observed, const Prediction& pred) {
  return etv(observed, pred.p_one);
}

void CVConfig::validate() const {
  if (folds < 2) throw std::runtime_error("cv config: folds must be >= 2");
  if (l_max_min < 1 || l_max_max < l_max_min)
    throw std::runtime_error("cv config: invalid l_max range");
}

std::vector<std::vector<std::size_t>> assign_folds(std::size_t n_segments, const CVConfig& cfg) {
  cfg.validate();
  if (n_segments < static_cast<std::size_t>(cfg.folds))
    throw std::runtime_error("cross_validate: fewer day segments than folds");
  std::vector<std::size_t> order(n_segments);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(cfg.seed);
  for (std::size_t i = n_segments - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(i + 1)]);
  std::vector<std::vector<std::size_t>> folds(cfg.folds);
  for (std::size_t i = 0; i < n_segments; ++i)
    folds[i % cfg.folds].push_back(order[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

template <typename Series>
Machine reconstruct_any(const Series& series, const ReconstructionConfig& cfg) {
  if constexpr (std::is_same_v<Series, BinarySeries>)
    return reconstruct_machine(series, cfg);
  else
    return reconstruct_transducer(series, cfg);
}

template <typename Series>
const BinarySeries& output_of(const Series& series) {
  if constexpr (std::is_same_v<Series, BinarySeries>)
    return series;
  else
    return series.output;
}

template <typename Series>
CrossValidationResult cross_validate_impl(const Series& series, const CVConfig& cv,
                                          const ReconstructionConfig& recon) {
  cv.validate();
  const std::size_t n_segments = output_of(series).segments.size();
  CrossValidationResult result;
  result.folds = assign_folds(n_segments, cv);

  std::vector<std::vector<std::size_t>> train_indices(cv.folds);
  for (int k = 0; k < cv.folds; ++k) {
    for (std::size_t i = 0; i < n_segments; ++i)
      if (std::find(result.folds[k].begin(), result.folds[k].end(), i) == result.folds[k].end())
        train_indices[k].push_back(i);
  }

  std::vector<std::vector<double>> fold_scores;  // aligned with l_max_curve
  for (int l = cv.l_max_min; l <= cv.l_max_max; ++l) {
    ReconstructionConfig cfg = recon;
    cfg.l_max = l;
    std::vector<double> scores;
    bool valid = true;
    for (int k = 0; k < cv.folds && valid; ++k) {
      try {
        const Series train = series.select_segments(train_indices[k]);
        const Series held_out = series.select_segments(result.folds[k]);
        const Machine machine = reconstruct_any(train, cfg);
        const Prediction pred = filter_predict(machine, held_out);
        scores.push_back(etv(output_of(held_out), pred));
      } catch (const std::exception&) {
        valid = false;
      }
    }
    if (!valid) continue;
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    result.l_max_curve.emplace_back(l, mean);
    fold_scores.push_back(std::move(scores));
  }

  if (result.l_max_curve.empty())
    throw std::runtime_error("cross_validate: reconstruction failed for every l_max");

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.l_max_curve.size(); ++i)
    if (result.l_max_curve[i].second < result.l_max_curve[best].second) best = i;
  result.chosen_l_max = result.l_max_curve[best].first;
  result.fold_etv = fold_scores[best];
  result.mean_etv = result.l_max_curve[best].second;

  ReconstructionConfig cfg = recon;
  cfg.l_max = result.chosen_l_max;
  result.final_machine = reconstruct_any(series, cfg);
  return result;
}

}  // namespace

CrossValidationResult cross_validate(const BinarySeries& series, const CVConfig& cv,
                                     const ReconstructionConfig& recon) {
  return cross_validate_impl(series, cv, recon);
}

CrossValidationResult cross_validate(const JointSeries& series, const CVConfig& cv,
                                     const ReconstructionConfig& recon) {
  return cross_validate_impl(series, cv, recon);
}

ScoreTable score_models(const EvaluationRecord& seasonal,
                        std::span<const EvaluationRecord> models) {
  ScoreTable table;
  auto score_of = [&](const EvaluationRecord& record) {
    if (record.test_etv > 0.0) return seasonal.test_etv / record.test_etv;
    if (seasonal.test_etv > 0.0) return std::numeric_limits<double>::infinity();
    return 1.0;
  };
  table.scores.emplace_back(seasonal.model, 1.0);
  for (const EvaluationRecord& record : models)
    table.scores.emplace_back(record.model, score_of(record));
  for (std::size_t i = 0; i < table.scores.size(); ++i)
    for (std::size_t j = 0; j < table.scores.size(); ++j)
      if (i != j)
        table.pairwise.emplace_back(table.scores[i].first, table.scores[j].first,
                                    table.scores[i].second > table.scores[j].second);
  return table;
}

}  // namespace emtk
