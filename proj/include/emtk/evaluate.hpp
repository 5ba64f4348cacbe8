#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emtk/machine.hpp"
#include "emtk/reconstruct.hpp"
#include "emtk/series.hpp"

namespace emtk {

// Per-bin activity probabilities produced by filtering a machine along a
// series.  `synchronized[t]` records whether the filter had resolved a
// unique state when predicting bin t.
struct Prediction {
  std::vector<double> p_one;
  std::vector<std::uint8_t> synchronized;
};

// Tracks the machine state within each day segment by longest-suffix
// synchronization against the suffix map.  Unsynchronized bins get the
// stationary-weighted mixture of state emissions; a probability-zero
// observation desynchronizes the filter, which then re-synchronizes.
Prediction filter_predict(const Machine& m, const BinarySeries& series);
Prediction filter_predict(const Machine& m, const JointSeries& series);

// Empirical total variation for binary series:
// (1/|T|) sum_t |delta_{x_t,1} - p(1,t)|.
double etv(const BinarySeries& observed, std::span<const double> p_one);
double etv(const BinarySeries& observed, const Prediction& pred);

struct CVConfig {
  int folds = 5;
  std::uint64_t seed = 0;
  int l_max_min = 1;
  int l_max_max = 6;

  void validate() const;
};

struct EvaluationRecord {
  std::string stream_id;
  std::string model;
  int chosen_l_max = 0;
  std::vector<double> fold_etv;  // at the chosen l_max
  double mean_etv = 0.0;
  double test_etv = 0.0;
  double score = 0.0;  // seasonal test ETV / model test ETV
  std::string unsync_policy = "stationary-mixture";
};

struct CrossValidationResult {
  int chosen_l_max = 0;
  std::vector<double> fold_etv;                       // at the chosen l_max
  double mean_etv = 0.0;
  std::vector<std::pair<int, double>> l_max_curve;    // (l_max, mean ETV) of valid rows
  std::vector<std::vector<std::size_t>> folds;        // segment indices per fold
  Machine final_machine;                              // refit on all data at chosen l_max
};

// Seeded random partition of day segments into K folds.
std::vector<std::vector<std::size_t>> assign_folds(std::size_t n_segments, const CVConfig& cfg);

// K-fold cross-validation over l_max for epsilon-machines (BinarySeries)
// and transducers (JointSeries).  l_max values with any failed fold are
// excluded; ties break toward smaller l_max.
CrossValidationResult cross_validate(const BinarySeries& series, const CVConfig& cv,
                                     const ReconstructionConfig& recon);
CrossValidationResult cross_validate(const JointSeries& series, const CVConfig& cv,
                                     const ReconstructionConfig& recon);

struct ScoreTable {
  // model name -> score; the seasonal baseline scores 1 by definition.
  std::vector<std::pair<std::string, double>> scores;
  // (model1, model2, score1 > score2)
  std::vector<std::tuple<std::string, std::string, bool>> pairwise;
};

// Score(M; S) = ETV(S) / ETV(M) on test data, plus pairwise win indicators.
// A zero model ETV with nonzero seasonal ETV reports +infinity.
ScoreTable score_models(const EvaluationRecord& seasonal,
                        std::span<const EvaluationRecord> models);

}  // namespace emtk
