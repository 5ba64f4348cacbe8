#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emtk/series.hpp"

namespace emtk {

// Periodic inhomogeneous Bernoulli model: logit(p(t)) = intercept + Fourier
// expansion in (t mod period_bins).  Exactly periodic by construction.
struct SeasonalModel {
  double intercept = 0.0;
  std::vector<double> basis_coefficients;  // cos/sin pairs, harmonics 1..H
  int harmonics = 0;
  int period_bins = 0;
  double smoothing = 0.0;              // ridge penalty weight
  std::vector<double> fitted_profile;  // p(t) for t in 0..period_bins-1
  bool degenerate = false;             // all-zero / all-one training series

  void validate() const;
};

// Bin-of-week index of bin t, derived from the containing segment's
// calendar day.  bins_per_day is the daycasted day length.
std::size_t bin_of_week(const BinarySeries& series, std::size_t t, int bins_per_day);

// Penalized logistic fit of the weekly profile on a cyclic Fourier basis.
// Harmonic count and ridge penalty are selected by generalized cross
// validation over the supplied grids.  Deterministic given data and grids.
SeasonalModel fit_seasonal(const BinarySeries& train, int bins_per_day,
                           std::span<const int> harmonics_grid,
                           std::span<const double> penalty_grid);

SeasonalModel fit_seasonal(const BinarySeries& train, int bins_per_day);

double seasonal_predict(const SeasonalModel& m, std::size_t bin_index);

// Per-bin predictions aligned to a series' calendar.
std::vector<double> seasonal_predict_series(const SeasonalModel& m, const BinarySeries& series,
                                            int bins_per_day);

}  // namespace emtk
