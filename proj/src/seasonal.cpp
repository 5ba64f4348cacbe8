#include "emtk/seasonal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emtk {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

Eigen::MatrixXd fourier_basis(int period, int harmonics) {
  Eigen::MatrixXd x(period, 1 + 2 * harmonics);
  for (int b = 0; b < period; ++b) {
    x(b, 0) = 1.0;
    for (int j = 1; j <= harmonics; ++j) {
      const double angle = 2.0 * std::numbers::pi * j * b / period;
      x(b, 2 * j - 1) = std::cos(angle);
      x(b, 2 * j) = std::sin(angle);
    }
  }
  return x;
}

struct FitResult {
  Eigen::VectorXd beta;
  double gcv = 0.0;
  bool ok = false;
};

// Penalized binomial IRLS on the aggregated weekly profile.  The ridge
// penalty applies to the basis coefficients, never the intercept, so an
// infinite penalty recovers the constant fit.
FitResult penalized_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& successes,
                             const Eigen::VectorXd& trials, double penalty) {
  const int p = static_cast<int>(x.cols());
  const double n_total = trials.sum();

  Eigen::VectorXd pen = Eigen::VectorXd::Constant(p, penalty);
  pen(0) = 0.0;

  FitResult result;
  result.beta = Eigen::VectorXd::Zero(p);
  const double mean_rate =
      std::clamp(successes.sum() / n_total, 0.5 / n_total, 1.0 - 0.5 / n_total);
  result.beta(0) = logit(mean_rate);

  Eigen::MatrixXd xtwx(p, p);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = x * result.beta;
    Eigen::VectorXd mu(eta.size()), w(eta.size());
    for (int b = 0; b < eta.size(); ++b) {
      mu(b) = sigmoid(eta(b));
      w(b) = trials(b) * mu(b) * (1.0 - mu(b));
    }
    const Eigen::VectorXd gradient =
        x.transpose() * (successes - trials.cwiseProduct(mu)) - pen.cwiseProduct(result.beta);
    xtwx = x.transpose() * w.asDiagonal() * x;
    Eigen::MatrixXd hessian = xtwx;
    hessian.diagonal() += pen;
    const Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) return result;
    result.beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }

  // GCV = deviance / (1 - edf/N)^2 with edf from the penalized hat matrix.
  Eigen::MatrixXd hessian = xtwx;
  hessian.diagonal() += pen;
  const double edf = hessian.ldlt().solve(xtwx).trace();

  const Eigen::VectorXd eta = x * result.beta;
  double deviance = 0.0;
  for (int b = 0; b < eta.size(); ++b) {
    if (trials(b) == 0.0) continue;
    const double mu = sigmoid(eta(b));
    const double y = successes(b);
    const double n = trials(b);
    if (y > 0.0) deviance += 2.0 * y * std::log(y / (n * mu));
    if (n - y > 0.0) deviance += 2.0 * (n - y) * std::log((n - y) / (n * (1.0 - mu)));
  }
  const double denom = 1.0 - edf / n_total;
  if (denom <= 0.0) return result;
  result.gcv = deviance / (denom * denom);
  result.ok = true;
  return result;
}

}  // namespace

void SeasonalModel::validate() const {
  if (period_bins <= 0) throw std::runtime_error("seasonal model: period must be positive");
  if (static_cast<int>(fitted_profile.size()) != period_bins)
    throw std::runtime_error("seasonal model: profile length must equal the period");
  for (double p : fitted_profile)
    if (p <= 0.0 || p >= 1.0)
      throw std::runtime_error("seasonal model: profile values must lie strictly in (0, 1)");
}

std::size_t bin_of_week(const BinarySeries& series, std::size_t t, int bins_per_day) {
  auto it = std::upper_bound(series.segments.begin(), series.segments.end(), t,
                             [](std::size_t value, const DaySegment& seg) { return value < seg.start; });
  if (it == series.segments.begin()) throw std::runtime_error("bin_of_week: bin outside all segments");
  const DaySegment& seg = *std::prev(it);
  const std::size_t offset = t - seg.start;
  const std::int64_t day = seg.day_index + static_cast<std::int64_t>(offset) / bins_per_day;
  const std::int64_t dow = ((day % 7) + 7) % 7;
  return static_cast<std::size_t>(dow) * bins_per_day + offset % bins_per_day;
}

SeasonalModel fit_seasonal(const BinarySeries& train, int bins_per_day,
                           std::span<const int> harmonics_grid,
                           std::span<const double> penalty_grid) {
  train.validate();
  const int period = 7 * bins_per_day;
  if (train.size() < 2 * static_cast<std::size_t>(period))
    throw std::runtime_error("fit_seasonal: training series must span at least 2 full weeks");
  if (harmonics_grid.empty() || penalty_grid.empty())
    throw std::runtime_error("fit_seasonal: empty model grid");

  Eigen::VectorXd successes = Eigen::VectorXd::Zero(period);
  Eigen::VectorXd trials = Eigen::VectorXd::Zero(period);
  for (std::size_t t = 0; t < train.size(); ++t) {
    const std::size_t b = bin_of_week(train, t, bins_per_day);
    trials(b) += 1.0;
    successes(b) += train.values[t];
  }
  const double n_total = trials.sum();
  const double floor = 0.5 / n_total;

  SeasonalModel model;
  model.period_bins = period;

  const double total_active = successes.sum();
  if (total_active == 0.0 || total_active == n_total) {
    const double p = total_active == 0.0 ? floor : 1.0 - floor;
    model.degenerate = true;
    model.intercept = logit(p);
    model.fitted_profile.assign(period, p);
    model.validate();
    return model;
  }

  double best_gcv = 0.0;
  bool have_fit = false;
  for (int harmonics : harmonics_grid) {
    const Eigen::MatrixXd x = fourier_basis(period, harmonics);
    for (double penalty : penalty_grid) {
      const FitResult fit = penalized_logistic(x, successes, trials, penalty);
      if (!fit.ok) continue;
      if (!have_fit || fit.gcv < best_gcv) {
        have_fit = true;
        best_gcv = fit.gcv;
        model.harmonics = harmonics;
        model.smoothing = penalty;
        model.intercept = fit.beta(0);
        model.basis_coefficients.assign(fit.beta.data() + 1, fit.beta.data() + fit.beta.size());
      }
    }
  }
  if (!have_fit) throw std::runtime_error("fit_seasonal: no grid point converged");

  const Eigen::MatrixXd x = fourier_basis(period, model.harmonics);
  Eigen::VectorXd beta(1 + 2 * model.harmonics);
  beta(0) = model.intercept;
  for (std::size_t i = 0; i < model.basis_coefficients.size(); ++i)
    beta(static_cast<int>(i) + 1) = model.basis_coefficients[i];
  const Eigen::VectorXd eta = x * beta;
  model.fitted_profile.resize(period);
  for (int b = 0; b < period; ++b)
    model.fitted_profile[b] = std::clamp(sigmoid(eta(b)), floor, 1.0 - floor);
  model.validate();
  return model;
}

SeasonalModel fit_seasonal(const BinarySeries& train, int bins_per_day) {
  static const int harmonics[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  static const double penalties[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  return fit_seasonal(train, bins_per_day, harmonics, penalties);
}

double seasonal_predict(const SeasonalModel& m, std::size_t bin_index) {
  return m.fitted_profile[bin_index % static_cast<std::size_t>(m.period_bins)];
}

std::vector<double> seasonal_predict_series(const SeasonalModel& m, const BinarySeries& series,
                                            int bins_per_day) {
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t)
    out[t] = m.fitted_profile[bin_of_week(series, t, bins_per_day)];
  return out;
}

}  // namespace emtk
