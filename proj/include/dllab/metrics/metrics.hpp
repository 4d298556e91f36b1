#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dllab/core/rng.hpp"

namespace dllab::metrics {

/// K samples in R^d, one per row.
using Cloud = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 2 E|X-Y| - E|X-X'| - E|Y-Y'| with all-pairs (V-statistic) means.
double energy_distance(const Cloud& x, const Cloud& y);

/// Mean over `directions` random unit directions of the 1D W1 distance
/// between sorted projections. Unequal clouds are subsampled to the smaller
/// size with `rng` (which also draws the directions).
double sliced_wasserstein(const Cloud& x, const Cloud& y, int directions, Rng& rng);

/// W1 between two equal-size 1D samples via sorting.
double wasserstein1_sorted(std::vector<double> a, std::vector<double> b);

inline constexpr double kNrmseGuard = 1e-12;

/// RMSE(mean_pred, mean_true) / sqrt(mean(mean_true^2)).
double nrmse_mean(const Cloud& pred, const Cloud& truth);

/// Same on pointwise population standard deviations.
double nrmse_spread(const Cloud& pred, const Cloud& truth);

/// True when every pointwise truth variance is zero (NRMSE_s then rests on
/// the guard alone).
bool degenerate_truth_spread(const Cloud& truth);

/// Pointwise E|X - y| - 1/2 E|X - X'| (V-statistic), averaged over points.
double crps(const Cloud& ensemble, const Eigen::RowVectorXd& y);

/// spread / (rmse + eps) with spread = sqrt(mean pointwise variance) and
/// rmse of the ensemble mean against y.
double ssr(const Cloud& ensemble, const Eigen::RowVectorXd& y, double eps = 1e-8);

/// Against several truth realizations: rmse pools squared errors of the
/// ensemble mean over every realization.
double ssr_multi(const Cloud& ensemble, const Cloud& truth, double eps = 1e-8);

struct ConditionMetrics {
  double ed = 0.0;
  double swd = 0.0;
  double nrmse_m = 0.0;
  double nrmse_s = 0.0;
  double crps = 0.0;
  double ssr = 0.0;
  bool degenerate_truth = false;
};

/// All six metrics for one condition; CRPS averages over truth realizations.
ConditionMetrics evaluate_condition(const Cloud& pred, const Cloud& truth, int directions, Rng& rng);

struct MetricReport {
  std::string model;
  int directions = 128;
  std::uint64_t seed = 0;
  double ssr_eps = 1e-8;
  std::vector<ConditionMetrics> conditions;

  ConditionMetrics mean() const;
  void write_csv(std::ostream& out) const;
};

}  // namespace dllab::metrics
