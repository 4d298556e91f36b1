#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dllab/metrics/metrics.hpp"

namespace dllab::rollout {

using metrics::Cloud;

struct RolloutConfig {
  int horizon = 100;
  int members = 32;
  bool keep_ensembles = false;
};

struct StepMetrics {
  double nrmse = 0.0;
  double crps = 0.0;
  double ssr = 0.0;
};

struct RolloutRecord {
  std::vector<StepMetrics> steps;  // steps[0] is the initial condition
  std::vector<Cloud> ensembles;    // filled when keep_ensembles is set
  bool truncated = false;
  int truncated_at = -1;  // first step whose state was non-finite

  /// Mean over steps 1..end (the initial condition is excluded).
  StepMetrics average() const;
};

/// Advances one member by one step: (state, member, step) -> next state.
/// `step` is the index of the state being produced (1-based).
using StepModel = std::function<std::vector<double>(std::span<const double>, std::size_t member, std::size_t step)>;

/// Ensemble-mean NRMSE, CRPS and SSR against one truth field.
StepMetrics step_metrics(const Cloud& ensemble, const Eigen::RowVectorXd& truth);

/// Runs `members` trajectories from truth.row(0), each fed back its own
/// prediction, for min(horizon, truth.rows() - 1) steps.
RolloutRecord closed_loop(const StepModel& model, const Cloud& truth, const RolloutConfig& cfg);

struct RolloutSummary {
  std::vector<StepMetrics> curve;  // per step, averaged over records reaching it
  std::vector<int> counts;
  StepMetrics average;             // mean over records of their time averages
  int truncated = 0;
};

RolloutSummary aggregate(const std::vector<RolloutRecord>& records);

/// step,NRMSE,CRPS,SSR,count rows.
void write_curve_csv(std::ostream& out, const std::string& model, const RolloutSummary& summary, bool header = true);

/// One row per trajectory plus a mean row.
void write_records_csv(std::ostream& out, const std::string& model, const std::vector<RolloutRecord>& records,
                       bool header = true);

}  // namespace dllab::rollout
