#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dllab/core/rng.hpp"
#include "dllab/io/checkpoint.hpp"
#include "dllab/io/dataset.hpp"
#include "dllab/metrics/metrics.hpp"
#include "dllab/model/training.hpp"
#include "dllab/pipeline/config.hpp"
#include "dllab/rollout/rollout.hpp"

namespace dllab::pipeline {

/// Normalized supervised rows: a.row(i) -> u.row(i).
struct PairSet {
  model::FieldMatrix a;
  model::FieldMatrix u;
};

/// Pairs layout: one row per (input, realization). Trajectory layout: one row
/// per consecutive pair of states. `limit` caps realizations (or transitions)
/// per input; 0 keeps all.
PairSet make_pairs(const io::Dataset& d, std::size_t limit = 0);

struct StageResult {
  io::Checkpoint checkpoint;
  model::TrainLog log;
  double heldout_before = 0.0;
  double heldout_after = 0.0;
  /// Held-out loss of the trivial predictor (zero velocity for a DLL).
  double heldout_baseline = 0.0;
  double seconds = 0.0;
};

model::TrainConfig train_config(const RunConfig& cfg, const std::string& section, bool verbose);

StageResult train_encoder(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose = false);
/// Refuses (DigestError) when the encoder was trained on a different dataset.
StageResult train_dll(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test,
                      const io::Checkpoint& encoder, bool verbose = false);
StageResult train_fno(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose = false);

/// epoch,loss,lr,validation
void write_training_curve(const model::TrainLog& log, const std::filesystem::path& path);

/// Throws DigestError unless `ckpt` was trained on data from the generator
/// configuration and grid of `d`.
void check_dataset(const io::Checkpoint& ckpt, const io::Dataset& d);

/// K fields for one input, both in normalized units. Member k of a call is
/// reproducible from (rng, first_member + k) alone.
using EnsembleSampler =
    std::function<model::FieldMatrix(std::span<const double> a, int members, const Rng& rng, std::uint64_t first_member)>;
using PointPredictor = std::function<std::vector<double>(std::span<const double> a)>;

/// Throws DigestError if the DLL was trained on a different encoder.
EnsembleSampler make_dll_sampler(const io::Checkpoint& encoder, const io::Checkpoint& dll, int steps);
PointPredictor make_fno_predictor(const io::Checkpoint& fno);

struct EvalOptions {
  int members = 32;
  int directions = 128;
  std::uint64_t seed = 0;
  bool keep_fields = false;
};

/// Per-point mean and std of predicted and true fields for one condition.
struct FieldStats {
  Eigen::RowVectorXd pred_mean, pred_std, truth_mean, truth_std;
};

struct EvalResult {
  metrics::MetricReport report;
  std::vector<FieldStats> fields;
};

/// Metrics in physical units against every stored realization per input.
EvalResult evaluate_sampler(const std::string& name, const EnsembleSampler& sampler, const io::Dataset& test,
                            const EvalOptions& opt);
/// Deterministic predictor scored as a zero-spread ensemble of `members` copies.
EvalResult evaluate_predictor(const std::string& name, const PointPredictor& predictor, const io::Dataset& test,
                              const EvalOptions& opt);
/// Truth scored against itself.
EvalResult evaluate_self(const io::Dataset& test, const EvalOptions& opt);

double pearson(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y);
/// Mean over conditions of the correlation between predicted and true std maps.
double std_map_correlation(const EvalResult& r);

/// condition,point,pred_mean,pred_std,truth_mean,truth_std
void write_field_dump(const EvalResult& r, const std::filesystem::path& path);

struct RolloutOptions {
  int horizon = 100;
  int members = 32;
  std::uint64_t seed = 0;
  std::size_t trajectories = 0;  // 0 = all test trajectories
};

/// Truth for test trajectory i: row 0 is the input state.
metrics::Cloud trajectory_truth(const io::Dataset& test, std::size_t i);

std::vector<rollout::RolloutRecord> rollout_sampler(const EnsembleSampler& sampler, const io::Dataset& test,
                                                    const RolloutOptions& opt);
/// Single-member rollout of a deterministic predictor.
std::vector<rollout::RolloutRecord> rollout_predictor(const PointPredictor& predictor, const io::Dataset& test,
                                                      const RolloutOptions& opt);

/// Replays the truth; every step scores zero.
std::vector<rollout::RolloutRecord> rollout_perfect(const io::Dataset& test, const RolloutOptions& opt);

/// Spearman rank correlation of y against its index.
double trend_spearman(const std::vector<double>& y);

}  // namespace dllab::pipeline
