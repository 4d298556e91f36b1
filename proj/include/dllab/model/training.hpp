#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dllab/core/rng.hpp"
#include "dllab/diff/optim.hpp"
#include "dllab/diff/tape.hpp"

namespace dllab::model {

using diff::Matrix;
using diff::ParameterSet;
using diff::Tape;

/// Row-major double storage for flattened fields, one field per row.
using FieldMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Stacks rows `idx` of `m` into a (|idx| * P) x 1 point-major column.
template <class S>
Matrix<S> gather_fields(const FieldMatrix& m, const std::vector<std::size_t>& idx) {
  const auto p = m.cols();
  Matrix<S> out(static_cast<Eigen::Index>(idx.size()) * p, 1);
  for (std::size_t b = 0; b < idx.size(); ++b) {
    out.middleRows(static_cast<Eigen::Index>(b) * p, p) =
        m.row(static_cast<Eigen::Index>(idx[b])).transpose().template cast<S>();
  }
  return out;
}

template <class S>
Matrix<S> gather_rows(const FieldMatrix& m, const std::vector<std::size_t>& idx) {
  Matrix<S> out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t b = 0; b < idx.size(); ++b) out.row(static_cast<Eigen::Index>(b)) = m.row(static_cast<Eigen::Index>(idx[b])).template cast<S>();
  return out;
}

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double clip = 1.0;
  double ema_decay = 0.999;
  /// Ramp the EMA decay as min(decay, (1+t)/(10+t)) so short runs are not
  /// dominated by the initialization.
  bool ema_warmup = true;
  /// With a validation callback: stop after this many epochs without a new
  /// best validation loss (0 runs every epoch).
  int patience = 0;
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> lr;
  std::vector<double> validation;  // EMA weights, one entry per epoch when validating
  int best_epoch = -1;             // 0-based
  std::int64_t steps = 0;
};

/// Swaps live parameters with a stored set (e.g. EMA shadow) and back.
template <class S>
void swap_values(ParameterSet<S>& params, std::vector<Matrix<S>>& other) {
  if (other.size() != params.size()) throw UsageError("parameter set size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) std::swap(params[i].value, other[i]);
}

template <class S>
struct TrainResult {
  TrainLog log;
  std::vector<Matrix<S>> ema;
};

/// Minibatch AdamW with cosine annealing, global-norm clipping and EMA.
/// `batch_loss(tape, indices, noise_rng)` records a scalar loss. When
/// `validate` is given it is evaluated on the EMA weights after every epoch
/// and the returned EMA is the best-scoring snapshot.
template <class S, class BatchLoss>
TrainResult<S> fit(ParameterSet<S>& params, std::size_t n, const TrainConfig& cfg, BatchLoss&& batch_loss,
                   const std::string& label = "train", const std::function<double()>& validate = {}) {
  if (n == 0) throw UsageError("training set is empty");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw ConfigError("epochs must be >= 0 and batch size >= 1");
  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  const std::size_t batches = (n + bs - 1) / bs;
  diff::AdamWConfig acfg;
  acfg.base_lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  acfg.horizon = static_cast<std::int64_t>(batches) * cfg.epochs;
  diff::AdamW<S> opt(params, acfg);
  diff::Ema<S> ema(params, cfg.ema_decay);
  TrainResult<S> result;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle(cfg.seed, Stream::data, 0x5eed);
  Rng noise(cfg.seed, Stream::noise, 0x7a1);
  std::int64_t step = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix<S>> best_ema;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    double total = 0.0;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const std::size_t lo = bi * bs, hi = std::min(n, lo + bs);
      std::vector<std::size_t> idx(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi));
      Tape<S> tape;
      params.zero_grad();
      const auto loss = batch_loss(tape, idx, noise);
      const double value = static_cast<double>(tape.value(loss)(0, 0));
      if (!std::isfinite(value) || value > 1e6) {
        throw NumericsError(label + ": loss diverged (" + std::to_string(value) + ") at epoch " +
                            std::to_string(epoch) + ", batch " + std::to_string(bi));
      }
      tape.backward(loss);
      diff::clip_grad_norm(params, cfg.clip);
      const double lr = diff::cosine_lr(cfg.lr, step, acfg.horizon);
      opt.step(lr);
      ++step;
      const double d = cfg.ema_warmup ? std::min(cfg.ema_decay, (1.0 + step) / (10.0 + step)) : cfg.ema_decay;
      ema.update(params, d);
      total += value * static_cast<double>(idx.size());
    }
    result.log.epoch_loss.push_back(total / static_cast<double>(n));
    result.log.lr.push_back(diff::cosine_lr(cfg.lr, step, acfg.horizon));
    bool stop = false;
    if (validate) {
      auto shadow = ema.shadow();
      swap_values(params, shadow);
      const double v = validate();
      swap_values(params, shadow);
      result.log.validation.push_back(v);
      if (std::isfinite(v) && (result.log.best_epoch < 0 || v < best)) {
        best = v;
        result.log.best_epoch = epoch;
        best_ema = ema.shadow();
      }
      stop = cfg.patience > 0 && epoch - result.log.best_epoch >= cfg.patience;
    }
    if (cfg.verbose) {
      std::fprintf(stderr, "[%s] epoch %d/%d loss %.6g", label.c_str(), epoch + 1, cfg.epochs,
                   result.log.epoch_loss.back());
      if (validate) std::fprintf(stderr, " validation %.6g", result.log.validation.back());
      std::fprintf(stderr, "\n");
    }
    if (stop) break;
  }
  result.log.steps = step;
  result.ema = validate && result.log.best_epoch >= 0 ? best_ema : ema.shadow();
  return result;
}

}  // namespace dllab::model
