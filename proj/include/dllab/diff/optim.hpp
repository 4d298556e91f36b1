#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "dllab/core/error.hpp"
#include "dllab/diff/tape.hpp"

namespace dllab::diff {

/// Cosine annealing from base_lr at step 0 to zero at step == horizon.
inline double cosine_lr(double base_lr, std::int64_t step, std::int64_t horizon) {
  if (horizon <= 0) return base_lr;
  const double progress = std::min(1.0, static_cast<double>(step) / static_cast<double>(horizon));
  const double lr = 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * progress));
  return progress >= 1.0 ? 0.0 : lr;
}

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <class S>
double clip_grad_norm(ParameterSet<S>& params, double max_norm) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    sq += static_cast<double>(params[i].grad.template cast<double>().squaredNorm());
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const S scale = static_cast<S>(max_norm / norm);
    for (std::size_t i = 0; i < params.size(); ++i) params[i].grad *= scale;
  }
  return norm;
}

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  double base_lr = 1e-3;
  std::int64_t horizon = 0;
};

/// Decoupled-weight-decay Adam. First/second moments are held per parameter.
template <class S>
class AdamW {
 public:
  AdamW(ParameterSet<S>& params, AdamWConfig config) : params_(params), config_(config) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Matrix<S>::Zero(params[i].value.rows(), params[i].value.cols()));
      v_.push_back(Matrix<S>::Zero(params[i].value.rows(), params[i].value.cols()));
    }
  }

  std::int64_t step_count() const noexcept { return step_; }
  const AdamWConfig& config() const noexcept { return config_; }

  /// One update at learning rate lr_now. Gradients must already be clipped.
  void step(double lr_now) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!params_[i].grad.allFinite()) {
        throw NumericsError("non-finite gradient in parameter '" + params_[i].name + "'");
      }
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const S b1 = static_cast<S>(config_.beta1);
    const S b2 = static_cast<S>(config_.beta2);
    const S decay = static_cast<S>(1.0 - lr_now * config_.weight_decay);
    const S step_size = static_cast<S>(lr_now / bc1);
    const S inv_bc2_sqrt = static_cast<S>(1.0 / std::sqrt(bc2));
    const S eps = static_cast<S>(config_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      m_[i] = b1 * m_[i] + (S(1) - b1) * p.grad;
      v_[i] = b2 * v_[i] + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
      p.value *= decay;
      p.value.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() * inv_bc2_sqrt + eps);
    }
  }

 private:
  ParameterSet<S>& params_;
  AdamWConfig config_;
  std::vector<Matrix<S>> m_;
  std::vector<Matrix<S>> v_;
  std::int64_t step_ = 0;
};

/// Exponential moving average of parameters: shadow <- d*shadow + (1-d)*param.
template <class S>
class Ema {
 public:
  Ema(const ParameterSet<S>& params, double decay) : decay_(decay) {
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("EMA decay must lie in (0, 1)");
    for (std::size_t i = 0; i < params.size(); ++i) shadow_.push_back(params[i].value);
  }

  double decay() const noexcept { return decay_; }
  const std::vector<Matrix<S>>& shadow() const noexcept { return shadow_; }
  std::vector<Matrix<S>>& shadow() noexcept { return shadow_; }

  void update(const ParameterSet<S>& params) { update(params, decay_); }

  /// Update with a one-off decay (e.g. a warmup ramp capped at decay()).
  void update(const ParameterSet<S>& params, double decay) {
    if (params.size() != shadow_.size()) throw UsageError("EMA parameter count mismatch");
    const S d = static_cast<S>(decay);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i].value.rows() != shadow_[i].rows() || params[i].value.cols() != shadow_[i].cols()) {
        throw UsageError("EMA shape mismatch for '" + params[i].name + "'");
      }
      shadow_[i] = d * shadow_[i] + (S(1) - d) * params[i].value;
    }
  }

  /// Overwrites the live parameters with the shadow values.
  void copy_to(ParameterSet<S>& params) const {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = shadow_[i];
  }

 private:
  double decay_;
  std::vector<Matrix<S>> shadow_;
};

}  // namespace dllab::diff
