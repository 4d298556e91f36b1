#pragma once

#include <vector>

#include "dllab/model/encoder.hpp"
#include "dllab/model/flow.hpp"
#include "dllab/model/training.hpp"
#include "dllab/nn/fno.hpp"

namespace dllab::model {

struct DllConfig {
  int dim = 1;
  int rank = 64;
  int cond_width = 64;
  int cond_modes = 32;
  int cond_layers = 4;
  int cond_projection = 128;
  int cond_features = 64;
  int cond_dim = 64;
  int hidden = 512;
  int hidden_layers = 3;
  int time_dim = 32;
  int draws = 8;  // noise draws per conditioning input in a training batch
};

/// Conditional velocity network in coefficient space:
/// v(x_tau, tau, c) = MLP([x_tau, emb(tau), c]) with c an affine map of the
/// pooled features of a fresh FNO applied to the input field.
template <class S>
class DllHead {
 public:
  using Var = typename Tape<S>::Var;

  DllHead(const DllConfig& cfg, const std::vector<int>& grid) : cfg_(cfg), grid_(grid) {
    nn::FnoConfig fc;
    fc.dim = cfg.dim;
    fc.width = cfg.cond_width;
    fc.modes = nn::fno_modes(cfg.cond_modes, *std::min_element(grid.begin(), grid.end()));
    fc.layers = cfg.cond_layers;
    fc.projection = cfg.cond_projection;
    fc.out_channels = cfg.cond_features;
    cond_fno_ = nn::Fno<S>(params_, "cond", fc);
    cond_head_ = nn::Dense<S>(params_, "cond.head", cfg.cond_features, cfg.cond_dim);
    velocity_ = nn::Mlp<S>(params_, "velocity", cfg.rank + cfg.time_dim + cfg.cond_dim,
                           std::vector<int>(static_cast<std::size_t>(cfg.hidden_layers), cfg.hidden), cfg.rank);
  }

  const DllConfig& config() const noexcept { return cfg_; }
  const std::vector<int>& grid() const noexcept { return grid_; }
  ParameterSet<S>& params() noexcept { return params_; }
  const ParameterSet<S>& params() const noexcept { return params_; }

  void init(Rng& rng) {
    cond_fno_.init(rng);
    cond_head_.init(rng);
    velocity_.init(rng);
  }

  /// (batch * P) x 1 -> batch x cond_dim.
  Var condition(Tape<S>& tape, Var a, int batch, const std::vector<int>& grid) const {
    return cond_head_(tape, tape.mean_pool(cond_fno_(tape, a, batch, grid), batch));
  }

  Var velocity(Tape<S>& tape, Var x_tau, const std::vector<double>& tau, Var cond) const {
    const Var emb = tape.constant(nn::time_embedding<S>(tau, cfg_.time_dim));
    return velocity_(tape, tape.concat(tape.concat(x_tau, emb), cond));
  }

  /// Velocity-matching loss for a batch of inputs with standardized latents z
  /// (batch x r): `draws` (tau, eps) pairs per input.
  Var loss(Tape<S>& tape, const Matrix<S>& a, const Eigen::MatrixXd& z, int batch, Rng& rng,
           const std::vector<int>& grid) const {
    const NoisingBatch nb = draw_noising(z, cfg_.draws, rng);
    const Var cond = tape.repeat_rows(condition(tape, tape.constant(a), batch, grid), cfg_.draws);
    const Var v = velocity(tape, tape.constant(nb.x_tau.cast<S>()), nb.tau, cond);
    return tape.squared_error(v, nb.target.cast<S>(), static_cast<S>(1.0 / static_cast<double>(nb.x_tau.rows())));
  }

  /// Conditioning vector for one input field.
  Eigen::RowVectorXd condition_vector(std::span<const double> a, const std::vector<int>& grid) const {
    Tape<S> tape;
    Matrix<S> x = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())).cast<S>();
    return tape.value(condition(tape, tape.constant(std::move(x)), 1, grid)).row(0).template cast<double>();
  }

  /// Velocity for K states sharing one conditioning vector.
  Eigen::MatrixXd velocity_batch(const Eigen::MatrixXd& x, double tau, const Eigen::RowVectorXd& cond) const {
    Tape<S> tape;
    Matrix<S> c = cond.replicate(x.rows(), 1).cast<S>();
    const Var v = velocity(tape, tape.constant(x.cast<S>()), std::vector<double>(static_cast<std::size_t>(x.rows()), tau),
                           tape.constant(std::move(c)));
    return tape.value(v).template cast<double>();
  }

 private:
  DllConfig cfg_;
  std::vector<int> grid_;
  ParameterSet<S> params_;
  nn::Fno<S> cond_fno_;
  nn::Dense<S> cond_head_;
  nn::Mlp<S> velocity_;
};

/// Per-coordinate affine standardization of encoder coefficients, fitted on
/// the training latents; the flow runs on z = (xi - mean) / scale.
struct LatentScaling {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static LatentScaling fit(const FieldMatrix& xi) {
    LatentScaling s;
    s.mean = xi.colwise().mean();
    const Eigen::RowVectorXd var =
        (xi.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(std::max<Eigen::Index>(1, xi.rows()));
    s.scale = var.array().sqrt().max(1e-8);
    return s;
  }
  static LatentScaling identity(int r) {
    return {Eigen::RowVectorXd::Zero(r), Eigen::RowVectorXd::Ones(r)};
  }
  Eigen::MatrixXd standardize(const FieldMatrix& xi) const {
    return ((xi.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  }
  Eigen::MatrixXd restore(const Eigen::MatrixXd& z) const {
    return ((z.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
  }
};

/// K decoded output fields (rows) for one input. Member k starts from its own
/// substream of `rng`, so the ensemble does not depend on K or member order.
template <class S>
FieldMatrix sample_fields(const OperatorEncoder<S>& encoder, const DllHead<S>& head, const LatentScaling& scaling,
                          std::span<const double> a, const std::vector<int>& grid, int members, int steps,
                          const Rng& rng, std::uint64_t first_member = 0) {
  if (members < 1) throw ConfigError("ensemble size must be >= 1");
  const int r = head.config().rank;
  Eigen::MatrixXd x1(members, r);
  for (int k = 0; k < members; ++k) {
    Rng member = rng.substream(first_member + static_cast<std::uint64_t>(k));
    for (int j = 0; j < r; ++j) x1(k, j) = member.normal();
  }
  const Eigen::RowVectorXd cond = head.condition_vector(a, grid);
  const Eigen::MatrixXd z0 =
      euler_sample(std::move(x1), steps, [&](const Eigen::MatrixXd& x, double tau) { return head.velocity_batch(x, tau, cond); });
  const Eigen::MatrixXd phi = encoder.basis_matrix(a, grid);
  return scaling.restore(z0) * phi.transpose();
}

/// Deterministic FNO baseline a -> u trained on mean squared error.
template <class S>
class FnoBaseline {
 public:
  using Var = typename Tape<S>::Var;

  FnoBaseline(const nn::FnoConfig& cfg, const std::vector<int>& grid) : grid_(grid) {
    nn::FnoConfig fc = cfg;
    fc.modes = nn::fno_modes(cfg.modes, *std::min_element(grid.begin(), grid.end()));
    fc.in_channels = 1;
    fc.out_channels = 1;
    fno_ = nn::Fno<S>(params_, "fno", fc);
  }

  ParameterSet<S>& params() noexcept { return params_; }
  const ParameterSet<S>& params() const noexcept { return params_; }
  const nn::FnoConfig& config() const noexcept { return fno_.config(); }
  const std::vector<int>& grid() const noexcept { return grid_; }

  void init(Rng& rng) { fno_.init(rng); }

  Var forward(Tape<S>& tape, Var a, int batch, const std::vector<int>& grid) const { return fno_(tape, a, batch, grid); }

  Var loss(Tape<S>& tape, const Matrix<S>& a, const Matrix<S>& u, int batch, const std::vector<int>& grid) const {
    return tape.squared_error(forward(tape, tape.constant(a), batch, grid), u,
                              static_cast<S>(1.0 / static_cast<double>(u.rows())));
  }

  std::vector<double> predict(std::span<const double> a, const std::vector<int>& grid) const {
    Tape<S> tape;
    Matrix<S> x = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())).cast<S>();
    const auto& y = tape.value(forward(tape, tape.constant(std::move(x)), 1, grid));
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(y(static_cast<Eigen::Index>(i), 0));
    return out;
  }

 private:
  std::vector<int> grid_;
  ParameterSet<S> params_;
  nn::Fno<S> fno_;
};

}  // namespace dllab::model
