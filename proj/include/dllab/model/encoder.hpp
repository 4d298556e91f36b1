#pragma once

#include <span>
#include <vector>

#include "dllab/kl/kl.hpp"
#include "dllab/model/training.hpp"
#include "dllab/nn/fno.hpp"

namespace dllab::model {

struct EncoderConfig {
  int dim = 1;
  int rank = 64;
  int width = 64;
  int modes = 32;  // per-axis cap; the grid lowers it to floor(n/3)
  int layers = 4;
  int projection = 128;
  int nf_features = 64;
};

/// u ~ sum_k xi_k phi_k on flattened fields. phi: r fields of equal length.
std::vector<double> reconstruct(std::span<const double> xi, const std::vector<std::vector<double>>& phi);

/// Basis network NO(a) -> r fields and coefficient network NF(u) -> R^r.
template <class S>
class OperatorEncoder {
 public:
  using Var = typename Tape<S>::Var;

  OperatorEncoder(const EncoderConfig& cfg, const std::vector<int>& grid) : cfg_(cfg), grid_(grid) {
    if (static_cast<int>(grid.size()) != cfg.dim) throw ConfigError("encoder grid rank mismatch");
    nn::FnoConfig fc;
    fc.dim = cfg.dim;
    fc.in_channels = 1;
    fc.width = cfg.width;
    fc.modes = nn::fno_modes(cfg.modes, *std::min_element(grid.begin(), grid.end()));
    fc.layers = cfg.layers;
    fc.projection = cfg.projection;
    fc.out_channels = cfg.rank;
    no_ = nn::Fno<S>(params_, "no", fc);
    fc.out_channels = cfg.nf_features;
    nf_ = nn::Fno<S>(params_, "nf", fc);
    nf_head_ = nn::Dense<S>(params_, "nf.head", cfg.nf_features, cfg.rank);
  }

  const EncoderConfig& config() const noexcept { return cfg_; }
  const std::vector<int>& grid() const noexcept { return grid_; }
  ParameterSet<S>& params() noexcept { return params_; }
  const ParameterSet<S>& params() const noexcept { return params_; }
  int rank() const noexcept { return cfg_.rank; }

  void init(Rng& rng) {
    no_.init(rng);
    nf_.init(rng);
    nf_head_.init(rng);
  }

  /// (batch * P) x 1 input fields -> (batch * P) x r basis.
  Var basis(Tape<S>& tape, Var a, int batch, const std::vector<int>& grid) const { return no_(tape, a, batch, grid); }

  /// (batch * P) x 1 target fields -> batch x r coefficients.
  Var coefficients(Tape<S>& tape, Var u, int batch, const std::vector<int>& grid) const {
    return nf_head_(tape, tape.mean_pool(nf_(tape, u, batch, grid), batch));
  }

  /// Mean over the batch of the quadrature norm (1/P) * sum (u - xi.phi)^2.
  Var loss(Tape<S>& tape, const Matrix<S>& a, const Matrix<S>& u, int batch, const std::vector<int>& grid) const {
    const Var phi = basis(tape, tape.constant(a), batch, grid);
    const Var xi = coefficients(tape, tape.constant(u), batch, grid);
    const Var rec = tape.combine(xi, phi, batch);
    return tape.squared_error(rec, u, static_cast<S>(1.0 / static_cast<double>(u.rows())));
  }

  /// Per-sample evaluation in double: basis (r fields) for one input.
  std::vector<std::vector<double>> basis_fields(std::span<const double> a, const std::vector<int>& grid) const {
    Tape<S> tape;
    Matrix<S> x = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())).cast<S>();
    const auto& phi = tape.value(basis(tape, tape.constant(std::move(x)), 1, grid));
    std::vector<std::vector<double>> out(static_cast<std::size_t>(phi.cols()), std::vector<double>(a.size()));
    for (Eigen::Index k = 0; k < phi.cols(); ++k) {
      for (Eigen::Index p = 0; p < phi.rows(); ++p) out[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] = static_cast<double>(phi(p, k));
    }
    return out;
  }

  /// P x r basis matrix for one input.
  Eigen::MatrixXd basis_matrix(std::span<const double> a, const std::vector<int>& grid) const {
    Tape<S> tape;
    Matrix<S> x = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())).cast<S>();
    return tape.value(basis(tape, tape.constant(std::move(x)), 1, grid)).template cast<double>();
  }

  /// Coefficients for a set of fields (rows of `u`), batched.
  FieldMatrix encode(const FieldMatrix& u, const std::vector<int>& grid, int batch = 64) const {
    FieldMatrix out(u.rows(), cfg_.rank);
    for (Eigen::Index lo = 0; lo < u.rows(); lo += batch) {
      const Eigen::Index hi = std::min<Eigen::Index>(u.rows(), lo + batch);
      std::vector<std::size_t> idx;
      for (Eigen::Index i = lo; i < hi; ++i) idx.push_back(static_cast<std::size_t>(i));
      Tape<S> tape;
      const auto& xi = tape.value(coefficients(tape, tape.constant(gather_fields<S>(u, idx)), static_cast<int>(idx.size()), grid));
      out.middleRows(lo, hi - lo) = xi.template cast<double>();
    }
    return out;
  }

  /// Evaluation loss over rows of (a, u); with `gram_projection` the NF
  /// output is replaced by the Gram-optimal coefficients for NO(a).
  double evaluate(const FieldMatrix& a, const FieldMatrix& u, const std::vector<int>& grid,
                  bool gram_projection = false) const {
    double total = 0.0;
    const auto p = u.cols();
    const double w = 1.0 / static_cast<double>(p);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      Tape<S> tape;
      const std::vector<std::size_t> idx{static_cast<std::size_t>(i)};
      const Matrix<S> ai = gather_fields<S>(a, idx);
      const Matrix<S> ui = gather_fields<S>(u, idx);
      const Eigen::MatrixXd phi = tape.value(basis(tape, tape.constant(ai), 1, grid)).template cast<double>();
      const Eigen::VectorXd target = ui.template cast<double>();
      Eigen::VectorXd xi;
      if (gram_projection) {
        xi = kl::projection_coefficients(target, phi, w);
      } else {
        xi = tape.value(coefficients(tape, tape.constant(ui), 1, grid)).template cast<double>().transpose();
      }
      const Eigen::VectorXd res = target - phi * xi;
      total += w * res.squaredNorm();
    }
    return total / static_cast<double>(u.rows());
  }

 private:
  EncoderConfig cfg_;
  std::vector<int> grid_;
  ParameterSet<S> params_;
  nn::Fno<S> no_, nf_;
  nn::Dense<S> nf_head_;
};

}  // namespace dllab::model
