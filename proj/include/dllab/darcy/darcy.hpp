#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dllab/core/rng.hpp"
#include "dllab/diff/tensor.hpp"

namespace dllab::darcy {

/// n x n nodes on [0,1]^2 including the boundary; spacing 1/(n-1).
inline double spacing(std::size_t n) { return 1.0 / static_cast<double>(n - 1); }

struct PermeabilitySpec {
  double high = 12.0;
  double low = 3.0;
  double decay = 2.0;
  /// Added to the Gaussian field before thresholding (test hook).
  double offset = 0.0;
};

/// Mean-zero GRF in a DCT-II basis with coefficient variance
/// (1 + k^2 + l^2)^-decay, thresholded at zero: positive -> high, else low.
Field sample_permeability(std::size_t n, const PermeabilitySpec& spec, Rng& rng);

struct RbfSpec {
  double sigma = 10.0;
  double length_scale = 0.2;
  double jitter = 1e-5;
};

struct SourceSpec {
  double lambda = 0.1;
  RbfSpec lognormal{10.0, 0.2, 1e-5};
  RbfSpec gaussian{10.0, 0.5, 1e-5};
};

/// Unit-variance RBF Gaussian field exp(-|x-y|^2 / (2 l^2)) on the n x n
/// node grid, sampled by circulant embedding on a periodic grid of at least
/// 4n points per axis. Throws NumericsError when the embedding has
/// significantly negative eigenvalues.
Field sample_rbf_field(std::size_t n, const RbfSpec& spec, Rng& rng);

/// f = lambda*sigma_ln*exp(G_ln) + (1-lambda)*sigma_gp*G_gp.
Field combine_source(const SourceSpec& spec, const Field& g_ln, const Field& g_gp);

Field sample_source(std::size_t n, const SourceSpec& spec, Rng& rng);

/// -div(a grad u) on interior nodes with homogeneous Dirichlet boundary,
/// five-point stencil with harmonic-mean face coefficients. A face between
/// an interior node and the boundary uses the interior node's coefficient.
class DarcyOperator {
 public:
  explicit DarcyOperator(const Field& permeability);

  std::size_t grid() const noexcept { return n_; }
  std::size_t unknowns() const noexcept { return m_ * m_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  Eigen::MatrixXd dense() const;

  /// Interior values of a full-grid field, row-major.
  std::vector<double> interior(const Field& full) const;
  Field embed(std::span<const double> interior) const;

 private:
  std::size_t n_, m_;
  double inv_h2_;
  // face_x_[i*(m+1)+j]: face between interior rows i-1 and i at column j;
  // face_y_ likewise across columns.
  std::vector<double> face_x_, face_y_;
};

struct CgConfig {
  double tolerance = 1e-6;
  std::size_t max_iterations = 5000;
};

struct CgResult {
  Field solution;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Called with (iteration, interior iterate) after every CG update.
using CgObserver = std::function<void(std::size_t, std::span<const double>)>;

CgResult solve_darcy(const Field& permeability, const Field& source, const CgConfig& cfg = {},
                     const CgObserver& observer = {});

}  // namespace dllab::darcy
