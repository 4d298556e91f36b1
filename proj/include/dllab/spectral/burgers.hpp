#pragma once

#include <array>
#include <span>

#include "dllab/core/rng.hpp"
#include "dllab/diff/tensor.hpp"
#include "dllab/spectral/advection.hpp"
#include "dllab/spectral/etdrk.hpp"

namespace dllab::spectral {

/// Additive forcing sum_j sigma*w_j cos(j x) dW_j on modes j = 1, 2, 3.
struct SdeNoiseSpec {
  double sigma = 1.0;
  std::array<double, 3> weights{1.0, 0.5, 0.1};

  double amplitude(std::size_t j) const { return sigma * weights.at(j); }
};

struct BurgersConfig {
  std::size_t n = 256;
  double nu = 0.1;
  double macro_dt = 1.0;
  double substep = 1e-4;
  SdeNoiseSpec noise;
};

/// Stochastic viscous Burgers on (0, 2pi): ETDRK4 drift followed by an
/// Euler-Maruyama noise increment each substep.
class BurgersSolver {
 public:
  BurgersSolver(const BurgersSolver&) = delete;
  BurgersSolver& operator=(const BurgersSolver&) = delete;
  explicit BurgersSolver(const BurgersConfig& config);

  const BurgersConfig& config() const noexcept { return config_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t substeps_per_macro() const noexcept { return substeps_; }

  /// One substep in spectral space. dW holds the three Brownian increments
  /// (already scaled by sqrt(h)).
  void substep(std::span<Complex> u_hat, std::span<const double, 3> dW);

  /// One substep on a physical field.
  Field substep(const Field& u, std::span<const double, 3> dW);

  /// One macro step; draws its increments from `noise`.
  Field step(const Field& u, Rng& noise);

  void nonlinear(std::span<const Complex> u_hat, std::span<Complex> out) const { advection_(u_hat, out); }

 private:
  BurgersConfig config_;
  PeriodicGrid grid_;
  std::size_t substeps_;
  ConservativeAdvection1D advection_;
  EtdrkStepper stepper_;
  diff::GridTransform transform_;
};

}  // namespace dllab::spectral
