#pragma once

#include <span>

#include "dllab/diff/tensor.hpp"
#include "dllab/spectral/advection.hpp"
#include "dllab/spectral/etdrk.hpp"

namespace dllab::spectral {

struct KsConfig {
  std::size_t n = 256;
  double length = 60.0;
  double substep = 0.01;
  std::size_t substeps = 100;
  int order = 2;
};

/// Kuramoto-Sivashinsky u_t + u u_x + u_xx + u_xxxx = 0 on a periodic domain.
class KsSolver {
 public:
  KsSolver(const KsSolver&) = delete;
  KsSolver& operator=(const KsSolver&) = delete;
  explicit KsSolver(const KsConfig& config);

  const KsConfig& config() const noexcept { return config_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }

  /// One macro step of `substeps` ETDRK substeps, in spectral space.
  void step(std::span<Complex> u_hat);
  Field step(const Field& u);

  void nonlinear(std::span<const Complex> u_hat, std::span<Complex> out) const { advection_(u_hat, out); }

 private:
  KsConfig config_;
  PeriodicGrid grid_;
  ConservativeAdvection1D advection_;
  EtdrkStepper stepper_;
  diff::GridTransform transform_;
};

}  // namespace dllab::spectral
