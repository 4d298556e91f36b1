#pragma once

#include <span>
#include <vector>

#include "dllab/diff/tensor.hpp"
#include "dllab/spectral/etdrk.hpp"

namespace dllab::spectral {

struct KolmogorovConfig {
  std::size_t n = 128;
  double nu = 1e-2;
  double drag = 0.1;
  int forcing_wavenumber = 4;
  double forcing_amplitude = 1.0;
  double substep = 0.01;
  std::size_t substeps = 25;
};

/// Stream function and velocity recovered from vorticity on (0, 2pi)^2.
struct VelocityField {
  Field psi, u, v;
};

/// Solves lap(psi) = omega spectrally (mean of psi set to zero) and returns
/// u = -psi_y, v = psi_x. Axis 0 is x, axis 1 is y.
VelocityField velocity_from_vorticity(const Field& omega);

/// Forced, damped 2D vorticity equation
///   omega_t + u.grad(omega) = nu lap(omega) - drag omega + A sin(k_f y)
/// advanced with ETDRK2 and 2/3 de-aliasing of the advection product.
class KolmogorovSolver {
 public:
  KolmogorovSolver(const KolmogorovSolver&) = delete;
  KolmogorovSolver& operator=(const KolmogorovSolver&) = delete;
  explicit KolmogorovSolver(const KolmogorovConfig& config);

  const KolmogorovConfig& config() const noexcept { return config_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }

  void step(std::span<Complex> omega_hat);
  Field step(const Field& omega);

  /// Advection plus forcing, in spectral space.
  void nonlinear(std::span<const Complex> omega_hat, std::span<Complex> out) const;

 private:
  KolmogorovConfig config_;
  PeriodicGrid grid_;
  diff::GridTransform transform_;
  std::vector<double> kx_, ky_, inv_k2_, mask_;
  std::vector<Complex> forcing_hat_;
  mutable std::vector<Complex> ux_, uy_, wx_, wy_;
  EtdrkStepper stepper_;
};

}  // namespace dllab::spectral
