#include "dllab/spectral/kolmogorov.hpp"

#include <cmath>

#include "dllab/spectral/advection.hpp"

namespace dllab::spectral {

namespace {

struct Wavenumbers2D {
  std::vector<double> kx, ky, k2;
};

Wavenumbers2D wavenumbers_2d(const PeriodicGrid& grid, bool odd) {
  const auto k = grid.wavenumbers(odd);
  const std::size_t n = grid.n;
  Wavenumbers2D w;
  w.kx.resize(n * n);
  w.ky.resize(n * n);
  w.k2.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      w.kx[i * n + j] = k[i];
      w.ky[i * n + j] = k[j];
      w.k2[i * n + j] = k[i] * k[i] + k[j] * k[j];
    }
  }
  return w;
}

std::vector<Complex> damped_heat_symbol(const PeriodicGrid& grid, double nu, double drag) {
  const auto w = wavenumbers_2d(grid, false);
  std::vector<Complex> symbol(w.k2.size());
  for (std::size_t i = 0; i < symbol.size(); ++i) symbol[i] = -nu * w.k2[i] - drag;
  return symbol;
}

PeriodicGrid square_grid(std::size_t n) { return PeriodicGrid{2, n, 2.0 * std::numbers::pi}; }

}  // namespace

VelocityField velocity_from_vorticity(const Field& omega) {
  if (omega.rank() != 2 || omega.dim(0) != omega.dim(1)) throw UsageError("vorticity must be a square 2D field");
  const PeriodicGrid grid = square_grid(omega.dim(0));
  const std::size_t n = grid.n;
  const auto even = wavenumbers_2d(grid, false);
  const auto odd = wavenumbers_2d(grid, true);
  diff::GridTransform transform(grid.shape());
  std::vector<Complex> w_hat(n * n), psi(n * n), u(n * n), v(n * n);
  transform.forward(omega.data(), w_hat);
  for (std::size_t i = 0; i < n * n; ++i) {
    psi[i] = even.k2[i] > 0.0 ? -w_hat[i] / even.k2[i] : Complex{};
    u[i] = Complex(0.0, -odd.ky[i]) * psi[i];
    v[i] = Complex(0.0, odd.kx[i]) * psi[i];
  }
  VelocityField out{Field(grid.shape()), Field(grid.shape()), Field(grid.shape())};
  transform.inverse(psi, out.psi.data());
  transform.inverse(u, out.u.data());
  transform.inverse(v, out.v.data());
  return out;
}

KolmogorovSolver::KolmogorovSolver(const KolmogorovConfig& config)
    : config_(config),
      grid_(square_grid(config.n)),
      transform_(grid_.shape()),
      mask_(grid_.dealias_mask()),
      forcing_hat_(grid_.points()),
      ux_(grid_.points()),
      uy_(grid_.points()),
      wx_(grid_.points()),
      wy_(grid_.points()),
      stepper_(build_etdrk_table(damped_heat_symbol(grid_, config.nu, config.drag), config.substep, 2),
               [this](std::span<const Complex> w, double, std::span<Complex> out) { nonlinear(w, out); }) {
  if (config.substeps == 0) throw ConfigError("Kolmogorov needs at least one substep per macro step");
  auto odd = wavenumbers_2d(grid_, true);
  auto even = wavenumbers_2d(grid_, false);
  kx_ = std::move(odd.kx);
  ky_ = std::move(odd.ky);
  inv_k2_.resize(even.k2.size());
  for (std::size_t i = 0; i < inv_k2_.size(); ++i) inv_k2_[i] = even.k2[i] > 0.0 ? 1.0 / even.k2[i] : 0.0;
  const std::size_t n = grid_.n;
  Field forcing(grid_.shape());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      forcing(i, j) = config.forcing_amplitude * std::sin(config.forcing_wavenumber * grid_.coordinate(j));
    }
  }
  transform_.forward(forcing.data(), forcing_hat_);
}

void KolmogorovSolver::nonlinear(std::span<const Complex> w, std::span<Complex> out) const {
  const std::size_t m = w.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Complex psi = -w[i] * inv_k2_[i];
    ux_[i] = Complex(0.0, -ky_[i]) * psi;
    uy_[i] = Complex(0.0, kx_[i]) * psi;
    wx_[i] = Complex(0.0, kx_[i]) * w[i];
    wy_[i] = Complex(0.0, ky_[i]) * w[i];
  }
  transform_.inverse(ux_);
  transform_.inverse(uy_);
  transform_.inverse(wx_);
  transform_.inverse(wy_);
  for (std::size_t i = 0; i < m; ++i) {
    ux_[i] = Complex(ux_[i].real() * wx_[i].real() + uy_[i].real() * wy_[i].real(), 0.0);
  }
  transform_.forward(ux_);
  for (std::size_t i = 0; i < m; ++i) out[i] = forcing_hat_[i] - mask_[i] * ux_[i];
}

void KolmogorovSolver::step(std::span<Complex> omega_hat) {
  for (std::size_t s = 0; s < config_.substeps; ++s) {
    stepper_.step(omega_hat, 0.0);
    check_finite(omega_hat, "kolmogorov", s);
  }
}

Field KolmogorovSolver::step(const Field& omega) {
  std::vector<Complex> w_hat(grid_.points());
  transform_.forward(omega.data(), w_hat);
  step(std::span<Complex>(w_hat));
  Field out(grid_.shape());
  transform_.inverse(w_hat, out.data());
  return out;
}

}  // namespace dllab::spectral
