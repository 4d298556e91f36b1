#include "dllab/spectral/burgers.hpp"

#include <cmath>

namespace dllab::spectral {

namespace {

std::vector<Complex> heat_symbol(const PeriodicGrid& grid, double nu) {
  const auto k = grid.wavenumbers(false);
  std::vector<Complex> symbol(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) symbol[i] = -nu * k[i] * k[i];
  return symbol;
}

std::size_t substep_count(double macro_dt, double h) {
  const double ratio = macro_dt / h;
  const auto count = static_cast<std::size_t>(std::llround(ratio));
  if (count == 0 || std::abs(ratio - static_cast<double>(count)) > 1e-9 * ratio) {
    throw ConfigError("macro step must be a whole number of substeps");
  }
  return count;
}

}  // namespace

BurgersSolver::BurgersSolver(const BurgersConfig& config)
    : config_(config),
      grid_{1, config.n, 2.0 * std::numbers::pi},
      substeps_(substep_count(config.macro_dt, config.substep)),
      advection_(grid_),
      stepper_(build_etdrk_table(heat_symbol(grid_, config.nu), config.substep, 4),
               [this](std::span<const Complex> u, double, std::span<Complex> out) { advection_(u, out); }),
      transform_({config.n}) {
  if (config.n < 8) throw ConfigError("Burgers grid needs at least 8 points");
  for (double w : config.noise.weights) {
    if (w < 0.0) throw ConfigError("noise weights must be nonnegative");
  }
  if (config.noise.sigma < 0.0) throw ConfigError("noise amplitude must be nonnegative");
}

void BurgersSolver::substep(std::span<Complex> u_hat, std::span<const double, 3> dW) {
  stepper_.step(u_hat, 0.0);
  const std::size_t n = grid_.n;
  const double half_n = 0.5 * static_cast<double>(n);
  for (std::size_t j = 1; j <= 3; ++j) {
    const double inc = config_.noise.amplitude(j - 1) * dW[j - 1] * half_n;
    if (inc == 0.0) continue;
    u_hat[j] += inc;
    u_hat[n - j] += inc;
  }
}

Field BurgersSolver::substep(const Field& u, std::span<const double, 3> dW) {
  std::vector<Complex> u_hat(grid_.n);
  transform_.forward(u.data(), u_hat);
  substep(std::span<Complex>(u_hat), dW);
  check_finite(u_hat, "burgers", 0);
  Field out({grid_.n});
  transform_.inverse(u_hat, out.data());
  return out;
}

Field BurgersSolver::step(const Field& u, Rng& noise) {
  std::vector<Complex> u_hat(grid_.n);
  transform_.forward(u.data(), u_hat);
  const double sqrt_h = std::sqrt(config_.substep);
  const bool stochastic = config_.noise.sigma != 0.0;
  std::array<double, 3> dW{};
  for (std::size_t s = 0; s < substeps_; ++s) {
    if (stochastic) {
      for (auto& w : dW) w = sqrt_h * noise.normal();
    }
    substep(std::span<Complex>(u_hat), dW);
    check_finite(u_hat, "burgers", s);
  }
  Field out({grid_.n});
  transform_.inverse(u_hat, out.data());
  return out;
}

}  // namespace dllab::spectral
