#include "dllab/spectral/ks.hpp"

namespace dllab::spectral {

namespace {

std::vector<Complex> ks_symbol(const PeriodicGrid& grid) {
  const auto k = grid.wavenumbers(false);
  std::vector<Complex> symbol(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) symbol[i] = k[i] * k[i] - k[i] * k[i] * k[i] * k[i];
  return symbol;
}

}  // namespace

KsSolver::KsSolver(const KsConfig& config)
    : config_(config),
      grid_{1, config.n, config.length},
      advection_(grid_),
      stepper_(build_etdrk_table(ks_symbol(grid_), config.substep, config.order),
               [this](std::span<const Complex> u, double, std::span<Complex> out) { advection_(u, out); }),
      transform_({config.n}) {
  if (config.substeps == 0) throw ConfigError("KS needs at least one substep per macro step");
}

void KsSolver::step(std::span<Complex> u_hat) {
  for (std::size_t s = 0; s < config_.substeps; ++s) {
    stepper_.step(u_hat, 0.0);
    check_finite(u_hat, "ks", s);
  }
}

Field KsSolver::step(const Field& u) {
  std::vector<Complex> u_hat(grid_.n);
  transform_.forward(u.data(), u_hat);
  step(std::span<Complex>(u_hat));
  Field out({grid_.n});
  transform_.inverse(u_hat, out.data());
  return out;
}

}  // namespace dllab::spectral
