#include "dllab/spectral/advection.hpp"

#include <cmath>
#include <string>

namespace dllab::spectral {

ConservativeAdvection1D::ConservativeAdvection1D(const PeriodicGrid& grid)
    : transform_({grid.n}), k_(grid.wavenumbers(true)), mask_(grid.dealias_mask()), work_(grid.n) {
  if (grid.dim != 1) throw ConfigError("1D advection needs a 1D grid");
}

void ConservativeAdvection1D::operator()(std::span<const Complex> u_hat, std::span<Complex> out) const {
  std::copy(u_hat.begin(), u_hat.end(), work_.begin());
  transform_.inverse(work_);
  for (auto& w : work_) w = Complex(w.real() * w.real(), 0.0);
  transform_.forward(work_);
  for (std::size_t i = 0; i < work_.size(); ++i) {
    out[i] = mask_[i] * Complex(0.0, -0.5 * k_[i]) * work_[i];
  }
}

void check_finite(std::span<const Complex> u_hat, const char* what, std::size_t substep) {
  for (const auto& c : u_hat) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw NumericsError(std::string(what) + ": non-finite state at substep " + std::to_string(substep));
    }
  }
}

}  // namespace dllab::spectral
