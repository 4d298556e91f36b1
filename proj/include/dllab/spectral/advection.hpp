#pragma once

#include <span>
#include <vector>

#include "dllab/diff/fft.hpp"
#include "dllab/spectral/grid.hpp"

namespace dllab::spectral {

/// Conservative 1D advection term -1/2 d/dx (u^2) in spectral space, with
/// the 2/3 rule applied to the product.
class ConservativeAdvection1D {
 public:
  explicit ConservativeAdvection1D(const PeriodicGrid& grid);

  void operator()(std::span<const Complex> u_hat, std::span<Complex> out) const;

 private:
  diff::GridTransform transform_;
  std::vector<double> k_;
  std::vector<double> mask_;
  mutable std::vector<Complex> work_;
};

/// Throws NumericsError naming `what` and `substep` if any mode is not finite.
void check_finite(std::span<const Complex> u_hat, const char* what, std::size_t substep);

}  // namespace dllab::spectral
