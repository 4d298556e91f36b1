#pragma once

#include "dllab/core/rng.hpp"
#include "dllab/diff/tensor.hpp"
#include "dllab/spectral/grid.hpp"

namespace dllab::spectral {

struct InitialConditionSpec {
  double decay_exponent = 2.0;
  double amplitude = 1.0;
  double mean = 0.0;
};

/// Random-phase Fourier series with |coefficient| proportional to |k|^-p on
/// 0 < |k| <= n/3, made Hermitian, rescaled to max-abs `amplitude`, then
/// shifted by `mean`. `max_imag` receives the inverse-transform imaginary
/// residue.
Field sample_initial_condition(const PeriodicGrid& grid, const InitialConditionSpec& spec, Rng& rng,
                               double* max_imag = nullptr);

}  // namespace dllab::spectral
