#include "dllab/spectral/initial_condition.hpp"

#include <cmath>

namespace dllab::spectral {

Field sample_initial_condition(const PeriodicGrid& grid, const InitialConditionSpec& spec, Rng& rng,
                               double* max_imag) {
  const std::size_t n = grid.n;
  const std::size_t m = grid.points();
  const double cutoff = static_cast<double>(n) / 3.0;
  std::vector<Complex> raw(m);
  for (std::size_t idx = 0; idx < m; ++idx) {
    const double re = rng.normal();
    const double im = rng.normal();
    const double fx = static_cast<double>(grid.index_frequency(grid.dim == 1 ? idx : idx / n));
    const double fy = grid.dim == 1 ? 0.0 : static_cast<double>(grid.index_frequency(idx % n));
    const double k = std::hypot(fx, fy);
    if (k == 0.0 || k > cutoff) continue;
    raw[idx] = Complex(re, im) * std::pow(k, -spec.decay_exponent);
  }
  auto mirror = [&](std::size_t idx) {
    if (grid.dim == 1) return (n - idx) % n;
    return ((n - idx / n) % n) * n + (n - idx % n) % n;
  };
  std::vector<Complex> spectrum(m);
  for (std::size_t idx = 0; idx < m; ++idx) spectrum[idx] = 0.5 * (raw[idx] + std::conj(raw[mirror(idx)]));

  diff::GridTransform transform(grid.shape());
  Field u(grid.shape());
  const double residue = transform.inverse(spectrum, u.data());
  if (max_imag) *max_imag = residue;

  double peak = 0.0;
  for (double x : u.values()) peak = std::max(peak, std::abs(x));
  const double scale = peak > 0.0 ? spec.amplitude / peak : 0.0;
  for (double& x : u.values()) x = x * scale + spec.mean;
  return u;
}

}  // namespace dllab::spectral
