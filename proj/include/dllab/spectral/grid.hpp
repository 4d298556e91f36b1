#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dllab/core/error.hpp"
#include "dllab/diff/fft.hpp"

namespace dllab::spectral {

using diff::Complex;

/// Uniform periodic grid with `dim` identical axes of `n` points on [0, length).
struct PeriodicGrid {
  int dim = 1;
  std::size_t n = 64;
  double length = 2.0 * std::numbers::pi;

  std::size_t points() const { return dim == 1 ? n : n * n; }
  std::vector<std::size_t> shape() const { return dim == 1 ? std::vector{n} : std::vector{n, n}; }

  /// Signed integer frequency of FFT index i.
  long index_frequency(std::size_t i) const {
    return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
  }

  /// Physical wavenumbers 2*pi*k/length per FFT index. For odd derivatives
  /// the Nyquist entry is zero so derivatives of real fields stay real.
  std::vector<double> wavenumbers(bool odd_derivative) const {
    if (!diff::is_power_of_two(n)) throw ConfigError("grid size must be a power of two");
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      long f = index_frequency(i);
      if (odd_derivative && i == n / 2) f = 0;
      k[i] = 2.0 * std::numbers::pi * static_cast<double>(f) / length;
    }
    return k;
  }

  /// 2/3-rule mask per flattened FFT index: 1 where every |frequency| <= n/3.
  std::vector<double> dealias_mask() const {
    const double cutoff = static_cast<double>(n) / 3.0;
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) {
      axis[i] = std::abs(static_cast<double>(index_frequency(i))) <= cutoff && i != n / 2 ? 1.0 : 0.0;
    }
    if (dim == 1) return axis;
    std::vector<double> mask(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) mask[i * n + j] = axis[i] * axis[j];
    }
    return mask;
  }

  double coordinate(std::size_t i) const { return length * static_cast<double>(i) / static_cast<double>(n); }
};

}  // namespace dllab::spectral
