#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dllab/diff/tensor.hpp"

namespace dllab::diff {

using Complex = std::complex<double>;

/// Spectrum of a (real or complex) field. Data are interleaved (re, im)
/// pairs, row-major over `shape`.
struct ComplexSpectrum {
  std::vector<std::size_t> shape;
  std::vector<Complex> data;
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 transform of a fixed power-of-two length.
/// Forward is unnormalized; inverse carries the 1/N factor.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  void forward(Complex* data, std::size_t stride = 1) const { run(data, stride, false); }
  void inverse(Complex* data, std::size_t stride = 1) const { run(data, stride, true); }

 private:
  void run(Complex* data, std::size_t stride, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;
  mutable std::vector<Complex> scratch_;
};

/// Forward transform of a real tensor over the listed axes (all axes when
/// empty). Throws ConfigError on a non-power-of-two transformed axis.
ComplexSpectrum fft_forward(const Tensor& field, std::span<const std::size_t> axes = {});
ComplexSpectrum fft_forward(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes = {});
ComplexSpectrum fft_inverse(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes = {});

/// Inverse transform returning the real part. When `max_imag` is given it
/// receives the largest imaginary residue.
Tensor fft_inverse_real(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes = {},
                        double* max_imag = nullptr);

/// Cached forward/inverse transforms of real fields on a 1D or 2D periodic
/// grid; the workhorse of the pseudo-spectral solvers.
class GridTransform {
 public:
  explicit GridTransform(std::vector<std::size_t> shape);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return total_; }

  void forward(std::span<const double> field, std::span<Complex> spectrum) const;
  void forward(std::span<Complex> inout) const;
  /// Returns the largest imaginary residue of the inverse transform.
  double inverse(std::span<const Complex> spectrum, std::span<double> field) const;
  void inverse(std::span<Complex> inout) const;

 private:
  void transform(Complex* data, bool inverse) const;

  std::vector<std::size_t> shape_;
  std::size_t total_;
  std::vector<FftPlan> plans_;
  mutable std::vector<Complex> work_;
};

}  // namespace dllab::diff
