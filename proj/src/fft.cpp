#include "dllab/diff/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dllab::diff {

FftPlan::FftPlan(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2), scratch_(n) {
  if (!is_power_of_two(n)) {
    throw ConfigError("FFT length " + std::to_string(n) + " is not a power of two");
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::run(Complex* data, std::size_t stride, bool inverse) const {
  Complex* a = scratch_.data();
  for (std::size_t i = 0; i < n_; ++i) a[bitrev_[i]] = data[i * stride];

  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        const Complex t = w * a[start + k + half];
        a[start + k + half] = a[start + k] - t;
        a[start + k] += t;
      }
    }
  }

  const double scale = inverse ? 1.0 / static_cast<double>(n_) : 1.0;
  for (std::size_t i = 0; i < n_; ++i) data[i * stride] = a[i] * scale;
}

namespace {

std::vector<std::size_t> resolve_axes(const std::vector<std::size_t>& shape,
                                      std::span<const std::size_t> axes) {
  std::vector<std::size_t> out;
  if (axes.empty()) {
    for (std::size_t a = 0; a < shape.size(); ++a) out.push_back(a);
  } else {
    out.assign(axes.begin(), axes.end());
  }
  for (std::size_t a : out) {
    if (a >= shape.size()) throw UsageError("FFT axis out of range");
    if (!is_power_of_two(shape[a])) {
      throw ConfigError("FFT axis " + std::to_string(a) + " has non-power-of-two length " +
                        std::to_string(shape[a]));
    }
  }
  return out;
}

void transform_axes(const std::vector<std::size_t>& shape, std::vector<Complex>& data,
                    const std::vector<std::size_t>& axes, bool inverse) {
  for (std::size_t axis : axes) {
    const std::size_t n = shape[axis];
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
    std::size_t outer = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
    const FftPlan plan(n);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        Complex* base = data.data() + o * n * inner + i;
        if (inverse) {
          plan.inverse(base, inner);
        } else {
          plan.forward(base, inner);
        }
      }
    }
  }
}

}  // namespace

ComplexSpectrum fft_forward(const Tensor& field, std::span<const std::size_t> axes) {
  ComplexSpectrum out{field.shape(), std::vector<Complex>(field.data().begin(), field.data().end())};
  transform_axes(out.shape, out.data, resolve_axes(out.shape, axes), false);
  return out;
}

ComplexSpectrum fft_forward(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes) {
  ComplexSpectrum out = spectrum;
  transform_axes(out.shape, out.data, resolve_axes(out.shape, axes), false);
  return out;
}

ComplexSpectrum fft_inverse(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes) {
  ComplexSpectrum out = spectrum;
  transform_axes(out.shape, out.data, resolve_axes(out.shape, axes), true);
  return out;
}

Tensor fft_inverse_real(const ComplexSpectrum& spectrum, std::span<const std::size_t> axes,
                        double* max_imag) {
  const ComplexSpectrum full = fft_inverse(spectrum, axes);
  Tensor out(full.shape);
  double residue = 0.0;
  for (std::size_t i = 0; i < full.data.size(); ++i) {
    out[i] = full.data[i].real();
    residue = std::max(residue, std::abs(full.data[i].imag()));
  }
  if (max_imag != nullptr) *max_imag = residue;
  return out;
}

GridTransform::GridTransform(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), total_(Tensor::count(shape_)), work_(total_) {
  if (shape_.empty() || shape_.size() > 2) throw UsageError("GridTransform supports 1D and 2D grids");
  for (std::size_t n : shape_) plans_.emplace_back(n);
}

void GridTransform::transform(Complex* data, bool inverse) const {
  if (shape_.size() == 1) {
    inverse ? plans_[0].inverse(data) : plans_[0].forward(data);
    return;
  }
  const std::size_t nx = shape_[0];
  const std::size_t ny = shape_[1];
  for (std::size_t i = 0; i < nx; ++i) {
    inverse ? plans_[1].inverse(data + i * ny) : plans_[1].forward(data + i * ny);
  }
  for (std::size_t j = 0; j < ny; ++j) {
    inverse ? plans_[0].inverse(data + j, ny) : plans_[0].forward(data + j, ny);
  }
}

void GridTransform::forward(std::span<const double> field, std::span<Complex> spectrum) const {
  for (std::size_t i = 0; i < total_; ++i) spectrum[i] = Complex(field[i], 0.0);
  transform(spectrum.data(), false);
}

void GridTransform::forward(std::span<Complex> inout) const { transform(inout.data(), false); }

double GridTransform::inverse(std::span<const Complex> spectrum, std::span<double> field) const {
  std::copy(spectrum.begin(), spectrum.end(), work_.begin());
  transform(work_.data(), true);
  double residue = 0.0;
  for (std::size_t i = 0; i < total_; ++i) {
    field[i] = work_[i].real();
    residue = std::max(residue, std::abs(work_[i].imag()));
  }
  return residue;
}

void GridTransform::inverse(std::span<Complex> inout) const { transform(inout.data(), true); }

}  // namespace dllab::diff
