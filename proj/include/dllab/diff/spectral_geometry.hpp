#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "dllab/core/error.hpp"
#include "dllab/diff/matrix.hpp"

namespace dllab::diff {

/// Truncated real DFT pair used by spectral convolution layers on 1D or 2D
/// grids. Activations are laid out point-major: rows = grid points (row-major
/// over the grid), columns = channels.
///
/// Retained modes: k in [0, m) in 1D; (kx, ky) with |kx| < m and ky in [0, m)
/// in 2D (the last axis is the half-spectrum axis). Analysis is the
/// unnormalized forward transform restricted to those modes; synthesis is
/// the matching real inverse with the 1/N factor, counting ky > 0 twice.
/// Mode storage for a batch: row (mode * batch + sample).
template <class S>
class SpectralGeometry {
 public:
  SpectralGeometry(std::vector<int> grid, int modes) : grid_(std::move(grid)), m_(modes) {
    if (grid_.empty() || grid_.size() > 2) throw UsageError("spectral layers support 1D and 2D grids");
    for (int n : grid_) {
      if (2 * m_ > n) throw ConfigError("retained modes exceed half the grid size");
    }
    if (m_ < 1) throw ConfigError("spectral layer needs at least one mode");
    const int ny = grid_.back();
    const double cells = grid_.size() == 1 ? ny : static_cast<double>(grid_[0]) * ny;
    fyr_.resize(m_, ny);
    fyi_.resize(m_, ny);
    gyr_.resize(ny, m_);
    gyi_.resize(ny, m_);
    for (int k = 0; k < m_; ++k) {
      const double weight = (k == 0 ? 1.0 : 2.0) / cells;
      for (int j = 0; j < ny; ++j) {
        const double angle = 2.0 * std::numbers::pi * k * j / ny;
        fyr_(k, j) = static_cast<S>(std::cos(angle));
        fyi_(k, j) = static_cast<S>(-std::sin(angle));
        gyr_(j, k) = static_cast<S>(weight * std::cos(angle));
        gyi_(j, k) = static_cast<S>(weight * std::sin(angle));
      }
    }
    if (grid_.size() == 2) {
      const int nx = grid_[0];
      const int kxn = 2 * m_ - 1;
      fxr_.resize(kxn, nx);
      fxi_.resize(kxn, nx);
      gxr_.resize(nx, kxn);
      gxi_.resize(nx, kxn);
      for (int q = 0; q < kxn; ++q) {
        const int kx = q < m_ ? q : q - kxn;
        for (int i = 0; i < nx; ++i) {
          const double angle = 2.0 * std::numbers::pi * kx * i / nx;
          fxr_(q, i) = static_cast<S>(std::cos(angle));
          fxi_(q, i) = static_cast<S>(-std::sin(angle));
          gxr_(i, q) = static_cast<S>(std::cos(angle));
          gxi_(i, q) = static_cast<S>(std::sin(angle));
        }
      }
    }
  }

  const std::vector<int>& grid() const noexcept { return grid_; }
  int modes_per_axis() const noexcept { return m_; }
  int points() const noexcept { return grid_.size() == 1 ? grid_[0] : grid_[0] * grid_[1]; }
  int mode_count() const noexcept { return grid_.size() == 1 ? m_ : m_ * (2 * m_ - 1); }

  /// x: points x C block of one sample; writes rows (k*batch + b) of hr/hi.
  template <class In>
  void analyze(const In& x, int b, int batch, Matrix<S>& hr, Matrix<S>& hi) const {
    const auto c = x.cols();
    if (grid_.size() == 1) {
      const Matrix<S> tr = fyr_ * x;
      const Matrix<S> ti = fyi_ * x;
      for (int k = 0; k < m_; ++k) {
        hr.row(k * batch + b) = tr.row(k);
        hi.row(k * batch + b) = ti.row(k);
      }
      return;
    }
    const int nx = grid_[0];
    const int ny = grid_[1];
    const int kxn = 2 * m_ - 1;
    Matrix<S> tr(m_ * nx, c), ti(m_ * nx, c);
    for (int i = 0; i < nx; ++i) {
      const auto rows = x.middleRows(i * ny, ny);
      const Matrix<S> ar = fyr_ * rows;
      const Matrix<S> ai = fyi_ * rows;
      for (int ky = 0; ky < m_; ++ky) {
        tr.row(ky * nx + i) = ar.row(ky);
        ti.row(ky * nx + i) = ai.row(ky);
      }
    }
    for (int ky = 0; ky < m_; ++ky) {
      const auto ar = tr.middleRows(ky * nx, nx);
      const auto ai = ti.middleRows(ky * nx, nx);
      const Matrix<S> br = fxr_ * ar - fxi_ * ai;
      const Matrix<S> bi = fxr_ * ai + fxi_ * ar;
      for (int q = 0; q < kxn; ++q) {
        hr.row((ky * kxn + q) * batch + b) = br.row(q);
        hi.row((ky * kxn + q) * batch + b) = bi.row(q);
      }
    }
  }

  /// Adjoint of analyze: accumulates into dx (points x C).
  template <class Out>
  void analyze_adjoint(const Matrix<S>& dhr, const Matrix<S>& dhi, int b, int batch, Out&& dx) const {
    const auto c = dhr.cols();
    if (grid_.size() == 1) {
      Matrix<S> tr(m_, c), ti(m_, c);
      for (int k = 0; k < m_; ++k) {
        tr.row(k) = dhr.row(k * batch + b);
        ti.row(k) = dhi.row(k * batch + b);
      }
      dx.noalias() += fyr_.transpose() * tr + fyi_.transpose() * ti;
      return;
    }
    const int nx = grid_[0];
    const int ny = grid_[1];
    const int kxn = 2 * m_ - 1;
    Matrix<S> tr(m_ * nx, c), ti(m_ * nx, c);
    Matrix<S> br(kxn, c), bi(kxn, c);
    for (int ky = 0; ky < m_; ++ky) {
      for (int q = 0; q < kxn; ++q) {
        br.row(q) = dhr.row((ky * kxn + q) * batch + b);
        bi.row(q) = dhi.row((ky * kxn + q) * batch + b);
      }
      tr.middleRows(ky * nx, nx).noalias() = fxr_.transpose() * br + fxi_.transpose() * bi;
      ti.middleRows(ky * nx, nx).noalias() = fxr_.transpose() * bi - fxi_.transpose() * br;
    }
    Matrix<S> ar(m_, c), ai(m_, c);
    for (int i = 0; i < nx; ++i) {
      for (int ky = 0; ky < m_; ++ky) {
        ar.row(ky) = tr.row(ky * nx + i);
        ai.row(ky) = ti.row(ky * nx + i);
      }
      dx.middleRows(i * ny, ny).noalias() += fyr_.transpose() * ar + fyi_.transpose() * ai;
    }
  }

  /// Real synthesis of one sample from mode rows (k*batch + b); writes y.
  template <class Out>
  void synthesize(const Matrix<S>& yr, const Matrix<S>& yi, int b, int batch, Out&& y) const {
    const auto c = yr.cols();
    if (grid_.size() == 1) {
      Matrix<S> ar(m_, c), ai(m_, c);
      for (int k = 0; k < m_; ++k) {
        ar.row(k) = yr.row(k * batch + b);
        ai.row(k) = yi.row(k * batch + b);
      }
      y.noalias() = gyr_ * ar - gyi_ * ai;
      return;
    }
    const int nx = grid_[0];
    const int ny = grid_[1];
    const int kxn = 2 * m_ - 1;
    Matrix<S> qr(m_ * nx, c), qi(m_ * nx, c);
    Matrix<S> br(kxn, c), bi(kxn, c);
    for (int ky = 0; ky < m_; ++ky) {
      for (int q = 0; q < kxn; ++q) {
        br.row(q) = yr.row((ky * kxn + q) * batch + b);
        bi.row(q) = yi.row((ky * kxn + q) * batch + b);
      }
      qr.middleRows(ky * nx, nx).noalias() = gxr_ * br - gxi_ * bi;
      qi.middleRows(ky * nx, nx).noalias() = gxr_ * bi + gxi_ * br;
    }
    Matrix<S> ar(m_, c), ai(m_, c);
    for (int i = 0; i < nx; ++i) {
      for (int ky = 0; ky < m_; ++ky) {
        ar.row(ky) = qr.row(ky * nx + i);
        ai.row(ky) = qi.row(ky * nx + i);
      }
      y.middleRows(i * ny, ny).noalias() = gyr_ * ar - gyi_ * ai;
    }
  }

  /// Adjoint of synthesize: writes rows (k*batch + b) of dyr/dyi.
  template <class In>
  void synthesize_adjoint(const In& dy, int b, int batch, Matrix<S>& dyr, Matrix<S>& dyi) const {
    const auto c = dy.cols();
    if (grid_.size() == 1) {
      const Matrix<S> ar = gyr_.transpose() * dy;
      const Matrix<S> ai = -(gyi_.transpose() * dy);
      for (int k = 0; k < m_; ++k) {
        dyr.row(k * batch + b) = ar.row(k);
        dyi.row(k * batch + b) = ai.row(k);
      }
      return;
    }
    const int nx = grid_[0];
    const int ny = grid_[1];
    const int kxn = 2 * m_ - 1;
    Matrix<S> qr(m_ * nx, c), qi(m_ * nx, c);
    for (int i = 0; i < nx; ++i) {
      const auto rows = dy.middleRows(i * ny, ny);
      const Matrix<S> ar = gyr_.transpose() * rows;
      const Matrix<S> ai = -(gyi_.transpose() * rows);
      for (int ky = 0; ky < m_; ++ky) {
        qr.row(ky * nx + i) = ar.row(ky);
        qi.row(ky * nx + i) = ai.row(ky);
      }
    }
    for (int ky = 0; ky < m_; ++ky) {
      const auto ar = qr.middleRows(ky * nx, nx);
      const auto ai = qi.middleRows(ky * nx, nx);
      const Matrix<S> br = gxr_.transpose() * ar + gxi_.transpose() * ai;
      const Matrix<S> bi = gxr_.transpose() * ai - gxi_.transpose() * ar;
      for (int q = 0; q < kxn; ++q) {
        dyr.row((ky * kxn + q) * batch + b) = br.row(q);
        dyi.row((ky * kxn + q) * batch + b) = bi.row(q);
      }
    }
  }

 private:
  std::vector<int> grid_;
  int m_;
  Matrix<S> fyr_, fyi_, gyr_, gyi_;
  Matrix<S> fxr_, fxi_, gxr_, gxi_;
};

}  // namespace dllab::diff
