#include "dllab/darcy/darcy.hpp"

#include <cmath>
#include <numbers>

#include "dllab/diff/fft.hpp"

namespace dllab::darcy {

Field sample_permeability(std::size_t n, const PermeabilitySpec& spec, Rng& rng) {
  if (n < 8) throw ConfigError("permeability grid needs n >= 8");
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd xi(nn, nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    for (Eigen::Index l = 0; l < nn; ++l) {
      xi(k, l) = rng.normal() * std::pow(1.0 + static_cast<double>(k * k + l * l), -0.5 * spec.decay);
    }
  }
  Eigen::MatrixXd basis(nn, nn);  // basis(i, k) = cos(pi k (i + 1/2) / n)
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index k = 0; k < nn; ++k) {
      basis(i, k) = std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) /
                             static_cast<double>(n));
    }
  }
  const Eigen::MatrixXd g = basis * xi * basis.transpose();
  Field a({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + spec.offset > 0.0 ? spec.high
                                                                                                   : spec.low;
    }
  }
  return a;
}

Field sample_rbf_field(std::size_t n, const RbfSpec& spec, Rng& rng) {
  if (!(spec.sigma > 0.0) || !(spec.length_scale > 0.0)) {
    throw ConfigError("RBF field needs sigma > 0 and length scale > 0");
  }
  const double h = spacing(n);
  // Periodic extent covers the unit square plus four correlation lengths on
  // each side so the wrapped kernel is negligible.
  const double extent = 2.0 * (1.0 + 4.0 * spec.length_scale);
  std::size_t m = 1;
  while (m < 4 * n || static_cast<double>(m) * h < extent) m <<= 1;
  std::vector<double> row(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = static_cast<double>(std::min(i, m - i)) * h;
    row[i] = std::exp(-d * d / (2.0 * spec.length_scale * spec.length_scale));
  }
  // Circulant eigenvalues are the 2D DFT of the separable first row.
  std::vector<diff::Complex> lam(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) lam[i * m + j] = row[i] * row[j];
  }
  lam[0] += spec.jitter;
  diff::GridTransform transform({m, m});
  transform.forward(lam);
  double peak = 0.0, trough = 0.0;
  for (const auto& l : lam) {
    peak = std::max(peak, l.real());
    trough = std::min(trough, l.real());
  }
  if (trough < -1e-3 * peak) {
    throw NumericsError("RBF covariance embedding is not positive semidefinite (sigma=" +
                        std::to_string(spec.sigma) + ", length_scale=" + std::to_string(spec.length_scale) +
                        ", jitter=" + std::to_string(spec.jitter) + ")");
  }
  const double norm = 1.0 / static_cast<double>(m * m);
  std::vector<diff::Complex> w(m * m);
  for (std::size_t i = 0; i < m * m; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    w[i] = std::sqrt(std::max(lam[i].real(), 0.0) * norm) * diff::Complex(re, im);
  }
  transform.forward(w);
  Field g({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g(i, j) = w[i * m + j].real();
  }
  return g;
}

Field combine_source(const SourceSpec& spec, const Field& g_ln, const Field& g_gp) {
  if (spec.lambda < 0.0 || spec.lambda > 1.0) throw ConfigError("source mixing weight must lie in [0, 1]");
  Field f(g_ln.shape());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = spec.lambda * spec.lognormal.sigma * std::exp(g_ln[i]) +
           (1.0 - spec.lambda) * spec.gaussian.sigma * g_gp[i];
  }
  return f;
}

Field sample_source(std::size_t n, const SourceSpec& spec, Rng& rng) {
  Rng ln = rng.substream(0);
  Rng gp = rng.substream(1);
  const Field g_ln = sample_rbf_field(n, spec.lognormal, ln);
  const Field g_gp = sample_rbf_field(n, spec.gaussian, gp);
  return combine_source(spec, g_ln, g_gp);
}

DarcyOperator::DarcyOperator(const Field& a) : n_(a.dim(0)), m_(n_ - 2) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1) || n_ < 3) throw UsageError("permeability must be square, n >= 3");
  const double h = spacing(n_);
  inv_h2_ = 1.0 / (h * h);
  auto harmonic = [](double p, double q) { return 2.0 * p * q / (p + q); };
  face_x_.assign((m_ + 1) * m_, 0.0);
  face_y_.assign(m_ * (m_ + 1), 0.0);
  // interior node (i, j) sits at full-grid node (i + 1, j + 1)
  for (std::size_t i = 0; i <= m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) {
      const double lo = a(i, j + 1), hi = a(i + 1, j + 1);
      double c;
      if (i == 0) c = hi;
      else if (i == m_) c = lo;
      else c = harmonic(lo, hi);
      face_x_[i * m_ + j] = c;
    }
  }
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j <= m_; ++j) {
      const double lo = a(i + 1, j), hi = a(i + 1, j + 1);
      double c;
      if (j == 0) c = hi;
      else if (j == m_) c = lo;
      else c = harmonic(lo, hi);
      face_y_[i * (m_ + 1) + j] = c;
    }
  }
}

void DarcyOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t m = m_;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = u[i * m + j];
      const double up = face_x_[i * m + j], down = face_x_[(i + 1) * m + j];
      const double left = face_y_[i * (m + 1) + j], right = face_y_[i * (m + 1) + j + 1];
      double acc = (up + down + left + right) * c;
      if (i > 0) acc -= up * u[(i - 1) * m + j];
      if (i + 1 < m) acc -= down * u[(i + 1) * m + j];
      if (j > 0) acc -= left * u[i * m + j - 1];
      if (j + 1 < m) acc -= right * u[i * m + j + 1];
      out[i * m + j] = acc * inv_h2_;
    }
  }
}

Eigen::MatrixXd DarcyOperator::dense() const {
  const auto size = static_cast<Eigen::Index>(unknowns());
  Eigen::MatrixXd a(size, size);
  std::vector<double> e(unknowns(), 0.0), col(unknowns());
  for (Eigen::Index k = 0; k < size; ++k) {
    e[static_cast<std::size_t>(k)] = 1.0;
    apply(e, col);
    e[static_cast<std::size_t>(k)] = 0.0;
    for (Eigen::Index r = 0; r < size; ++r) a(r, k) = col[static_cast<std::size_t>(r)];
  }
  return a;
}

std::vector<double> DarcyOperator::interior(const Field& full) const {
  std::vector<double> v(unknowns());
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) v[i * m_ + j] = full(i + 1, j + 1);
  }
  return v;
}

Field DarcyOperator::embed(std::span<const double> v) const {
  Field full({n_, n_});
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) full(i + 1, j + 1) = v[i * m_ + j];
  }
  return full;
}

CgResult solve_darcy(const Field& permeability, const Field& source, const CgConfig& cfg,
                     const CgObserver& observer) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("CG tolerance must be positive");
  if (!permeability.same_shape(source)) throw UsageError("permeability and source shapes differ");
  const DarcyOperator op(permeability);
  const std::vector<double> b = op.interior(source);
  for (double v : b) {
    if (!std::isfinite(v)) throw NumericsError("Darcy source has non-finite entries");
  }
  const std::size_t m = b.size();
  std::vector<double> x(m, 0.0), r = b, p = b, ap(m);
  auto dot = [m](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u[i] * v[i];
    return s;
  };
  const double b_norm = std::sqrt(dot(b, b));
  CgResult result;
  if (b_norm == 0.0) {
    result.solution = op.embed(x);
    result.converged = true;
    return result;
  }
  double rr = dot(r, r);
  std::size_t it = 0;
  while (std::sqrt(rr) / b_norm > cfg.tolerance && it < cfg.max_iterations) {
    op.apply(p, ap);
    const double alpha = rr / dot(p, ap);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
    ++it;
    if (observer) observer(it, x);
  }
  result.iterations = it;
  result.relative_residual = std::sqrt(rr) / b_norm;
  result.converged = result.relative_residual <= cfg.tolerance;
  result.solution = op.embed(x);
  return result;
}

}  // namespace dllab::darcy
