#include "dllab/spectral/etdrk.hpp"

#include <cmath>
#include <numbers>

namespace dllab::spectral {

namespace {

constexpr int kContourPoints = 32;

template <class F>
Complex contour_mean(Complex z, F&& f) {
  Complex acc = 0.0;
  for (int j = 0; j < kContourPoints; ++j) {
    const double angle = 2.0 * std::numbers::pi * (j + 0.5) / kContourPoints;
    acc += f(z + Complex(std::cos(angle), std::sin(angle)));
  }
  return acc / static_cast<double>(kContourPoints);
}

}  // namespace

EtdrkTable build_etdrk_table(std::span<const Complex> linear_symbol, double h, int order) {
  if (!(h > 0.0)) throw ConfigError("ETDRK substep must be positive");
  if (order != 2 && order != 4) throw ConfigError("ETDRK order must be 2 or 4");
  EtdrkTable t;
  t.order = order;
  t.h = h;
  const std::size_t n = linear_symbol.size();
  t.e.resize(n);
  t.e_half.resize(n);
  t.c1.resize(n);
  t.c2.resize(n);
  if (order == 4) {
    t.c3.resize(n);
    t.c4.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Complex z = linear_symbol[i] * h;
    t.e[i] = std::exp(z);
    t.e_half[i] = std::exp(z / 2.0);
    if (order == 2) {
      t.c1[i] = h * contour_mean(z, [](Complex w) { return (std::exp(w) - 1.0) / w; });
      t.c2[i] = h * contour_mean(z, [](Complex w) { return (std::exp(w) - 1.0 - w) / (w * w); });
    } else {
      t.c1[i] = h * contour_mean(z, [](Complex w) { return (std::exp(w / 2.0) - 1.0) / w; });
      t.c2[i] = h * contour_mean(z, [](Complex w) {
        return (-4.0 - w + std::exp(w) * (4.0 - 3.0 * w + w * w)) / (w * w * w);
      });
      t.c3[i] = h * contour_mean(z, [](Complex w) {
        return (2.0 + w + std::exp(w) * (-2.0 + w)) / (w * w * w);
      });
      t.c4[i] = h * contour_mean(z, [](Complex w) {
        return (-4.0 - 3.0 * w - w * w + std::exp(w) * (4.0 - w)) / (w * w * w);
      });
    }
  }
  return t;
}

EtdrkStepper::EtdrkStepper(EtdrkTable table, NonlinearTerm nonlinear)
    : table_(std::move(table)), nonlinear_(std::move(nonlinear)) {
  const std::size_t n = table_.size();
  for (auto* v : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_}) v->assign(n, Complex{});
}

void EtdrkStepper::step(std::span<Complex> u, double t) {
  const std::size_t n = table_.size();
  const double h = table_.h;
  nonlinear_(u, t, nv_);
  if (table_.order == 2) {
    for (std::size_t i = 0; i < n; ++i) a_[i] = table_.e[i] * u[i] + table_.c1[i] * nv_[i];
    nonlinear_(a_, t + h, na_);
    for (std::size_t i = 0; i < n; ++i) u[i] = a_[i] + table_.c2[i] * (na_[i] - nv_[i]);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) a_[i] = table_.e_half[i] * u[i] + table_.c1[i] * nv_[i];
  nonlinear_(a_, t + 0.5 * h, na_);
  for (std::size_t i = 0; i < n; ++i) b_[i] = table_.e_half[i] * u[i] + table_.c1[i] * na_[i];
  nonlinear_(b_, t + 0.5 * h, nb_);
  for (std::size_t i = 0; i < n; ++i) c_[i] = table_.e_half[i] * a_[i] + table_.c1[i] * (2.0 * nb_[i] - nv_[i]);
  nonlinear_(c_, t + h, nc_);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = table_.e[i] * u[i] + table_.c2[i] * nv_[i] + 2.0 * table_.c3[i] * (na_[i] + nb_[i]) +
           table_.c4[i] * nc_[i];
  }
}

}  // namespace dllab::spectral
