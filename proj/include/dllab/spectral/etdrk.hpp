#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dllab/spectral/grid.hpp"

namespace dllab::spectral {

/// Per-mode exponential time-differencing coefficients for u' = L u + N(u, t).
///
/// order 2 (Cox-Matthews ETD2RK): c1 = h*phi1(Lh), c2 = h*phi2(Lh).
/// order 4 (Cox-Matthews ETDRK4): c1 = h*phi1(Lh/2)/2 and the three
/// combination weights f1, f2, f3 in c2..c4.
/// phi-functions are averaged over 32 points on the unit circle around Lh.
struct EtdrkTable {
  int order = 4;
  double h = 0.0;
  std::vector<Complex> e;
  std::vector<Complex> e_half;
  std::vector<Complex> c1, c2, c3, c4;

  std::size_t size() const noexcept { return e.size(); }
};

EtdrkTable build_etdrk_table(std::span<const Complex> linear_symbol, double h, int order);

/// Nonlinear term in spectral space: out = N(u_hat, t).
using NonlinearTerm = std::function<void(std::span<const Complex> u_hat, double t, std::span<Complex> out)>;

/// Owns the stage buffers for repeated ETDRK steps.
class EtdrkStepper {
 public:
  EtdrkStepper(EtdrkTable table, NonlinearTerm nonlinear);

  const EtdrkTable& table() const noexcept { return table_; }

  /// Advances u_hat in place from time t to t + h.
  void step(std::span<Complex> u_hat, double t);

 private:
  EtdrkTable table_;
  NonlinearTerm nonlinear_;
  std::vector<Complex> nv_, na_, nb_, nc_, a_, b_, c_;
};

}  // namespace dllab::spectral
