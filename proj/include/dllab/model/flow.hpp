#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dllab/core/rng.hpp"

namespace dllab::model {

/// Linear noising path x_tau = (1 - tau) x + tau eps.
struct NoisingSchedule {
  static double a(double tau) { return 1.0 - tau; }
  static double b(double tau) { return tau; }
  static constexpr double a_dot = -1.0;
  static constexpr double b_dot = 1.0;
};

Eigen::VectorXd noise_sample(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double tau);

/// a_dot x + b_dot eps = eps - x.
Eigen::VectorXd oracle_velocity(const Eigen::VectorXd& x, const Eigen::VectorXd& eps);

/// One velocity-matching minibatch: each row of `x` repeated `draws` times
/// with its own tau ~ U(0,1) and eps ~ N(0, I).
struct NoisingBatch {
  Eigen::MatrixXd x_tau;   // (rows*draws) x r
  Eigen::MatrixXd eps;     // (rows*draws) x r
  Eigen::MatrixXd target;  // eps - x
  std::vector<double> tau;
};

NoisingBatch draw_noising(const Eigen::MatrixXd& x, int draws, Rng& rng);

/// Velocity field v(x_tau, tau, eps); eps is exposed so tests can wire the
/// exact pairing oracle through.
using VelocityHook = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x_tau, const std::vector<double>& tau,
                                                   const Eigen::MatrixXd& eps)>;

/// Mean over rows of ||v - (eps - x)||^2 for a hooked velocity.
double velocity_loss(const Eigen::MatrixXd& x, int draws, Rng& rng, const VelocityHook& v);

/// Row-batched velocity field for the sampler: v(x (K x r), tau).
using BatchVelocity = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x, double tau)>;

/// Euler integration of dx/dtau = v from tau = 1 down to 0 in `steps`
/// uniform steps, starting from x1. Throws NumericsError naming the step on
/// a non-finite state.
Eigen::MatrixXd euler_sample(Eigen::MatrixXd x1, int steps, const BatchVelocity& v);

/// Exact marginal velocity for a 1D Gaussian target N(mu, s^2) under the
/// linear path.
struct GaussianFlow {
  double mu = 0.0;
  double sigma = 1.0;
  double velocity(double x, double tau) const;
  double marginal_mean(double tau) const { return (1.0 - tau) * mu; }
  double marginal_var(double tau) const { return (1.0 - tau) * (1.0 - tau) * sigma * sigma + tau * tau; }
};

/// Sorted-coupling W2 between samples and the exact quantiles of N(mu, s^2).
double w2_to_gaussian(std::vector<double> samples, double mu, double sigma);

struct StabilityPoint {
  double delta = 0.0;
  double w2 = 0.0;
  double velocity_loss = 0.0;
};

/// Samples the Gaussian target with the exact velocity perturbed by
/// delta * (1 + 0.5 sin x), reporting W2 to the target and the velocity
/// loss E||delta w(x_tau)||^2 under the true marginals. The same noise draws
/// are shared across deltas.
std::vector<StabilityPoint> wasserstein_stability_probe(const GaussianFlow& target, const std::vector<double>& deltas,
                                                        int samples, int steps, std::uint64_t seed);

}  // namespace dllab::model
