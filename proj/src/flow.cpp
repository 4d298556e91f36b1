#include "dllab/model/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "dllab/core/error.hpp"

namespace dllab::model {

Eigen::VectorXd noise_sample(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double tau) {
  if (tau < 0.0 || tau > 1.0) throw UsageError("tau must lie in [0, 1]");
  if (tau == 0.0) return x;
  if (tau == 1.0) return eps;
  return NoisingSchedule::a(tau) * x + NoisingSchedule::b(tau) * eps;
}

Eigen::VectorXd oracle_velocity(const Eigen::VectorXd& x, const Eigen::VectorXd& eps) {
  return NoisingSchedule::a_dot * x + NoisingSchedule::b_dot * eps;
}

NoisingBatch draw_noising(const Eigen::MatrixXd& x, int draws, Rng& rng) {
  const Eigen::Index rows = x.rows() * draws;
  const Eigen::Index r = x.cols();
  NoisingBatch nb;
  nb.x_tau.resize(rows, r);
  nb.eps.resize(rows, r);
  nb.target.resize(rows, r);
  nb.tau.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int d = 0; d < draws; ++d) {
      const Eigen::Index row = i * draws + d;
      const double tau = rng.uniform();
      nb.tau[static_cast<std::size_t>(row)] = tau;
      for (Eigen::Index k = 0; k < r; ++k) nb.eps(row, k) = rng.normal();
      nb.x_tau.row(row) = (1.0 - tau) * x.row(i) + tau * nb.eps.row(row);
      nb.target.row(row) = nb.eps.row(row) - x.row(i);
    }
  }
  return nb;
}

double velocity_loss(const Eigen::MatrixXd& x, int draws, Rng& rng, const VelocityHook& v) {
  const NoisingBatch nb = draw_noising(x, draws, rng);
  const Eigen::MatrixXd pred = v(nb.x_tau, nb.tau, nb.eps);
  const double loss = (pred - nb.target).squaredNorm() / static_cast<double>(nb.x_tau.rows());
  if (!std::isfinite(loss)) throw NumericsError("velocity loss is not finite");
  return loss;
}

Eigen::MatrixXd euler_sample(Eigen::MatrixXd x, int steps, const BatchVelocity& v) {
  if (steps < 1) throw ConfigError("sampler needs at least one step");
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double tau = 1.0 - k * h;
    x -= h * v(x, tau);
    if (!x.allFinite()) throw NumericsError("sampler state became non-finite at step " + std::to_string(k));
  }
  return x;
}

double GaussianFlow::velocity(double x, double tau) const {
  const double var = marginal_var(tau);
  const double cov = tau - (1.0 - tau) * sigma * sigma;
  return -mu + cov / var * (x - marginal_mean(tau));
}

double w2_to_gaussian(std::vector<double> samples, double mu, double sigma) {
  std::sort(samples.begin(), samples.end());
  const boost::math::normal_distribution<double> normal(mu, sigma);
  const double n = static_cast<double>(samples.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double q = boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / n);
    acc += (samples[i] - q) * (samples[i] - q);
  }
  return std::sqrt(acc / n);
}

std::vector<StabilityPoint> wasserstein_stability_probe(const GaussianFlow& target, const std::vector<double>& deltas,
                                                        int samples, int steps, std::uint64_t seed) {
  auto w = [](double x) { return 1.0 + 0.5 * std::sin(x); };
  Rng start_rng(seed, Stream::noise);
  Eigen::MatrixXd x1(samples, 1);
  for (int i = 0; i < samples; ++i) x1(i, 0) = start_rng.normal();
  // Monte Carlo draws of (tau, x_tau) from the true marginals for L_V.
  Rng loss_rng(seed, Stream::noise, 1);
  std::vector<double> w_sq(static_cast<std::size_t>(samples));
  for (auto& v : w_sq) {
    const double tau = loss_rng.uniform();
    const double x = target.marginal_mean(tau) + std::sqrt(target.marginal_var(tau)) * loss_rng.normal();
    v = w(x) * w(x);
  }
  double mean_w_sq = 0.0;
  for (double v : w_sq) mean_w_sq += v / samples;

  std::vector<StabilityPoint> out;
  for (double delta : deltas) {
    const Eigen::MatrixXd x0 = euler_sample(x1, steps, [&](const Eigen::MatrixXd& x, double tau) {
      Eigen::MatrixXd v(x.rows(), 1);
      for (Eigen::Index i = 0; i < x.rows(); ++i) v(i, 0) = target.velocity(x(i, 0), tau) + delta * w(x(i, 0));
      return v;
    });
    std::vector<double> s(x0.data(), x0.data() + x0.size());
    out.push_back({delta, w2_to_gaussian(std::move(s), target.mu, target.sigma), delta * delta * mean_w_sq});
  }
  return out;
}

}  // namespace dllab::model
