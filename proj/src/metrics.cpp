#include "dllab/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dllab/core/error.hpp"

namespace dllab::metrics {

namespace {

double mean_pair_distance(const Cloud& a, const Cloud& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) acc += (a.row(i) - b.row(j)).norm();
  }
  return acc / static_cast<double>(a.rows() * b.rows());
}

void require_samples(const Cloud& x, const char* what) {
  if (x.rows() < 1) throw UsageError(std::string(what) + " needs at least one sample");
}

// sum_{k,l} |x_k - x_l| for sorted x, as gap_g * g * (k - g) summed over
// consecutive gaps: nonnegative and exactly zero for equal members.
double sorted_pair_sum(const std::vector<double>& sorted) {
  const auto k = static_cast<double>(sorted.size());
  double acc = 0.0;
  for (std::size_t g = 1; g < sorted.size(); ++g) {
    acc += (sorted[g] - sorted[g - 1]) * static_cast<double>(g) * (k - static_cast<double>(g));
  }
  return 2.0 * acc;
}

Cloud subsample(const Cloud& x, Eigen::Index n, Rng& rng) {
  if (x.rows() == n) return x;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  Cloud out(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::RowVectorXd pointwise_std(const Cloud& x) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  return ((x.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
}

double rms(const Eigen::RowVectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

double energy_distance(const Cloud& x, const Cloud& y) {
  require_samples(x, "energy distance");
  require_samples(y, "energy distance");
  if (x.cols() != y.cols()) throw UsageError("energy distance: dimension mismatch");
  return 2.0 * mean_pair_distance(x, y) - mean_pair_distance(x, x) - mean_pair_distance(y, y);
}

double wasserstein1_sorted(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty()) throw UsageError("sorted W1 needs equal nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double sliced_wasserstein(const Cloud& x, const Cloud& y, int directions, Rng& rng) {
  require_samples(x, "sliced Wasserstein");
  require_samples(y, "sliced Wasserstein");
  if (x.cols() != y.cols()) throw UsageError("sliced Wasserstein: dimension mismatch");
  if (directions < 1) throw ConfigError("sliced Wasserstein needs at least one direction");
  const Eigen::Index n = std::min(x.rows(), y.rows());
  const Cloud xs = subsample(x, n, rng);
  const Cloud ys = subsample(y, n, rng);
  double acc = 0.0;
  Eigen::VectorXd dir(x.cols());
  for (int p = 0; p < directions; ++p) {
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = rng.normal();
    dir.normalize();
    const Eigen::VectorXd px = xs * dir, py = ys * dir;
    acc += wasserstein1_sorted(std::vector<double>(px.data(), px.data() + n),
                               std::vector<double>(py.data(), py.data() + n));
  }
  return acc / directions;
}

double nrmse_mean(const Cloud& pred, const Cloud& truth) {
  require_samples(pred, "NRMSE");
  require_samples(truth, "NRMSE");
  const Eigen::RowVectorXd mp = pred.colwise().mean(), mt = truth.colwise().mean();
  return rms(mp - mt) / (rms(mt) + kNrmseGuard);
}

double nrmse_spread(const Cloud& pred, const Cloud& truth) {
  require_samples(pred, "NRMSE");
  require_samples(truth, "NRMSE");
  const Eigen::RowVectorXd sp = pointwise_std(pred), st = pointwise_std(truth);
  return rms(sp - st) / (rms(st) + kNrmseGuard);
}

bool degenerate_truth_spread(const Cloud& truth) { return pointwise_std(truth).maxCoeff() == 0.0; }

double crps(const Cloud& ensemble, const Eigen::RowVectorXd& y) {
  require_samples(ensemble, "CRPS");
  if (ensemble.cols() != y.size()) throw UsageError("CRPS: dimension mismatch");
  const auto k = static_cast<double>(ensemble.rows());
  double total = 0.0;
  std::vector<double> col(static_cast<std::size_t>(ensemble.rows()));
  for (Eigen::Index p = 0; p < ensemble.cols(); ++p) {
    double skill = 0.0;
    for (Eigen::Index i = 0; i < ensemble.rows(); ++i) {
      col[static_cast<std::size_t>(i)] = ensemble(i, p);
      skill += std::abs(ensemble(i, p) - y(p));
    }
    std::sort(col.begin(), col.end());
    total += skill / k - 0.5 * sorted_pair_sum(col) / (k * k);
  }
  return total / static_cast<double>(ensemble.cols());
}

double ssr(const Cloud& ensemble, const Eigen::RowVectorXd& y, double eps) {
  require_samples(ensemble, "SSR");
  const Eigen::RowVectorXd mu = ensemble.colwise().mean();
  const double spread = rms(pointwise_std(ensemble));
  return spread / (rms(mu - y) + eps);
}

double ssr_multi(const Cloud& ensemble, const Cloud& truth, double eps) {
  require_samples(ensemble, "SSR");
  require_samples(truth, "SSR");
  const Eigen::RowVectorXd mu = ensemble.colwise().mean();
  const double spread = rms(pointwise_std(ensemble));
  const double mse = (truth.rowwise() - mu).squaredNorm() / static_cast<double>(truth.size());
  return spread / (std::sqrt(mse) + eps);
}

ConditionMetrics evaluate_condition(const Cloud& pred, const Cloud& truth, int directions, Rng& rng) {
  ConditionMetrics m;
  m.ed = energy_distance(pred, truth);
  m.swd = sliced_wasserstein(pred, truth, directions, rng);
  m.nrmse_m = nrmse_mean(pred, truth);
  m.nrmse_s = nrmse_spread(pred, truth);
  double c = 0.0;
  for (Eigen::Index j = 0; j < truth.rows(); ++j) c += crps(pred, truth.row(j));
  m.crps = c / static_cast<double>(truth.rows());
  m.ssr = ssr_multi(pred, truth);
  m.degenerate_truth = degenerate_truth_spread(truth);
  return m;
}

ConditionMetrics MetricReport::mean() const {
  ConditionMetrics m;
  if (conditions.empty()) return m;
  for (const auto& c : conditions) {
    m.ed += c.ed;
    m.swd += c.swd;
    m.nrmse_m += c.nrmse_m;
    m.nrmse_s += c.nrmse_s;
    m.crps += c.crps;
    m.ssr += c.ssr;
    m.degenerate_truth = m.degenerate_truth || c.degenerate_truth;
  }
  const auto n = static_cast<double>(conditions.size());
  m.ed /= n;
  m.swd /= n;
  m.nrmse_m /= n;
  m.nrmse_s /= n;
  m.crps /= n;
  m.ssr /= n;
  return m;
}

void MetricReport::write_csv(std::ostream& out) const {
  out << "model,condition,ED,SWD,NRMSE_m,NRMSE_s,CRPS,SSR,degenerate_truth,directions,seed,ssr_eps\n";
  auto row = [&](const std::string& label, const ConditionMetrics& c) {
    out << model << ',' << label << ',' << c.ed << ',' << c.swd << ',' << c.nrmse_m << ',' << c.nrmse_s << ','
        << c.crps << ',' << c.ssr << ',' << (c.degenerate_truth ? 1 : 0) << ',' << directions << ',' << seed << ','
        << ssr_eps << '\n';
  };
  out.precision(10);
  for (std::size_t i = 0; i < conditions.size(); ++i) row(std::to_string(i), conditions[i]);
  row("mean", mean());
}

}  // namespace dllab::metrics
