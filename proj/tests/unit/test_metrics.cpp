#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dllab/metrics/metrics.hpp"

using namespace dllab;
using metrics::Cloud;

namespace {

Cloud gaussian_cloud(int k, int d, double shift, Rng& rng) {
  Cloud c(k, d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) c(i, j) = rng.normal() + (j == 0 ? shift : 0.0);
  }
  return c;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E|Z| for Z ~ N(m, s^2).
double folded_mean(double m, double s) {
  return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-m * m / (2 * s * s)) + m * (1 - 2 * phi_cdf(-m / s));
}

// Element-by-element references.
double naive_ed(const Cloud& x, const Cloud& y) {
  auto mean_dist = [](const Cloud& a, const Cloud& b) {
    double acc = 0;
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < b.rows(); ++j) {
        double s = 0;
        for (int c = 0; c < a.cols(); ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
        acc += std::sqrt(s);
      }
    }
    return acc / double(a.rows() * b.rows());
  };
  return 2 * mean_dist(x, y) - mean_dist(x, x) - mean_dist(y, y);
}

double naive_crps(const Cloud& x, const Eigen::RowVectorXd& y) {
  double total = 0;
  const double k = double(x.rows());
  for (int p = 0; p < x.cols(); ++p) {
    double a = 0, b = 0;
    for (int i = 0; i < x.rows(); ++i) {
      a += std::abs(x(i, p) - y(p));
      for (int j = 0; j < x.rows(); ++j) b += std::abs(x(i, p) - x(j, p));
    }
    total += a / k - 0.5 * b / (k * k);
  }
  return total / double(x.cols());
}

// W1 of equal-size samples by rank matching without sorting: the i-th order
// statistic is the element with exactly i smaller entries (ties broken by index).
double naive_w1(const std::vector<double>& a, const std::vector<double>& b) {
  auto order_stat = [](const std::vector<double>& v, std::size_t rank) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t below = 0;
      for (std::size_t j = 0; j < v.size(); ++j) below += (v[j] < v[i] || (v[j] == v[i] && j < i));
      if (below == rank) return v[i];
    }
    return 0.0;
  };
  double acc = 0;
  for (std::size_t r = 0; r < a.size(); ++r) acc += std::abs(order_stat(a, r) - order_stat(b, r));
  return acc / double(a.size());
}

double naive_swd(const Cloud& x, const Cloud& y, int directions, Rng rng) {
  double acc = 0;
  for (int p = 0; p < directions; ++p) {
    std::vector<double> dir(std::size_t(x.cols()));
    double norm = 0;
    for (auto& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    std::vector<double> px(std::size_t(x.rows())), py(std::size_t(y.rows()));
    for (int i = 0; i < x.rows(); ++i) {
      for (int c = 0; c < x.cols(); ++c) {
        px[std::size_t(i)] += x(i, c) * dir[std::size_t(c)] / norm;
        py[std::size_t(i)] += y(i, c) * dir[std::size_t(c)] / norm;
      }
    }
    acc += naive_w1(px, py);
  }
  return acc / directions;
}

struct Moments {
  std::vector<double> mean, sd;
};

Moments naive_moments(const Cloud& x) {
  Moments m{std::vector<double>(std::size_t(x.cols())), std::vector<double>(std::size_t(x.cols()))};
  for (int p = 0; p < x.cols(); ++p) {
    double s = 0;
    for (int i = 0; i < x.rows(); ++i) s += x(i, p);
    const double mu = s / double(x.rows());
    double v = 0;
    for (int i = 0; i < x.rows(); ++i) v += (x(i, p) - mu) * (x(i, p) - mu);
    m.mean[std::size_t(p)] = mu;
    m.sd[std::size_t(p)] = std::sqrt(v / double(x.rows()));
  }
  return m;
}

double naive_normalized_rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  const double n = double(a.size());
  return std::sqrt(num / n) / (std::sqrt(den / n) + metrics::kNrmseGuard);
}

double naive_ssr(const Cloud& x, const Eigen::RowVectorXd& y) {
  const Moments m = naive_moments(x);
  double var = 0, se = 0;
  for (int p = 0; p < x.cols(); ++p) {
    var += m.sd[std::size_t(p)] * m.sd[std::size_t(p)];
    se += (m.mean[std::size_t(p)] - y(p)) * (m.mean[std::size_t(p)] - y(p));
  }
  const double n = double(x.cols());
  return std::sqrt(var / n) / (std::sqrt(se / n) + 1e-8);
}

}  // namespace

TEST(EnergyDistance, IdenticalCloudsGiveZero) {
  Rng rng(1, Stream::data);
  const Cloud x = gaussian_cloud(50, 8, 0.0, rng);
  EXPECT_NEAR(metrics::energy_distance(x, x), 0.0, 1e-12);
}

TEST(EnergyDistance, Singletons) {
  Cloud x(1, 1), y(1, 1);
  x << 0.0;
  y << 1.0;
  EXPECT_DOUBLE_EQ(metrics::energy_distance(x, y), 2.0);
}

TEST(EnergyDistance, ShiftedGaussiansMatchClosedForm) {
  Rng rng(2, Stream::data);
  const Cloud x = gaussian_cloud(2000, 1, 0.0, rng);
  const Cloud y = gaussian_cloud(2000, 1, 1.0, rng);
  // X - Y ~ N(-1, 2); X - X' ~ N(0, 2).
  const double exact = 2 * folded_mean(1.0, std::sqrt(2.0)) - 2 * folded_mean(0.0, std::sqrt(2.0));
  EXPECT_NEAR(metrics::energy_distance(x, y), exact, 0.05 * exact);
}

TEST(EnergyDistance, SymmetricAndRotationInvariant) {
  Rng rng(3, Stream::data);
  const Cloud x = gaussian_cloud(40, 6, 0.3, rng);
  const Cloud y = gaussian_cloud(30, 6, -0.2, rng);
  const double ed = metrics::energy_distance(x, y);
  EXPECT_NEAR(ed, metrics::energy_distance(y, x), 1e-12);
  Eigen::MatrixXd g(6, 6);
  for (int i = 0; i < 36; ++i) g.data()[i] = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  const Cloud xr = x * q, yr = y * q;
  EXPECT_NEAR(metrics::energy_distance(xr, yr), ed, 1e-10);
}

TEST(SlicedWasserstein, OneDimensionalReduction) {
  Rng rng(4, Stream::data);
  const Cloud x = gaussian_cloud(100, 1, 0.0, rng);
  const Cloud y = gaussian_cloud(100, 1, 0.7, rng);
  Rng proj(4, Stream::projections);
  std::vector<double> a(x.data(), x.data() + 100), b(y.data(), y.data() + 100);
  EXPECT_NEAR(metrics::sliced_wasserstein(x, y, 1, proj), metrics::wasserstein1_sorted(a, b), 1e-12);
}

TEST(SlicedWasserstein, IdenticalCloudsGiveExactZero) {
  Rng rng(5, Stream::data);
  const Cloud x = gaussian_cloud(64, 5, 0.0, rng);
  Rng proj(5, Stream::projections);
  EXPECT_EQ(metrics::sliced_wasserstein(x, x, 128, proj), 0.0);
}

TEST(SlicedWasserstein, ShiftedGaussiansMatchDenseAngularReference) {
  // In 2D the projection average is an integral over angle; a dense uniform
  // rule on the same clouds is the high-resolution reference.
  Rng rng(6, Stream::data);
  const Cloud x = gaussian_cloud(4000, 2, 0.0, rng);
  const Cloud y = gaussian_cloud(4000, 2, 1.0, rng);
  const int angles = 4000;
  double reference = 0;
  for (int i = 0; i < angles; ++i) {
    const double t = std::numbers::pi * (i + 0.5) / angles;
    const Eigen::Vector2d dir(std::cos(t), std::sin(t));
    const Eigen::VectorXd px = x * dir, py = y * dir;
    reference += metrics::wasserstein1_sorted(std::vector<double>(px.data(), px.data() + px.size()),
                                              std::vector<double>(py.data(), py.data() + py.size())) / angles;
  }
  EXPECT_NEAR(reference, 2.0 / std::numbers::pi, 0.1);
  Rng proj(6, Stream::projections);
  EXPECT_NEAR(metrics::sliced_wasserstein(x, y, 1024, proj), reference, 0.05 * reference);

  std::vector<double> runs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng p(100 + s, Stream::projections);
    runs.push_back(metrics::sliced_wasserstein(x, y, 128, p));
  }
  double mean = 0, var = 0;
  for (double r : runs) mean += r / 10;
  for (double r : runs) var += (r - mean) * (r - mean) / 10;
  EXPECT_LT(std::sqrt(var) / mean, 0.1);
}

TEST(SlicedWasserstein, DeterministicAndSymmetric) {
  Rng rng(7, Stream::data);
  const Cloud x = gaussian_cloud(32, 4, 0.0, rng);
  const Cloud y = gaussian_cloud(32, 4, 0.5, rng);
  Rng p1(9, Stream::projections), p2(9, Stream::projections), p3(9, Stream::projections);
  const double a = metrics::sliced_wasserstein(x, y, 64, p1);
  EXPECT_EQ(a, metrics::sliced_wasserstein(x, y, 64, p2));
  EXPECT_NEAR(a, metrics::sliced_wasserstein(y, x, 64, p3), 1e-12);
}

TEST(SlicedWasserstein, UnequalCloudsAreSubsampled) {
  Rng rng(8, Stream::data);
  const Cloud x = gaussian_cloud(40, 3, 0.0, rng);
  const Cloud y = gaussian_cloud(25, 3, 0.0, rng);
  Rng proj(8, Stream::projections);
  EXPECT_TRUE(std::isfinite(metrics::sliced_wasserstein(x, y, 16, proj)));
}

TEST(Nrmse, IdenticalEnsemblesGiveZero) {
  Rng rng(10, Stream::data);
  const Cloud x = gaussian_cloud(20, 16, 0.5, rng);
  EXPECT_EQ(metrics::nrmse_mean(x, x), 0.0);
  EXPECT_EQ(metrics::nrmse_spread(x, x), 0.0);
}

TEST(Nrmse, DeterministicPredictorAtTrueMean) {
  Rng rng(11, Stream::data);
  const Cloud truth = gaussian_cloud(64, 16, 2.0, rng);
  Cloud pred = truth.colwise().mean();
  EXPECT_NEAR(metrics::nrmse_mean(pred, truth), 0.0, 1e-12);
  EXPECT_NEAR(metrics::nrmse_spread(pred, truth), 1.0, 1e-12);
}

TEST(Nrmse, HandBuiltTwoPointExample) {
  Cloud pred(1, 2), truth(1, 2);
  pred << 1, 1;
  truth << 0, 2;
  EXPECT_NEAR(metrics::nrmse_mean(pred, truth), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Nrmse, ZeroSpreadTruthIsFlagged) {
  Cloud truth = Cloud::Ones(4, 3);
  Rng rng(12, Stream::data);
  const Cloud pred = gaussian_cloud(4, 3, 0.0, rng);
  EXPECT_TRUE(metrics::degenerate_truth_spread(truth));
  EXPECT_TRUE(std::isfinite(metrics::nrmse_spread(pred, truth)));
  EXPECT_FALSE(metrics::degenerate_truth_spread(pred));
}

TEST(Crps, PerfectForecastGivesZero) {
  Eigen::RowVectorXd y(3);
  y << 1, -2, 0.5;
  EXPECT_EQ(metrics::crps(y.replicate(5, 1), y), 0.0);
}

TEST(Crps, TwoMemberHandEnumeration) {
  Cloud x(2, 1);
  x << 0, 2;
  Eigen::RowVectorXd y(1);
  y << 1;
  EXPECT_DOUBLE_EQ(metrics::crps(x, y), 0.5);
}

TEST(Crps, GaussianMatchesQuadrature) {
  // CRPS = integral of (F(x) - 1{x >= y})^2 for F the N(0,1) cdf, y = 0.
  const int m = 200000;
  const double lo = -12, hi = 12, h = (hi - lo) / m;
  double exact = 0;
  for (int i = 0; i <= m; ++i) {
    const double x = lo + i * h;
    const double f = phi_cdf(x) - (x >= 0 ? 1.0 : 0.0);
    exact += (i == 0 || i == m ? 0.5 : 1.0) * f * f * h;
  }
  Rng rng(13, Stream::data);
  const Cloud x = gaussian_cloud(10000, 1, 0.0, rng);
  EXPECT_NEAR(metrics::crps(x, Eigen::RowVectorXd::Zero(1)), exact, 0.02 * exact);
}

TEST(Crps, SingleMemberIsMeanAbsoluteError) {
  Rng rng(14, Stream::data);
  const Cloud x = gaussian_cloud(1, 20, 0.0, rng);
  const Cloud y = gaussian_cloud(1, 20, 0.0, rng);
  EXPECT_NEAR(metrics::crps(x, y.row(0)), (x - y).cwiseAbs().mean(), 1e-14);
}

TEST(Ssr, ZeroSpreadEnsemble) {
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(4);
  EXPECT_EQ(metrics::ssr(Cloud::Ones(8, 4), y), 0.0);
}

TEST(Ssr, ConstructedVarianceAndError) {
  // Members m -/+ 2 (variance 4), truth m + 2 (error 2).
  Cloud x(2, 3);
  x << -2, -1, 3, 2, 3, 7;
  Eigen::RowVectorXd y(3);
  y << 2, 3, 7;
  EXPECT_NEAR(metrics::ssr(x, y), 1.0, 1e-8);
}

TEST(Ssr, CalibratedEnsembleIsNearOne) {
  // Truth and members drawn from the same law around a common center.
  Rng rng(15, Stream::data);
  const int k = 256, d = 400;
  Eigen::RowVectorXd center(d), y(d);
  for (int p = 0; p < d; ++p) {
    center(p) = 3 * rng.normal();
    y(p) = center(p) + 0.7 * rng.normal();
  }
  Cloud x(k, d);
  for (int i = 0; i < k; ++i) {
    for (int p = 0; p < d; ++p) x(i, p) = center(p) + 0.7 * rng.normal();
  }
  const double s = metrics::ssr(x, y);
  EXPECT_GT(s, 0.9);
  EXPECT_LT(s, 1.1);
}

TEST(MetricsReference, AllMetricsMatchNaiveLoops) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(20 + seed, Stream::data);
    const int k = 8 + int(rng.below(57)), d = 1 + int(rng.below(32));
    const Cloud x = gaussian_cloud(k, d, 0.3, rng);
    const Cloud y = gaussian_cloud(k, d, -0.1, rng);
    EXPECT_NEAR(metrics::energy_distance(x, y), naive_ed(x, y), 1e-10);
    Rng p1(seed, Stream::projections);
    EXPECT_NEAR(metrics::sliced_wasserstein(x, y, 16, p1), naive_swd(x, y, 16, Rng(seed, Stream::projections)), 1e-10);
    EXPECT_NEAR(metrics::crps(x, y.row(0)), naive_crps(x, y.row(0)), 1e-10);
    EXPECT_NEAR(metrics::ssr(x, y.row(0)), naive_ssr(x, y.row(0)), 1e-10);
    const Moments mx = naive_moments(x), my = naive_moments(y);
    EXPECT_NEAR(metrics::nrmse_mean(x, y), naive_normalized_rmse(mx.mean, my.mean), 1e-10);
    EXPECT_NEAR(metrics::nrmse_spread(x, y), naive_normalized_rmse(mx.sd, my.sd), 1e-10);
  }
}

TEST(MetricReport, MeanRowIsArithmeticMean) {
  metrics::MetricReport r;
  r.conditions.resize(2);
  r.conditions[0].ed = 1;
  r.conditions[1].ed = 3;
  r.conditions[0].ssr = 0.5;
  r.conditions[1].ssr = 1.5;
  EXPECT_DOUBLE_EQ(r.mean().ed, 2.0);
  EXPECT_DOUBLE_EQ(r.mean().ssr, 1.0);
  std::ostringstream os;
  r.write_csv(os);
  EXPECT_NE(os.str().find("mean"), std::string::npos);
}
