#include <gtest/gtest.h>

#include <cmath>

#include "dllab/kl/kl.hpp"
#include "dllab/model/dll.hpp"
#include "dllab/model/encoder.hpp"
#include "dllab/model/flow.hpp"
#include "gradcheck.hpp"

using namespace dllab;
using namespace dllab::model;
using dllab::testing::fill_normal;
using dllab::testing::gradient_error;

namespace {

EncoderConfig tiny_encoder() {
  EncoderConfig c;
  c.dim = 1;
  c.rank = 4;
  c.width = 6;
  c.modes = 4;
  c.layers = 2;
  c.projection = 8;
  c.nf_features = 5;
  return c;
}

DllConfig tiny_dll() {
  DllConfig c;
  c.dim = 1;
  c.rank = 3;
  c.cond_width = 5;
  c.cond_modes = 3;
  c.cond_layers = 1;
  c.cond_projection = 6;
  c.cond_features = 4;
  c.cond_dim = 4;
  c.hidden = 7;
  c.hidden_layers = 2;
  c.time_dim = 4;
  c.draws = 2;
  return c;
}

FieldMatrix random_fields(int rows, int points, Rng& rng) {
  FieldMatrix m(rows, points);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST(Reconstruct, UnitCoefficientSelectsBasisField) {
  const std::vector<std::vector<double>> phi{{1, 2, 3}, {-1, 0.5, 4}};
  const std::vector<double> e1{0, 1};
  EXPECT_EQ(reconstruct(e1, phi), phi[1]);
  const std::vector<double> zero{0, 0};
  for (double v : reconstruct(zero, phi)) EXPECT_EQ(v, 0.0);
}

TEST(Reconstruct, Homogeneous) {
  Rng rng(1, Stream::data);
  std::vector<std::vector<double>> phi(5, std::vector<double>(20));
  for (auto& f : phi) {
    for (auto& v : f) v = rng.normal();
  }
  std::vector<double> xi(5), xi2(5);
  for (int k = 0; k < 5; ++k) {
    xi[std::size_t(k)] = rng.normal();
    xi2[std::size_t(k)] = 2 * xi[std::size_t(k)];
  }
  const auto a = reconstruct(xi, phi), b = reconstruct(xi2, phi);
  for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(b[p], 2 * a[p], 1e-12);
}

TEST(Reconstruct, MismatchIsUsageError) {
  const std::vector<std::vector<double>> phi{{1, 2}, {3, 4}};
  const std::vector<double> xi{1};
  EXPECT_THROW(reconstruct(xi, phi), UsageError);
}

TEST(EncoderLoss, GramProjectionMatchesKlResidual) {
  const std::vector<int> grid{16};
  OperatorEncoder<double> enc(tiny_encoder(), grid);
  Rng rng(2, Stream::init);
  enc.init(rng);
  Rng data(2, Stream::data);
  const FieldMatrix a = random_fields(3, 16, data), u = random_fields(3, 16, data);
  double expected = 0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd phi = enc.basis_matrix(std::span<const double>(a.row(i).data(), 16), grid);
    const Eigen::VectorXd target = u.row(i).transpose();
    const Eigen::VectorXd res = target - kl::project(target, phi, 1.0 / 16);
    expected += res.squaredNorm() / 16 / 3;
  }
  EXPECT_NEAR(enc.evaluate(a, u, grid, true), expected, 1e-10);
}

TEST(EncoderLoss, ExactlyReconstructableTargetHasZeroLoss) {
  const std::vector<int> grid{16};
  OperatorEncoder<double> enc(tiny_encoder(), grid);
  Rng rng(3, Stream::init);
  enc.init(rng);
  Rng data(3, Stream::data);
  const FieldMatrix a = random_fields(2, 16, data);
  FieldMatrix u(2, 16);
  for (int i = 0; i < 2; ++i) {
    const Eigen::MatrixXd phi = enc.basis_matrix(std::span<const double>(a.row(i).data(), 16), grid);
    Eigen::VectorXd xi(4);
    for (int k = 0; k < 4; ++k) xi(k) = data.normal();
    u.row(i) = (phi * xi).transpose();
  }
  EXPECT_LT(enc.evaluate(a, u, grid, true), 1e-20);
}

TEST(EncoderLoss, ZeroTargetGivesNormOfReconstruction) {
  const std::vector<int> grid{16};
  OperatorEncoder<double> enc(tiny_encoder(), grid);
  Rng rng(4, Stream::init);
  enc.init(rng);
  Rng data(4, Stream::data);
  const FieldMatrix a = random_fields(2, 16, data);
  const FieldMatrix u = FieldMatrix::Zero(2, 16);
  Tape<double> tape;
  const std::vector<std::size_t> idx{0, 1};
  const auto loss = enc.loss(tape, gather_fields<double>(a, idx), gather_fields<double>(u, idx), 2, grid);
  const Eigen::MatrixXd xi = tape.value(enc.coefficients(tape, tape.constant(gather_fields<double>(u, idx)), 2, grid));
  double expected = 0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::MatrixXd phi = enc.basis_matrix(std::span<const double>(a.row(i).data(), 16), grid);
    expected += (phi * xi.row(i).transpose()).squaredNorm() / 16 / 2;
  }
  EXPECT_GE(tape.value(loss)(0, 0), 0.0);
  EXPECT_NEAR(tape.value(loss)(0, 0), expected, 1e-12);
}

TEST(EncoderLoss, GradientMatchesFiniteDifferences) {
  const std::vector<int> grid{12};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    OperatorEncoder<double> enc(tiny_encoder(), grid);
    Rng rng(seed, Stream::init);
    enc.init(rng);
    Rng data(seed, Stream::data);
    const FieldMatrix a = random_fields(2, 12, data), u = random_fields(2, 12, data);
    const std::vector<std::size_t> idx{0, 1};
    const auto am = gather_fields<double>(a, idx), um = gather_fields<double>(u, idx);
    const double err = gradient_error(enc.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
      return enc.loss(t, am, um, 2, grid);
    });
    EXPECT_LT(err, 1e-6) << "seed " << seed;
  }
}

TEST(DllHead, GradientMatchesFiniteDifferences) {
  const std::vector<int> grid{12};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    DllHead<double> head(tiny_dll(), grid);
    Rng rng(seed, Stream::init);
    head.init(rng);
    Rng data(seed, Stream::data);
    const FieldMatrix a = random_fields(2, 12, data);
    const Eigen::MatrixXd z = random_fields(2, 3, data);
    const auto am = gather_fields<double>(a, {0, 1});
    const double err = gradient_error(head.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
      Rng noise(seed, Stream::noise);
      return head.loss(t, am, z, 2, noise, grid);
    });
    EXPECT_LT(err, 1e-6) << "seed " << seed;
  }
}

TEST(FnoBaseline, GradientMatchesFiniteDifferences) {
  const std::vector<int> grid{4, 4};
  nn::FnoConfig fc;
  fc.dim = 2;
  fc.width = 3;
  fc.modes = 2;
  fc.layers = 2;
  fc.projection = 4;
  FnoBaseline<double> fno(fc, grid);
  Rng rng(5, Stream::init);
  fno.init(rng);
  Rng data(5, Stream::data);
  const FieldMatrix a = random_fields(2, 16, data), u = random_fields(2, 16, data);
  const auto am = gather_fields<double>(a, {0, 1}), um = gather_fields<double>(u, {0, 1});
  const double err = gradient_error(fno.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
    return fno.loss(t, am, um, 2, grid);
  });
  EXPECT_LT(err, 1e-6);
}

TEST(Schedule, Endpoints) {
  Eigen::VectorXd x(2), eps(2);
  x << 2, 0;
  eps << 0, 2;
  EXPECT_EQ(noise_sample(x, eps, 0.0), x);
  EXPECT_EQ(noise_sample(x, eps, 1.0), eps);
  EXPECT_EQ(noise_sample(x, eps, 0.5), Eigen::Vector2d(1, 1));
  EXPECT_THROW(noise_sample(x, eps, 1.5), UsageError);
}

TEST(OracleVelocity, Arithmetic) {
  Eigen::VectorXd x(2), eps(2);
  x << 1, 0;
  eps << 0, 1;
  EXPECT_EQ(oracle_velocity(x, eps), Eigen::Vector2d(-1, 1));
  EXPECT_EQ(oracle_velocity(x, x), Eigen::Vector2d::Zero());
}

TEST(OracleVelocity, EulerWithExactPairingReachesData) {
  Rng rng(6, Stream::noise);
  Eigen::MatrixXd x(3, 4), eps(3, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = 3 * rng.normal();
    eps.data()[i] = rng.normal();
  }
  const Eigen::MatrixXd out = euler_sample(eps, 10, [&](const Eigen::MatrixXd&, double) -> Eigen::MatrixXd { return eps - x; });
  EXPECT_LT((out - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(VelocityLoss, ZeroPredictorMatchesGaussianMoments) {
  Eigen::MatrixXd x(1, 4);
  x << 1, -2, 0.5, 3;
  const int n = 100000;
  Rng rng(7, Stream::noise);
  const double loss = velocity_loss(x, n, rng, [](const Eigen::MatrixXd& xt, const std::vector<double>&, const Eigen::MatrixXd&) {
    return Eigen::MatrixXd::Zero(xt.rows(), xt.cols());
  });
  const double mean = 4 + x.squaredNorm();
  // Var ||eps - x||^2 = sum_i (2 + 4 x_i^2).
  const double se = std::sqrt((4 * 2 + 4 * x.squaredNorm()) / n);
  EXPECT_NEAR(loss, mean, 3 * se);
}

TEST(VelocityLoss, ExactOracleGivesZero) {
  Eigen::MatrixXd x(1, 3);
  x << 0.3, -1, 2;
  Rng rng(8, Stream::noise);
  const double loss = velocity_loss(x, 500, rng, [&](const Eigen::MatrixXd&, const std::vector<double>&, const Eigen::MatrixXd& eps) {
    return Eigen::MatrixXd(eps.rowwise() - x.row(0));
  });
  EXPECT_EQ(loss, 0.0);
}

TEST(Sampler, LinearHookHasClosedFormEulerProduct) {
  Eigen::MatrixXd x1(2, 2);
  x1 << 1, -2, 0.5, 4;
  // x <- x - h v with v = x contracts by (1 - 1/10) per step.
  const Eigen::MatrixXd out = euler_sample(x1, 10, [](const Eigen::MatrixXd& x, double) { return x; });
  EXPECT_LT((out - std::pow(0.9, 10) * x1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(std::pow(0.9, 10), 0.3487, 1e-4);
  const Eigen::MatrixXd grow = euler_sample(x1, 10, [](const Eigen::MatrixXd& x, double) -> Eigen::MatrixXd { return -x; });
  EXPECT_LT((grow - std::pow(1.1, 10) * x1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sampler, NonFiniteStateNamesStep) {
  Eigen::MatrixXd x1 = Eigen::MatrixXd::Ones(1, 1);
  try {
    euler_sample(x1, 10, [](const Eigen::MatrixXd& x, double tau) -> Eigen::MatrixXd {
      return tau < 0.75 ? Eigen::MatrixXd::Constant(x.rows(), x.cols(), NAN) : x;
    });
    FAIL();
  } catch (const NumericsError& e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(Sampler, GaussianTargetRecovered) {
  const GaussianFlow target{3.0, 0.5};
  const int k = 10000;
  Rng rng(9, Stream::noise);
  Eigen::MatrixXd x1(k, 1);
  for (int i = 0; i < k; ++i) x1(i, 0) = rng.normal();
  const Eigen::MatrixXd out = euler_sample(x1, 100, [&](const Eigen::MatrixXd& x, double tau) {
    Eigen::MatrixXd v(x.rows(), 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) v(i, 0) = target.velocity(x(i, 0), tau);
    return v;
  });
  const double mean = out.mean();
  const double sd = std::sqrt((out.array() - mean).square().mean());
  EXPECT_NEAR(mean, 3.0, 0.05);
  EXPECT_NEAR(sd, 0.5, 0.05);
}

TEST(Sampler, GaussianVelocityMatchesConditionalExpectation) {
  // E[eps - x | x_tau] by Monte Carlo binning at tau = 0.4.
  const GaussianFlow g{1.0, 0.7};
  const double tau = 0.4, probe = 0.8, width = 0.02;
  Rng rng(10, Stream::noise);
  double acc = 0;
  int hits = 0;
  for (int i = 0; i < 2000000; ++i) {
    const double x = g.mu + g.sigma * rng.normal(), eps = rng.normal();
    const double xt = (1 - tau) * x + tau * eps;
    if (std::abs(xt - probe) < width) {
      acc += eps - x;
      ++hits;
    }
  }
  EXPECT_NEAR(acc / hits, g.velocity(probe, tau), 0.03);
}

TEST(StabilityProbe, MonotoneAndRootLossScaling) {
  const auto pts = wasserstein_stability_probe({3.0, 0.5}, {0.0, 0.05, 0.1, 0.2}, 10000, 100, 11);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_LT(pts[0].w2, 0.02);
  EXPECT_LT(pts[0].velocity_loss, 1e-10);
  double lo = 1e300, hi = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].w2, pts[i - 1].w2);
    const double ratio = pts[i].w2 / std::sqrt(pts[i].velocity_loss);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT(hi / lo, 10.0);
}

TEST(LatentScaling, RoundTripAndStandardization) {
  Rng rng(12, Stream::data);
  FieldMatrix xi(50, 3);
  for (int i = 0; i < 50; ++i) xi.row(i) << 5 + 2 * rng.normal(), -1 + 0.1 * rng.normal(), 3.0;
  const LatentScaling s = LatentScaling::fit(xi);
  const Eigen::MatrixXd z = s.standardize(xi);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(z.col(1).squaredNorm() / 50), 1.0, 1e-12);
  EXPECT_TRUE(z.allFinite());
  EXPECT_LT((s.restore(z) - Eigen::MatrixXd(xi)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SampleFields, DeterministicAndMemberIndexed) {
  const std::vector<int> grid{16};
  OperatorEncoder<double> enc(tiny_encoder(), grid);
  DllConfig dc = tiny_dll();
  dc.rank = 4;
  DllHead<double> head(dc, grid);
  Rng init(13, Stream::init);
  enc.init(init);
  head.init(init);
  Rng data(13, Stream::data);
  const FieldMatrix a = random_fields(1, 16, data);
  const auto scaling = LatentScaling::identity(4);
  const std::span<const double> a0(a.data(), 16);
  const Rng s1(21, Stream::noise), s2(22, Stream::noise);
  const FieldMatrix e1 = sample_fields(enc, head, scaling, a0, grid, 6, 10, s1);
  const FieldMatrix e2 = sample_fields(enc, head, scaling, a0, grid, 6, 10, s1);
  EXPECT_TRUE((e1.array() == e2.array()).all());
  const FieldMatrix e3 = sample_fields(enc, head, scaling, a0, grid, 6, 10, s2);
  EXPECT_GT((e1 - e3).cwiseAbs().maxCoeff(), 0.0);
  // Member 4 drawn alone matches member 4 of the full ensemble.
  const FieldMatrix one = sample_fields(enc, head, scaling, a0, grid, 1, 10, s1, 4);
  EXPECT_LT((one.row(0) - e1.row(4)).cwiseAbs().maxCoeff(), 1e-12);
}
