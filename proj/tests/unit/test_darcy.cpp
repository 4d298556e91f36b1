#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dllab/darcy/darcy.hpp"

using namespace dllab;
using namespace dllab::darcy;

namespace {

constexpr double kPi = std::numbers::pi;

Field random_source(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, Stream::data);
  Field f({n, n});
  for (auto& x : f.values()) x = rng.normal();
  return f;
}

Field random_permeability(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, Stream::data);
  return sample_permeability(n, {}, rng);
}

double max_manufactured_error(std::size_t n) {
  const double h = spacing(n);
  Field a({n, n}, 1.0), f({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      f(i, j) = 2 * kPi * kPi * std::sin(kPi * i * h) * std::sin(kPi * j * h);
    }
  }
  CgConfig cfg;
  cfg.tolerance = 1e-10;
  const auto res = solve_darcy(a, f, cfg);
  EXPECT_TRUE(res.converged);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      err = std::max(err, std::abs(res.solution(i, j) - std::sin(kPi * i * h) * std::sin(kPi * j * h)));
    }
  }
  return err;
}

}  // namespace

TEST(Permeability, TwoLevelsOnly) {
  const Field a = random_permeability(32, 1);
  for (double x : a.values()) EXPECT_TRUE(x == 12.0 || x == 3.0);
}

TEST(Permeability, SaturatesWithLargeOffset) {
  Rng rng(5, Stream::data);
  PermeabilitySpec spec;
  spec.offset = 1e6;
  const Field a = sample_permeability(16, spec, rng);
  for (double x : a.values()) EXPECT_EQ(x, 12.0);
}

TEST(Permeability, HighFractionNearHalf) {
  double frac = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Field a = random_permeability(16, 1000 + s);
    for (double x : a.values()) frac += x == 12.0 ? 1.0 : 0.0;
  }
  frac /= 200.0 * 256.0;
  EXPECT_NEAR(frac, 0.5, 0.05);
}

TEST(Permeability, Deterministic) {
  const Field a = random_permeability(16, 9), b = random_permeability(16, 9);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_THROW(random_permeability(4, 0), ConfigError);
}

TEST(Source, FrozenLognormalGivesConstant) {
  SourceSpec spec;
  spec.lambda = 1.0;
  const Field zero({8, 8});
  Rng rng(0, Stream::data);
  const Field g = sample_rbf_field(8, spec.gaussian, rng);
  const Field f = combine_source(spec, zero, g);
  for (double x : f.values()) EXPECT_DOUBLE_EQ(x, 10.0);
}

TEST(Source, GaussianPartHasZeroMean) {
  SourceSpec spec;
  spec.lambda = 0.0;
  const std::size_t n = 16;
  const int draws = 200;
  double mean = 0.0;
  for (int s = 0; s < draws; ++s) {
    Rng rng(s, Stream::data);
    const Field f = sample_source(n, spec, rng);
    for (double x : f.values()) mean += x;
  }
  mean /= draws * static_cast<double>(n * n);
  // Standard error of the grand mean from the exact covariance: about 0.53
  // at sigma=10, l=0.5, so the test allows three of them.
  const double h = spacing(n);
  double cov_mean = 0.0;
  for (std::size_t p = 0; p < n * n; ++p) {
    for (std::size_t q = 0; q < n * n; ++q) {
      const double dx = h * (static_cast<double>(p / n) - static_cast<double>(q / n));
      const double dy = h * (static_cast<double>(p % n) - static_cast<double>(q % n));
      cov_mean += std::exp(-(dx * dx + dy * dy) / (2 * 0.25));
    }
  }
  cov_mean /= static_cast<double>(n * n * n * n);
  const double se = spec.gaussian.sigma * std::sqrt(cov_mean / draws);
  EXPECT_GT(se, 0.5);
  EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(Source, IndependentSeedsUncorrelated) {
  // Pooled over 200 seed pairs: a single pair of smooth fields has only a
  // handful of effective degrees of freedom.
  const std::size_t n = 16;
  SourceSpec spec;
  double sxy = 0, sxx = 0, syy = 0, sx = 0, sy = 0, count = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng r1(2 * s, Stream::data), r2(2 * s + 1, Stream::data);
    const Field f = sample_source(n, spec, r1), g = sample_source(n, spec, r2);
    for (std::size_t i = 0; i < f.size(); ++i) {
      sx += f[i];
      sy += g[i];
      sxx += f[i] * f[i];
      syy += g[i] * g[i];
      sxy += f[i] * g[i];
      count += 1;
    }
  }
  const double cov = sxy / count - (sx / count) * (sy / count);
  const double corr = cov / std::sqrt((sxx / count - sx * sx / count / count) * (syy / count - sy * sy / count / count));
  EXPECT_LT(std::abs(corr), 0.2);
}

TEST(Source, CirculantVarianceMatchesDenseFactorization) {
  const std::size_t n = 16;
  for (double ell : {0.2, 0.5}) {
    const RbfSpec spec{10.0, ell, 1e-5};
    // Dense oracle: Cholesky of the RBF covariance on the node grid.
    const auto side = static_cast<Eigen::Index>(n);
    const auto m = side * side;
    Eigen::MatrixXd cov(m, m);
    const double h = spacing(n);
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = 0; q < m; ++q) {
        const double dx = h * static_cast<double>(p / side - q / side),
                     dy = h * static_cast<double>(p % side - q % side);
        cov(p, q) = std::exp(-(dx * dx + dy * dy) / (2 * ell * ell)) + (p == q ? spec.jitter : 0.0);
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    ASSERT_EQ(llt.info(), Eigen::Success);
    Rng dense_rng(17, Stream::data);
    double dense_var = 0.0, circ_var = 0.0;
    const int draws = 400;
    for (int d = 0; d < draws; ++d) {
      Eigen::VectorXd z(m);
      for (Eigen::Index i = 0; i < m; ++i) z(i) = dense_rng.normal();
      dense_var += (llt.matrixL() * z).squaredNorm();
      Rng rng(100 + d, Stream::data);
      const Field g = sample_rbf_field(n, spec, rng);
      for (double x : g.values()) circ_var += x * x;
    }
    dense_var /= draws * static_cast<double>(m);
    circ_var /= draws * static_cast<double>(m);
    EXPECT_NEAR(circ_var / dense_var, 1.0, 0.1) << ell;
  }
}

TEST(Darcy, ZeroSourceGivesZero) {
  const auto res = solve_darcy(random_permeability(16, 2), Field({16, 16}));
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0u);
  for (double x : res.solution.values()) EXPECT_EQ(x, 0.0);
}

TEST(Darcy, ManufacturedSolutionSecondOrder) {
  const double e1 = max_manufactured_error(9);
  const double e2 = max_manufactured_error(17);
  const double e3 = max_manufactured_error(33);
  const double s1 = std::log2(e1 / e2), s2 = std::log2(e2 / e3);
  EXPECT_NEAR(s1, 2.0, 0.2);
  EXPECT_NEAR(s2, 2.0, 0.2);
}

TEST(Darcy, MatchesDenseSolve) {
  const std::size_t n = 16;
  const Field a = random_permeability(n, 3);
  const Field f = random_source(n, 4);
  const DarcyOperator op(a);
  const auto b = op.interior(f);
  const Eigen::VectorXd exact =
      op.dense().ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  const auto res = solve_darcy(a, f);
  ASSERT_TRUE(res.converged);
  const auto got = op.interior(res.solution);
  double diff = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) diff += std::pow(got[i] - exact(static_cast<Eigen::Index>(i)), 2);
  EXPECT_LT(std::sqrt(diff) / exact.norm(), 1e-5);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(res.solution(0, i), 0.0);
    EXPECT_EQ(res.solution(n - 1, i), 0.0);
    EXPECT_EQ(res.solution(i, 0), 0.0);
    EXPECT_EQ(res.solution(i, n - 1), 0.0);
  }
}

TEST(Darcy, OperatorSymmetricPositiveDefinite) {
  const DarcyOperator op(random_permeability(16, 6));
  const std::size_t m = op.unknowns();
  std::vector<double> v(m), w(m), av(m), aw(m);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s, Stream::data);
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = rng.normal();
      w[i] = rng.normal();
    }
    op.apply(v, av);
    op.apply(w, aw);
    double vav = 0, vaw = 0, wav = 0;
    for (std::size_t i = 0; i < m; ++i) {
      vav += v[i] * av[i];
      vaw += v[i] * aw[i];
      wav += w[i] * av[i];
    }
    EXPECT_GT(vav, 0.0);
    EXPECT_LT(std::abs(vaw - wav), 1e-10 * std::max(1.0, std::abs(vaw)));
  }
}

TEST(Darcy, NonnegativeSourceGivesNonnegativeSolution) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Field f = random_source(16, 20 + s);
    for (auto& x : f.values()) x = std::abs(x);
    const auto res = solve_darcy(random_permeability(16, 30 + s), f);
    for (double x : res.solution.values()) EXPECT_GE(x, -1e-10);
  }
}

TEST(Darcy, CgEnergyErrorNonincreasing) {
  const std::size_t n = 16;
  const Field a = random_permeability(n, 3);
  const Field f = random_source(n, 4);
  const DarcyOperator op(a);
  const Eigen::MatrixXd dense = op.dense();
  const auto b = op.interior(f);
  const Eigen::VectorXd exact =
      dense.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  auto energy_error = [&](std::span<const double> x) {
    const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) - exact;
    return e.dot(dense * e);
  };
  double prev = exact.dot(dense * exact);
  std::size_t calls = 0;
  solve_darcy(a, f, {}, [&](std::size_t, std::span<const double> x) {
    const double e = energy_error(x);
    EXPECT_LE(e, prev * (1.0 + 1e-12));
    prev = e;
    ++calls;
  });
  EXPECT_GT(calls, 0u);
}

TEST(Darcy, NonConvergenceFlagged) {
  CgConfig cfg;
  cfg.max_iterations = 2;
  const auto res = solve_darcy(random_permeability(16, 3), random_source(16, 4), cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2u);
  EXPECT_GT(res.relative_residual, cfg.tolerance);
}
