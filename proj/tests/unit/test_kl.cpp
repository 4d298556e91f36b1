#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dllab/core/error.hpp"
#include "dllab/core/rng.hpp"
#include "dllab/kl/kl.hpp"

using namespace dllab;
using namespace dllab::kl;

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Orthonormal columns under the weighted inner product.
Eigen::MatrixXd orthonormal(Eigen::MatrixXd a, double weight) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols())) / std::sqrt(weight);
}

}  // namespace

TEST(Kl, TwoOppositeSamples) {
  const double w = 0.25;
  Eigen::VectorXd v(4);
  v << 1, -2, 0.5, 3;
  Eigen::MatrixXd s(2, 4);
  s.row(0) = v.transpose();
  s.row(1) = -v.transpose();
  const auto kl = empirical_kl(s, w);
  EXPECT_NEAR(kl.eigenvalues(0), inner(v, v, w), 1e-12);
  EXPECT_NEAR(kl.eigenvalues(1), 0.0, 1e-12);
  const Eigen::VectorXd e = v / std::sqrt(inner(v, v, w));
  EXPECT_NEAR(std::abs(inner(kl.fields.col(0), e, w)), 1.0, 1e-12);
  EXPECT_NEAR(kl.mean.norm(), 0.0, 1e-15);
}

TEST(Kl, IdenticalSamplesHaveZeroSpectrum) {
  Eigen::MatrixXd s(5, 3);
  for (int i = 0; i < 5; ++i) s.row(i) << 1.0, 2.0, -1.0;
  const auto kl = empirical_kl(s, 1.0);
  EXPECT_NEAR((kl.mean - s.row(0).transpose()).norm(), 0.0, 1e-15);
  for (Eigen::Index k = 0; k < kl.eigenvalues.size(); ++k) EXPECT_EQ(kl.eigenvalues(k), 0.0);
  const Eigen::MatrixXd g = kl.fields.transpose() * kl.fields;
  EXPECT_NEAR((g - Eigen::MatrixXd::Identity(3, 3)).norm(), 0.0, 1e-10);
}

TEST(Kl, RecoversSyntheticSpectrum) {
  const Eigen::Index p = 64, m = 2000;
  const double w = 1.0 / p;
  Rng rng(11, Stream::data);
  const Eigen::MatrixXd e = orthonormal(gaussian_matrix(p, 3, rng), w);
  const Eigen::VectorXd lam = (Eigen::VectorXd(3) << 4.0, 1.0, 0.25).finished();
  Eigen::VectorXd mu(p);
  for (Eigen::Index i = 0; i < p; ++i) mu(i) = std::sin(2 * std::numbers::pi * i / p);
  Eigen::MatrixXd s(m, p);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd u = mu;
    for (int k = 0; k < 3; ++k) u += std::sqrt(lam(k)) * rng.normal() * e.col(k);
    s.row(i) = u.transpose();
  }
  const auto kl = empirical_kl(s, w);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(kl.eigenvalues(k) / lam(k), 1.0, 0.1) << k;
  // Principal angles between recovered and true subspaces.
  const Eigen::MatrixXd cross = w * kl.fields.leftCols(3).transpose() * e;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  const double max_angle = std::acos(std::min(1.0, svd.singularValues().minCoeff())) * 180 / std::numbers::pi;
  EXPECT_LT(max_angle, 10.0);
  // orthonormality, ordering, trace identity
  const Eigen::MatrixXd g = w * kl.fields.transpose() * kl.fields;
  EXPECT_NEAR((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  for (Eigen::Index k = 1; k < kl.eigenvalues.size(); ++k) EXPECT_LE(kl.eigenvalues(k), kl.eigenvalues(k - 1));
  double trace = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd x = s.row(i).transpose() - kl.mean;
    trace += inner(x, x, w) / m;
  }
  EXPECT_NEAR(kl.eigenvalues.sum() / trace, 1.0, 1e-8);
}

TEST(Projection, IdempotentOnSubspace) {
  Rng rng(1, Stream::data);
  const Eigen::MatrixXd s = gaussian_matrix(10, 3, rng);
  const Eigen::VectorXd u = s * Eigen::Vector3d(0.3, -1.0, 2.0);
  EXPECT_LT((project(u, s, 0.1) - u).norm(), 1e-10);
}

TEST(Projection, PythagorasWithOrthonormalBasis) {
  Rng rng(2, Stream::data);
  const double w = 0.5;
  const Eigen::MatrixXd s = orthonormal(gaussian_matrix(12, 4, rng), w);
  const Eigen::VectorXd u = gaussian_matrix(12, 1, rng);
  const Eigen::VectorXd pu = project(u, s, w);
  EXPECT_NEAR(inner(u, u, w), inner(pu, pu, w) + inner(u - pu, u - pu, w), 1e-10);
}

TEST(Projection, HandComputedNonOrthogonalBasis) {
  // S1 = (1,0,0), S2 = (1,1,0), u = (1,2,3): G = [[1,1],[1,2]], b = (1,3),
  // xi = G^-1 b = (-1, 2), Pu = (1,2,0).
  Eigen::MatrixXd s(3, 2);
  s << 1, 1, 0, 1, 0, 0;
  const Eigen::Vector3d u(1, 2, 3);
  const Eigen::VectorXd xi = projection_coefficients(u, s, 1.0);
  EXPECT_NEAR(xi(0), -1.0, 1e-12);
  EXPECT_NEAR(xi(1), 2.0, 1e-12);
  const Eigen::VectorXd pu = project(u, s, 1.0);
  EXPECT_NEAR((pu - Eigen::Vector3d(1, 2, 0)).norm(), 0.0, 1e-12);
}

TEST(Projection, SelfAdjoint) {
  Rng rng(3, Stream::data);
  const Eigen::MatrixXd s = gaussian_matrix(16, 5, rng);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd u = gaussian_matrix(16, 1, rng), v = gaussian_matrix(16, 1, rng);
    EXPECT_NEAR(inner(project(u, s, 0.3), v, 0.3), inner(u, project(v, s, 0.3), 0.3), 1e-10);
  }
}

TEST(Projection, IllConditionedBasisRejected) {
  Eigen::MatrixXd s(3, 2);
  s << 1, 1, 0, 1e-9, 0, 0;
  EXPECT_THROW(projection_coefficients(Eigen::Vector3d(1, 1, 1), s, 1.0), NumericsError);
}

TEST(OptimalRank, Endpoints) {
  Rng rng(4, Stream::data);
  const Eigen::MatrixXd s = gaussian_matrix(8, 5, rng);
  const auto kl = empirical_kl(s, 1.0);
  EXPECT_EQ(optimal_rank_r_error(kl, 5), 0.0);
  EXPECT_NEAR(optimal_rank_r_error(kl, 0), kl.eigenvalues.sum(), 1e-14);
  EXPECT_THROW(optimal_rank_r_error(kl, 6), UsageError);
}

TEST(OptimalRank, NoSubspaceBeatsKlTruncation) {
  const Eigen::Index p = 6, m = 300;
  Rng rng(5, Stream::data);
  const Eigen::MatrixXd basis6 = orthonormal(gaussian_matrix(p, p, rng), 1.0);
  Eigen::MatrixXd s(m, p);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(p, 0.7);
    for (Eigen::Index k = 0; k < p; ++k) u += std::pow(0.6, static_cast<double>(k)) * rng.normal() * basis6.col(k);
    s.row(i) = u.transpose();
  }
  const auto kl = empirical_kl(s, 1.0);
  for (std::size_t r = 1; r < static_cast<std::size_t>(p); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    const double best = optimal_rank_r_error(kl, r);
    EXPECT_NEAR(centered_residual(s, kl.fields.leftCols(ri), 1.0), best, 1e-9);
    // every r-subset of the KL eigenbasis
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != r) continue;
      Eigen::MatrixXd sub(p, ri);
      Eigen::Index c = 0;
      for (Eigen::Index k = 0; k < p; ++k) {
        if (mask & (1u << k)) sub.col(c++) = kl.fields.col(k);
      }
      EXPECT_GE(centered_residual(s, sub, 1.0) - best, -1e-9);
    }
    for (int t = 0; t < 500; ++t) {
      const Eigen::MatrixXd sub = gaussian_matrix(p, ri, rng);
      EXPECT_GE(centered_residual(s, sub, 1.0) - best, -1e-9);
    }
  }
}
