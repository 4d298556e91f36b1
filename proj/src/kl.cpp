#include "dllab/kl/kl.hpp"

#include <cmath>
#include <string>

#include "dllab/core/error.hpp"

namespace dllab::kl {

double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double weight) { return weight * u.dot(v); }

KlBasis empirical_kl(const Eigen::MatrixXd& samples, double weight) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index p = samples.cols();
  if (m < 2) throw UsageError("KL analysis needs at least two samples");
  if (!(weight > 0.0)) throw UsageError("quadrature weight must be positive");
  KlBasis out;
  out.weight = weight;
  out.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
  const Eigen::MatrixXd gram = (weight / static_cast<double>(m)) * (centered * centered.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::Index count = std::min(m, p);
  out.eigenvalues = Eigen::VectorXd::Zero(count);
  out.fields = Eigen::MatrixXd::Zero(p, count);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double floor = 1e-12 * top;
  Eigen::Index filled = 0;
  for (Eigen::Index k = m - 1; k >= 0 && filled < count; --k) {
    const double lam = eig.eigenvalues()(k);
    if (!(lam > floor) || top == 0.0) break;
    Eigen::VectorXd e = centered.transpose() * eig.eigenvectors().col(k);
    e /= std::sqrt(inner(e, e, weight));
    out.eigenvalues(filled) = lam;
    out.fields.col(filled) = e;
    ++filled;
  }
  // Complete with unit directions orthogonalized against what we have.
  for (Eigen::Index j = 0; j < p && filled < count; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(p, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < filled; ++k) e -= inner(out.fields.col(k), e, weight) * out.fields.col(k);
    }
    const double norm = std::sqrt(inner(e, e, weight));
    if (norm < 1e-6 / std::sqrt(weight)) continue;
    out.fields.col(filled++) = e / norm;
  }
  return out;
}

Eigen::VectorXd projection_coefficients(const Eigen::VectorXd& u, const Eigen::MatrixXd& basis, double weight) {
  if (basis.rows() != u.size()) throw UsageError("basis and field sizes differ");
  if (basis.cols() == 0) return Eigen::VectorXd();
  const Eigen::MatrixXd g = weight * basis.transpose() * basis;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e8) {
    throw NumericsError("ill-conditioned basis: Gram condition number " + std::to_string(lo > 0.0 ? hi / lo : INFINITY));
  }
  const Eigen::VectorXd b = weight * basis.transpose() * u;
  return g.ldlt().solve(b);
}

Eigen::VectorXd project(const Eigen::VectorXd& u, const Eigen::MatrixXd& basis, double weight) {
  if (basis.cols() == 0) return Eigen::VectorXd::Zero(u.size());
  return basis * projection_coefficients(u, basis, weight);
}

double optimal_rank_r_error(const KlBasis& basis, std::size_t r) {
  const auto count = static_cast<std::size_t>(basis.eigenvalues.size());
  if (r > count) throw UsageError("rank exceeds the number of KL modes");
  double tail = 0.0;
  for (std::size_t k = r; k < count; ++k) tail += basis.eigenvalues(static_cast<Eigen::Index>(k));
  return tail;
}

double centered_residual(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& basis, double weight) {
  const Eigen::VectorXd mean = samples.colwise().mean().transpose();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Eigen::VectorXd x = samples.row(i).transpose() - mean;
    const Eigen::VectorXd res = x - project(x, basis, weight);
    acc += inner(res, res, weight);
  }
  return acc / static_cast<double>(samples.rows());
}

}  // namespace dllab::kl
