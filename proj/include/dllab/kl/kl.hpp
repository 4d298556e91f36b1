#pragma once

#include <Eigen/Dense>

namespace dllab::kl {

/// Snapshot-method Karhunen-Loeve basis of a conditional ensemble.
/// Inner product is uniform quadrature: <u, v> = weight * sum u_i v_i.
struct KlBasis {
  Eigen::VectorXd mean;         // P
  Eigen::VectorXd eigenvalues;  // nonincreasing, >= 0
  Eigen::MatrixXd fields;       // P x count, orthonormal under the weighted inner product
  double weight = 1.0;
};

double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double weight);

/// samples: M x P, one flattened field per row. Covariance uses 1/M.
/// A zero-variance ensemble yields zero eigenvalues and an arbitrary
/// orthonormal basis.
KlBasis empirical_kl(const Eigen::MatrixXd& samples, double weight);

/// Gram-system coefficients xi = G^-1 b of the weighted orthogonal projection
/// of u onto span of the columns of basis. Throws NumericsError when
/// cond(G) >= 1e8.
Eigen::VectorXd projection_coefficients(const Eigen::VectorXd& u, const Eigen::MatrixXd& basis, double weight);

Eigen::VectorXd project(const Eigen::VectorXd& u, const Eigen::MatrixXd& basis, double weight);

/// Tail sum of eigenvalues beyond rank r.
double optimal_rank_r_error(const KlBasis& basis, std::size_t r);

/// Mean squared weighted norm of the centered samples' residual after
/// projection onto span(basis); equals optimal_rank_r_error for the leading
/// r KL fields.
double centered_residual(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& basis, double weight);

}  // namespace dllab::kl
