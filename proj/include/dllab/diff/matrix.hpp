#pragma once

#include <Eigen/Dense>

namespace dllab::diff {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class S>
using RowBlock = Eigen::Block<Matrix<S>, Eigen::Dynamic, Eigen::Dynamic, false>;

}  // namespace dllab::diff
