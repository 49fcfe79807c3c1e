#pragma once

#include <Eigen/Core>

namespace nysgm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Points are stored as rows of an n x d matrix. A row view into such a
/// matrix (or a standalone RowVectorXd) binds to PointRef without copying.
using PointRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

}  // namespace nysgm
