#pragma once

#include <Eigen/Core>

namespace cpd {

// Samples are rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace cpd
