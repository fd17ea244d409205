#pragma once

#include <cstddef>

#include "cpd/matrix.hpp"

namespace cpd {

struct PcaModel {
  Vector mean;         // input dimension N
  Matrix basis;        // N x D, orthonormal columns
  Vector eigenvalues;  // D, descending

  std::size_t input_dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(basis.cols()); }
};

// Eigendecomposition of the (1/M) sample covariance. Each basis column is
// signed so its largest-magnitude entry is positive. Throws
// Errc::rank_deficient when the sample spans fewer than target_dim directions.
PcaModel pca_fit(const Matrix& sample, std::size_t target_dim);

Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& x);
Matrix pca_transform(const PcaModel& model, const Matrix& rows);

}  // namespace cpd
