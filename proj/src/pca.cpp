#include "cpd/pca.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

namespace {

constexpr double kRankTolerance = 1e-10;

}  // namespace

PcaModel pca_fit(const Matrix& sample, std::size_t target_dim) {
  const auto rows = static_cast<std::size_t>(sample.rows());
  const auto dim = static_cast<std::size_t>(sample.cols());
  if (target_dim == 0) fail(Errc::input, "PCA target dimension must be >= 1");
  if (target_dim > dim)
    fail(Errc::input, "PCA target dimension " + std::to_string(target_dim) +
                          " exceeds input dimension " + std::to_string(dim));
  if (rows == 0) fail(Errc::input, "PCA needs at least one sample");

  PcaModel model;
  model.mean = sample.colwise().mean().transpose();
  const Matrix centered = sample.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(rows);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) fail(Errc::numeric, "PCA eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double top = values(values.size() - 1);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (top > 0.0 && values(i) > kRankTolerance * top) ++rank;
  }
  if (rank < target_dim)
    fail(Errc::rank_deficient, "sample rank " + std::to_string(rank) +
                                   " is below the requested PCA dimension " +
                                   std::to_string(target_dim) + "; achievable rank is " +
                                   std::to_string(rank));

  model.basis.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(target_dim));
  model.eigenvalues.resize(static_cast<Eigen::Index>(target_dim));
  for (std::size_t c = 0; c < target_dim; ++c) {
    const Eigen::Index src = static_cast<Eigen::Index>(dim - 1 - c);
    Eigen::VectorXd column = solver.eigenvectors().col(src);
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < column.size(); ++i) {
      if (std::abs(column(i)) > std::abs(column(peak))) peak = i;
    }
    if (column(peak) < 0.0) column = -column;
    model.basis.col(static_cast<Eigen::Index>(c)) = column;
    model.eigenvalues(static_cast<Eigen::Index>(c)) = values(src);
  }
  return model;
}

Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim())
    fail(Errc::structural, "PCA input has dimension " + std::to_string(x.size()) +
                               ", model expects " + std::to_string(model.input_dim()));
  return model.basis.transpose() * (x - model.mean);
}

Matrix pca_transform(const PcaModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_dim())
    fail(Errc::structural, "PCA input has dimension " + std::to_string(rows.cols()) +
                               ", model expects " + std::to_string(model.input_dim()));
  return (rows.rowwise() - model.mean.transpose()) * model.basis;
}

}  // namespace cpd
