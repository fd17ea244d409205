#include <algorithm>
#include <cmath>

#include "cpd/error.hpp"
#include "cpd/gmm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpd;

namespace {

Matrix two_clouds(Rng& rng, Eigen::Index per, const Vector& a, const Vector& b, double sd) {
  Matrix x(2 * per, a.size());
  for (Eigen::Index i = 0; i < 2 * per; ++i) {
    const Vector& c = i < per ? a : b;
    for (Eigen::Index d = 0; d < a.size(); ++d) x(i, d) = c(d) + sd * rng.normal();
  }
  return x;
}

}  // namespace

TEST_CASE("two separated clouds are recovered") {
  Rng rng(31);
  Vector a(3), b(3);
  a << 0.0, 0.0, 0.0;
  b << 6.0, -4.0, 5.0;
  const Matrix x = two_clouds(rng, 400, a, b, 0.5);
  const GmmFit fit = gmm_fit(x, 2, 9);
  const GmmModel& g = fit.model;
  const Eigen::Index ia = (g.means.row(0).transpose() - a).norm() < (g.means.row(1).transpose() - a).norm() ? 0 : 1;
  CHECK((g.means.row(ia).transpose() - a).cwiseAbs().maxCoeff() < 0.1);
  CHECK((g.means.row(1 - ia).transpose() - b).cwiseAbs().maxCoeff() < 0.1);
  CHECK(std::abs(g.weights(0) - 0.5) < 0.05);
  CHECK(std::abs(g.weights.sum() - 1.0) < 1e-9);
}

TEST_CASE("one component is the sample mean and variance") {
  Rng rng(4);
  Matrix x(50, 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index d = 0; d < 4; ++d) x(i, d) = rng.normal(double(d), 1.0 + double(d));
  const GmmModel g = gmm_fit(x, 1, 2).model;
  const Vector mean = x.colwise().mean().transpose();
  const Vector var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  CHECK(g.weights(0) == 1.0);
  CHECK((g.means.row(0).transpose() - mean).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((g.variances.row(0).transpose() - var).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("EM log-likelihood never decreases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Matrix x(120, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index d = 0; d < 3; ++d) x(i, d) = rng.normal() + (i % 3 == 0 ? 3.0 : 0.0);
    const GmmFit fit = gmm_fit(x, 4, seed + 100);
    const auto& ll = fit.log_likelihood;
    REQUIRE(ll.size() >= 2);
    for (std::size_t k = 1; k < ll.size(); ++k)
      CHECK(ll[k] >= ll[k - 1] - 1e-12 * std::abs(ll[k - 1]));
    CHECK((fit.model.variances.array() > 0.0).all());
  }
}

TEST_CASE("variance floor holds for a degenerate dimension") {
  Rng rng(6);
  Matrix x(60, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = 3.0;
  }
  const GmmModel g = gmm_fit(x, 3, 1).model;
  CHECK((g.variances.col(1).array() >= 1e-12).all());
  CHECK(std::isfinite(gmm_mean_log_likelihood(g, x)));
}

TEST_CASE("Fisher vector structure") {
  GmmModel g;
  g.weights = Vector::Constant(2, 0.5);
  g.means.resize(2, 2);
  g.means << 0.0, 0.0, 40.0, 40.0;
  g.variances = Matrix::Ones(2, 2);

  Matrix at_mean(1, 2);
  at_mean << 0.0, 0.0;
  const Vector fv = fisher_encode(g, at_mean);
  CHECK(fv.size() == 8);
  CHECK(fv.segment(0, 2).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(fv.segment(4, 2).cwiseAbs().maxCoeff() <= 1e-9);

  Matrix one(1, 2);
  one << 0.3, -1.2;
  Matrix two(2, 2);
  two << 0.3, -1.2, 0.3, -1.2;
  CHECK((fisher_encode(g, two) - fisher_encode(g, one)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(fisher_encode(g, Matrix(0, 2)), Error);
  CHECK_THROWS_AS(fisher_encode(g, Matrix::Zero(2, 3)), Error);
}

TEST_CASE("Fisher blocks match finite-difference gradients") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const support::FisherCheck c = support::fisher_gradient_check(seed);
    CHECK(c.max_relative_error <= 1e-5);
    CHECK(c.duplication_error <= 1e-12);
  }
}

TEST_CASE("posteriors sum to one") {
  Rng rng(13);
  Matrix x(40, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index d = 0; d < 3; ++d) x(i, d) = rng.normal(i % 2 ? 2.0 : -2.0, 1.0);
  const GmmModel g = gmm_fit(x, 3, 5).model;
  const Matrix p = gmm_posteriors(g, x);
  for (Eigen::Index i = 0; i < p.rows(); ++i) CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-12);
}
