#include <algorithm>
#include <cmath>

#include "cpd/error.hpp"
#include "cpd/kmeans.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpd;

TEST_CASE("k = 1 centroid is the sample mean") {
  Rng rng(2);
  Matrix x(37, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index d = 0; d < 5; ++d) x(i, d) = rng.normal();
  const KmeansFit fit = kmeans_fit(x, 1, 3);
  CHECK((fit.model.centroids.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("repeated distinct points become the centroids") {
  Matrix pts(3, 2);
  pts << 0, 0, 10, 0, 0, 10;
  Matrix x(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i) x.row(i) = pts.row(i % 3);
  const KmeansFit fit = kmeans_fit(x, 3, 17);
  for (Eigen::Index p = 0; p < 3; ++p) {
    double best = 1e300;
    for (Eigen::Index c = 0; c < 3; ++c)
      best = std::min(best, (fit.model.centroids.row(c) - pts.row(p)).squaredNorm());
    CHECK(best == 0.0);
  }
  CHECK(fit.sse == 0.0);
}

TEST_CASE("two-cloud clustering matches the exhaustive partition oracle") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(4 + rng.below(9));
    Matrix x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double off = i % 2 ? 5.0 : 0.0;
      x(i, 0) = off + rng.normal(0.0, 0.6);
      x(i, 1) = off + rng.normal(0.0, 0.6);
    }
    const KmeansFit fit = kmeans_fit(x, 2, seed);
    const auto [best, best_sse] = support::best_two_partition(x);
    CHECK(support::canonical(fit.assignment) == best);
    CHECK(support::partition_sse(x, support::canonical(fit.assignment), 2) == best_sse);
    CHECK(std::abs(fit.sse - best_sse) <= 1e-12 * std::max(1.0, best_sse));
  }
}

TEST_CASE("nearest centroid ties go to the lowest index") {
  Matrix c(3, 1);
  c << 0.0, 2.0, 2.0;
  Vector x(1);
  x << 2.0;
  CHECK(nearest_centroid(c, x) == 1);
  x << 1.0;
  CHECK(nearest_centroid(c, x) == 0);
  x << 1.5;
  CHECK(nearest_centroid(c, x) == 1);
}

TEST_CASE("VLAD residual sums") {
  KmeansModel m;
  m.centroids.resize(2, 2);
  m.centroids << 0, 0, 10, 10;

  SUBCASE("descriptors on centroids give zero") {
    const Matrix x = m.centroids;
    CHECK(vlad_encode(m, x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single descriptor fills its own block") {
    Matrix x(1, 2);
    x << 9.0, 12.5;
    const Vector v = vlad_encode(m, x);
    CHECK(v(0) == 0.0);
    CHECK(v(1) == 0.0);
    CHECK(v(2) == -1.0);
    CHECK(v(3) == 2.5);
  }
  SUBCASE("seeded case against the loop oracle and the accounting identity") {
    Rng rng(9);
    KmeansModel r;
    r.centroids.resize(4, 3);
    Matrix x(25, 3);
    // Quarter-integer values keep every sum exact.
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index d = 0; d < 3; ++d) r.centroids(i, d) = double(rng.below(40)) / 4.0;
    for (Eigen::Index i = 0; i < 25; ++i)
      for (Eigen::Index d = 0; d < 3; ++d) x(i, d) = double(rng.below(40)) / 4.0;
    const Vector v = vlad_encode(r, x);
    Vector oracle = Vector::Zero(12);
    Vector total = Vector::Zero(3);
    for (Eigen::Index i = 0; i < 25; ++i) {
      Eigen::Index best = 0;
      double bd = 1e300;
      for (Eigen::Index k = 0; k < 4; ++k) {
        const double dd = (x.row(i) - r.centroids.row(k)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = k;
        }
      }
      for (Eigen::Index d = 0; d < 3; ++d) {
        oracle(best * 3 + d) += x(i, d) - r.centroids(best, d);
        total(d) += x(i, d) - r.centroids(best, d);
      }
    }
    CHECK(v == oracle);
    Vector summed = Vector::Zero(3);
    for (Eigen::Index k = 0; k < 4; ++k) summed += v.segment(k * 3, 3);
    CHECK(summed == total);
  }
  CHECK_THROWS_AS(vlad_encode(m, Matrix::Zero(1, 3)), Error);
}

TEST_CASE("kmeans++ seeds are sample rows") {
  Rng data(1);
  Matrix x(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) x.row(i) << data.normal(), data.normal();
  Rng rng(5);
  const Matrix seeds = kmeans_plus_plus(x, 4, rng);
  for (Eigen::Index s = 0; s < 4; ++s) {
    bool found = false;
    for (Eigen::Index i = 0; i < 20; ++i) found = found || seeds.row(s) == x.row(i);
    CHECK(found);
  }
}
