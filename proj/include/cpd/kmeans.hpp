#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cpd/matrix.hpp"
#include "cpd/rng.hpp"

namespace cpd {

struct KmeansModel {
  Matrix centroids;  // K x D

  std::size_t clusters() const { return static_cast<std::size_t>(centroids.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centroids.cols()); }
};

struct KmeansFit {
  KmeansModel model;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  double sse = 0.0;
};

// D^2-weighted seeding; returns k rows of the sample.
Matrix kmeans_plus_plus(const Matrix& sample, std::size_t k, Rng& rng);

// Nearest centroid by squared Euclidean distance, ties to the lowest index.
std::size_t nearest_centroid(const Matrix& centroids, const Eigen::Ref<const Vector>& x);

// k-means++ seeding followed by Lloyd iterations until assignments settle.
// An emptied cluster is reseeded at the point farthest from its own centroid.
KmeansFit kmeans_fit(const Matrix& sample, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations = 100);

// Per-cluster residual sums, blocks ordered by cluster index. Not normalized.
Vector vlad_encode(const KmeansModel& model, const Matrix& descriptors);

}  // namespace cpd
