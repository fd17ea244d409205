#include "cpd/kmeans.hpp"

#include <limits>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

namespace {

double squared_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  double sum = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a(d) - b(d);
    sum += diff * diff;
  }
  return sum;
}

double assign_all(const Matrix& sample, const Matrix& centroids,
                  std::vector<std::size_t>& assignment, std::vector<double>& distance) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    const std::size_t c = nearest_centroid(centroids, sample.row(i).transpose());
    assignment[static_cast<std::size_t>(i)] = c;
    const double d =
        squared_distance(sample.row(i).transpose(), centroids.row(static_cast<Eigen::Index>(c)).transpose());
    distance[static_cast<std::size_t>(i)] = d;
    sse += d;
  }
  return sse;
}

}  // namespace

Matrix kmeans_plus_plus(const Matrix& sample, std::size_t k, Rng& rng) {
  const auto rows = static_cast<std::size_t>(sample.rows());
  if (k == 0) fail(Errc::input, "cluster count must be >= 1");
  if (rows < k)
    fail(Errc::input, "need at least " + std::to_string(k) + " samples, got " +
                          std::to_string(rows));

  Matrix centers(static_cast<Eigen::Index>(k), sample.cols());
  std::size_t first = static_cast<std::size_t>(rng.below(rows));
  centers.row(0) = sample.row(static_cast<Eigen::Index>(first));

  std::vector<double> best(rows);
  for (std::size_t i = 0; i < rows; ++i)
    best[i] = squared_distance(sample.row(static_cast<Eigen::Index>(i)).transpose(),
                               centers.row(0).transpose());

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : best) total += d;
    std::size_t pick = rows - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        run += best[i];
        if (best[i] > 0.0 && run > target) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target beyond the running sum; take the last candidate.
      if (best[pick] <= 0.0) {
        for (std::size_t i = rows; i-- > 0;) {
          if (best[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(rows));
    }
    centers.row(static_cast<Eigen::Index>(c)) = sample.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < rows; ++i) {
      const double d = squared_distance(sample.row(static_cast<Eigen::Index>(i)).transpose(),
                                        centers.row(static_cast<Eigen::Index>(c)).transpose());
      if (d < best[i]) best[i] = d;
    }
  }
  return centers;
}

std::size_t nearest_centroid(const Matrix& centroids, const Eigen::Ref<const Vector>& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c).transpose());
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

KmeansFit kmeans_fit(const Matrix& sample, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations) {
  Rng rng(seed);
  KmeansFit fit;
  fit.model.centroids = kmeans_plus_plus(sample, k, rng);
  const auto rows = static_cast<std::size_t>(sample.rows());
  fit.assignment.assign(rows, 0);
  std::vector<double> distance(rows, 0.0);
  fit.sse = assign_all(sample, fit.model.centroids, fit.assignment, distance);

  Matrix& centroids = fit.model.centroids;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    fit.iterations = iter + 1;
    Matrix sums = Matrix::Zero(centroids.rows(), centroids.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      sums.row(static_cast<Eigen::Index>(fit.assignment[i])) += sample.row(static_cast<Eigen::Index>(i));
      ++counts[fit.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = 0;
      for (std::size_t i = 1; i < rows; ++i) {
        if (distance[i] > distance[far]) far = i;
      }
      centroids.row(static_cast<Eigen::Index>(c)) = sample.row(static_cast<Eigen::Index>(far));
      distance[far] = 0.0;
    }

    const std::vector<std::size_t> previous = fit.assignment;
    fit.sse = assign_all(sample, centroids, fit.assignment, distance);
    if (fit.assignment == previous) break;
  }
  return fit;
}

Vector vlad_encode(const KmeansModel& model, const Matrix& descriptors) {
  if (static_cast<std::size_t>(descriptors.cols()) != model.dim())
    fail(Errc::structural, "VLAD descriptor dimension " + std::to_string(descriptors.cols()) +
                               " does not match codebook dimension " +
                               std::to_string(model.dim()));
  const auto dim = static_cast<Eigen::Index>(model.dim());
  Vector out = Vector::Zero(static_cast<Eigen::Index>(model.clusters()) * dim);
  for (Eigen::Index i = 0; i < descriptors.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(
        nearest_centroid(model.centroids, descriptors.row(i).transpose()));
    for (Eigen::Index d = 0; d < dim; ++d)
      out(c * dim + d) += descriptors(i, d) - model.centroids(c, d);
  }
  return out;
}

}  // namespace cpd
