#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cpd/matrix.hpp"

namespace cpd {

// Diagonal-covariance Gaussian mixture.
struct GmmModel {
  Vector weights;    // K, positive, sums to 1
  Matrix means;      // K x D
  Matrix variances;  // K x D

  std::size_t components() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
};

struct GmmFitOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;              // relative change of mean log-likelihood
  double variance_floor_ratio = 1e-6;   // times the per-dimension sample variance
  double min_variance = 1e-12;          // for dimensions with no spread at all
};

struct GmmFit {
  GmmModel model;
  std::vector<double> log_likelihood;  // mean per-sample, one entry per E-step
  std::size_t reseeds = 0;
};

GmmFit gmm_fit(const Matrix& sample, std::size_t k, std::uint64_t seed,
               const GmmFitOptions& options = {});

// M x K posterior responsibilities.
Matrix gmm_posteriors(const GmmModel& model, const Matrix& x);
double gmm_mean_log_likelihood(const GmmModel& model, const Matrix& x);

// Mean and variance gradient blocks (u_1, v_1, ..., u_K, v_K), each of length D,
// normalized by the descriptor count and the Fisher information of the weights.
Vector fisher_encode(const GmmModel& model, const Matrix& descriptors);

}  // namespace cpd
