#include "cpd/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cpd/error.hpp"
#include "cpd/kmeans.hpp"
#include "cpd/rng.hpp"

namespace cpd {

namespace {

// log(w_k) + log N(x | mu_k, diag(var_k)) for every component.
void component_log_densities(const GmmModel& g, const Eigen::Ref<const Vector>& x,
                             std::vector<double>& out) {
  const auto k_count = static_cast<Eigen::Index>(g.components());
  const auto dim = static_cast<Eigen::Index>(g.dim());
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double var = g.variances(k, d);
      const double diff = x(d) - g.means(k, d);
      acc += log_two_pi + std::log(var) + diff * diff / var;
    }
    out[static_cast<std::size_t>(k)] = std::log(g.weights(k)) - 0.5 * acc;
  }
}

// Fills one row of responsibilities; returns log p(x).
double posterior_row(const GmmModel& g, const Eigen::Ref<const Vector>& x,
                     std::vector<double>& scratch, Eigen::Ref<Vector> gamma) {
  component_log_densities(g, x, scratch);
  const double top = *std::max_element(scratch.begin(), scratch.end());
  double sum = 0.0;
  for (double v : scratch) sum += std::exp(v - top);
  const double log_px = top + std::log(sum);
  for (std::size_t k = 0; k < scratch.size(); ++k)
    gamma(static_cast<Eigen::Index>(k)) = std::exp(scratch[k] - log_px);
  return log_px;
}

void check_dim(const GmmModel& g, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != g.dim())
    fail(Errc::structural, "descriptor dimension " + std::to_string(x.cols()) +
                               " does not match GMM dimension " + std::to_string(g.dim()));
}

}  // namespace

Matrix gmm_posteriors(const GmmModel& model, const Matrix& x) {
  check_dim(model, x);
  Matrix gamma(x.rows(), static_cast<Eigen::Index>(model.components()));
  std::vector<double> scratch(model.components());
  Vector row(static_cast<Eigen::Index>(model.components()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    posterior_row(model, x.row(i).transpose(), scratch, row);
    gamma.row(i) = row.transpose();
  }
  return gamma;
}

double gmm_mean_log_likelihood(const GmmModel& model, const Matrix& x) {
  check_dim(model, x);
  std::vector<double> scratch(model.components());
  Vector row(static_cast<Eigen::Index>(model.components()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    total += posterior_row(model, x.row(i).transpose(), scratch, row);
  return total / static_cast<double>(x.rows());
}

GmmFit gmm_fit(const Matrix& sample, std::size_t k, std::uint64_t seed,
               const GmmFitOptions& options) {
  const Eigen::Index rows = sample.rows();
  const Eigen::Index dim = sample.cols();
  if (k == 0) fail(Errc::input, "mixture component count must be >= 1");
  if (static_cast<std::size_t>(rows) < k)
    fail(Errc::input, "GMM needs at least " + std::to_string(k) + " samples, got " +
                          std::to_string(rows));

  const Vector mean = sample.colwise().mean().transpose();
  Vector sample_var(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double diff = sample(i, d) - mean(d);
      acc += diff * diff;
    }
    sample_var(d) = acc / static_cast<double>(rows);
  }
  Vector floor(dim);
  for (Eigen::Index d = 0; d < dim; ++d)
    floor(d) = std::max(options.variance_floor_ratio * sample_var(d), options.min_variance);

  const auto kk = static_cast<Eigen::Index>(k);
  GmmFit fit;
  GmmModel& g = fit.model;
  Rng rng(seed);
  g.means = kmeans_plus_plus(sample, k, rng);
  g.weights = Vector::Constant(kk, 1.0 / static_cast<double>(k));
  g.variances.resize(kk, dim);
  for (Eigen::Index c = 0; c < kk; ++c)
    for (Eigen::Index d = 0; d < dim; ++d) g.variances(c, d) = std::max(sample_var(d), floor(d));

  Matrix gamma(rows, kk);
  std::vector<double> scratch(k);
  Vector row(kk);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // E-step
    double total = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      total += posterior_row(g, sample.row(i).transpose(), scratch, row);
      gamma.row(i) = row.transpose();
    }
    const double ll = total / static_cast<double>(rows);
    if (!std::isfinite(ll)) fail(Errc::numeric, "GMM log-likelihood became non-finite");
    const bool converged =
        !fit.log_likelihood.empty() &&
        std::abs(ll - fit.log_likelihood.back()) < options.tolerance * std::abs(fit.log_likelihood.back());
    fit.log_likelihood.push_back(ll);
    if (converged) break;

    // M-step
    const Vector mass = gamma.colwise().sum().transpose();
    const double empty_mass = 1e-10 * static_cast<double>(rows);
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (mass(c) <= empty_mass) continue;
      Vector mu = Vector::Zero(dim);
      for (Eigen::Index i = 0; i < rows; ++i) mu += gamma(i, c) * sample.row(i).transpose();
      mu /= mass(c);
      for (Eigen::Index d = 0; d < dim; ++d) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double diff = sample(i, d) - mu(d);
          acc += gamma(i, c) * diff * diff;
        }
        g.variances(c, d) = std::max(acc / mass(c), floor(d));
      }
      g.means.row(c) = mu.transpose();
      g.weights(c) = mass(c) / static_cast<double>(rows);
    }

    // Empty components restart at the point farthest from its most responsible mean.
    bool reseeded = false;
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (mass(c) > empty_mass) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index owner = 0;
        gamma.row(i).maxCoeff(&owner);
        const double d = (sample.row(i) - g.means.row(owner)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      g.means.row(c) = sample.row(far);
      for (Eigen::Index d = 0; d < dim; ++d) g.variances(c, d) = std::max(sample_var(d), floor(d));
      g.weights(c) = 1.0 / static_cast<double>(k);
      ++fit.reseeds;
      reseeded = true;
    }
    if (reseeded) g.weights /= g.weights.sum();
  }
  return fit;
}

Vector fisher_encode(const GmmModel& model, const Matrix& descriptors) {
  check_dim(model, descriptors);
  if (descriptors.rows() == 0) fail(Errc::input, "Fisher encoding needs at least one descriptor");
  const auto kk = static_cast<Eigen::Index>(model.components());
  const auto dim = static_cast<Eigen::Index>(model.dim());
  const auto m = static_cast<double>(descriptors.rows());

  Vector out = Vector::Zero(2 * kk * dim);
  std::vector<double> scratch(model.components());
  Vector gamma(kk);
  for (Eigen::Index i = 0; i < descriptors.rows(); ++i) {
    posterior_row(model, descriptors.row(i).transpose(), scratch, gamma);
    for (Eigen::Index k = 0; k < kk; ++k) {
      const double gk = gamma(k);
      if (gk == 0.0) continue;
      const Eigen::Index u = 2 * k * dim;
      const Eigen::Index v = u + dim;
      for (Eigen::Index d = 0; d < dim; ++d) {
        const double z = (descriptors(i, d) - model.means(k, d)) / std::sqrt(model.variances(k, d));
        out(u + d) += gk * z;
        out(v + d) += gk * (z * z - 1.0);
      }
    }
  }
  for (Eigen::Index k = 0; k < kk; ++k) {
    const double w = model.weights(k);
    const double mean_scale = 1.0 / (m * std::sqrt(w));
    const double var_scale = 1.0 / (m * std::sqrt(2.0 * w));
    out.segment(2 * k * dim, dim) *= mean_scale;
    out.segment(2 * k * dim + dim, dim) *= var_scale;
  }
  return out;
}

}  // namespace cpd
