#include "cpd/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "cpd/error.hpp"
#include "cpd/rng.hpp"

namespace cpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// L1-loss dual: min 0.5 a'Qa - e'a, 0 <= a_i <= upper, Q_ij = y_i y_j x_i.x_j
// with x augmented by a constant 1 for the bias.
void solve_binary(const Matrix& x, const std::vector<signed char>& y, double upper,
                  const SvmOptions& options, std::uint64_t seed, Eigen::Ref<Vector> w,
                  double& b) {
  const auto rows = static_cast<std::size_t>(x.rows());
  std::vector<double> alpha(rows, 0.0);
  std::vector<double> qd(rows);
  std::vector<std::size_t> index(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    qd[i] = x.row(static_cast<Eigen::Index>(i)).squaredNorm() + 1.0;
    index[i] = i;
  }
  w.setZero();
  b = 0.0;

  Rng rng(seed);
  std::size_t active = rows;
  double pg_max_old = kInf;
  double pg_min_old = -kInf;
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    double pg_max_new = -kInf;
    double pg_min_new = kInf;
    for (std::size_t i = 0; i < active; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(active - i));
      std::swap(index[i], index[j]);
    }
    for (std::size_t s = 0; s < active; ++s) {
      const std::size_t i = index[s];
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double yi = y[i];
      const double g = yi * (row.dot(w) + b) - 1.0;

      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == upper) {
        if (g < pg_min_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);

      if (std::abs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(old - g / qd[i], 0.0), upper);
        const double step = (alpha[i] - old) * yi;
        w += step * row.transpose();
        b += step;
      }
    }

    if (pg_max_new - pg_min_new <= options.tolerance) {
      if (active == rows) break;
      active = rows;
      pg_max_old = kInf;
      pg_min_old = -kInf;
      continue;
    }
    pg_max_old = pg_max_new <= 0.0 ? kInf : pg_max_new;
    pg_min_old = pg_min_new >= 0.0 ? -kInf : pg_min_new;
  }
}

}  // namespace

LinearSvmModel svm_train(const Matrix& reps, std::span<const int> labels,
                         const SvmOptions& options) {
  const auto rows = static_cast<std::size_t>(reps.rows());
  if (labels.size() != rows)
    fail(Errc::structural, "label count " + std::to_string(labels.size()) +
                               " does not match " + std::to_string(rows) + " representations");
  if (!(options.c > 0.0)) fail(Errc::config, "SVM C must be positive");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    fail(Errc::input, "SVM training needs at least two classes, got " +
                          std::to_string(distinct.size()));

  LinearSvmModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  model.c = options.c;
  const auto classes = static_cast<Eigen::Index>(model.classes.size());
  model.weights = Matrix::Zero(classes, reps.cols());
  model.bias = Vector::Zero(classes);

  const double upper = options.c / static_cast<double>(rows);
  std::vector<signed char> y(rows);
  Vector w(reps.cols());
  for (Eigen::Index c = 0; c < classes; ++c) {
    const int label = model.classes[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < rows; ++i) y[i] = labels[i] == label ? 1 : -1;
    double b = 0.0;
    solve_binary(reps, y, upper, options, mix_seed(options.seed, static_cast<std::uint64_t>(c)), w, b);
    model.weights.row(c) = w.transpose();
    model.bias(c) = b;
  }
  return model;
}

ScoreMatrix svm_score(const LinearSvmModel& model, const Matrix& reps, std::string provenance) {
  if (static_cast<std::size_t>(reps.cols()) != model.dim())
    fail(Errc::structural, "representation dimension " + std::to_string(reps.cols()) +
                               " does not match SVM dimension " + std::to_string(model.dim()));
  ScoreMatrix out;
  out.classes = model.classes;
  out.provenance = std::move(provenance);
  out.scores = reps * model.weights.transpose();
  out.scores.rowwise() += model.bias.transpose();
  return out;
}

ScoreMatrix fuse_scores(std::span<const ScoreMatrix> parts, std::string provenance) {
  if (parts.empty()) fail(Errc::input, "nothing to fuse");
  ScoreMatrix out;
  out.classes = parts.front().classes;
  out.provenance = std::move(provenance);
  out.scores = Matrix::Zero(parts.front().scores.rows(), parts.front().scores.cols());
  for (const ScoreMatrix& p : parts) {
    if (p.classes != out.classes || p.scores.rows() != out.scores.rows() ||
        p.scores.cols() != out.scores.cols())
      fail(Errc::structural, "score matrix '" + p.provenance +
                                 "' differs in shape or class order from '" +
                                 parts.front().provenance + "'");
    out.scores += p.scores;
  }
  return out;
}

std::vector<int> predict(const ScoreMatrix& scores) {
  if (scores.scores.cols() == 0 || scores.classes.size() != static_cast<std::size_t>(scores.scores.cols()))
    fail(Errc::structural, "score matrix has no classes or mismatched class labels");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(scores.scores.rows()));
  for (Eigen::Index r = 0; r < scores.scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.scores.cols(); ++c) {
      if (scores.scores(r, c) > scores.scores(r, best)) best = c;
    }
    out.push_back(scores.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    fail(Errc::structural, "prediction and label counts differ");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace cpd
