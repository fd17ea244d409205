#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpd/matrix.hpp"

namespace cpd {

inline constexpr double kDefaultSvmC = 100.0;

struct SvmOptions {
  double c = kDefaultSvmC;
  double tolerance = 1e-4;  // on the projected-gradient spread
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;
};

// One-vs-rest linear SVM. Row c of weights and bias(c) score class classes[c].
struct LinearSvmModel {
  std::vector<int> classes;  // ascending
  Matrix weights;            // classes x dim
  Vector bias;               // classes
  double c = kDefaultSvmC;

  std::size_t dim() const { return static_cast<std::size_t>(weights.cols()); }
};

// Minimizes 0.5 |[w; b]|^2 + (C / M) sum_i hinge(y_i (w.x_i + b)) per class by
// dual coordinate descent with shrinking. Deterministic given the seed and the
// row order.
LinearSvmModel svm_train(const Matrix& reps, std::span<const int> labels,
                         const SvmOptions& options = {});

struct ScoreMatrix {
  Matrix scores;             // videos x classes
  std::vector<int> classes;  // column labels
  std::string provenance;
};

// Raw decision values w_c.x + b_c.
ScoreMatrix svm_score(const LinearSvmModel& model, const Matrix& reps, std::string provenance = {});

// Element-wise sum; shapes and class order must agree.
ScoreMatrix fuse_scores(std::span<const ScoreMatrix> parts, std::string provenance = "fused");

// Per-row argmax, ties to the lowest column. Returns class labels.
std::vector<int> predict(const ScoreMatrix& scores);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace cpd
