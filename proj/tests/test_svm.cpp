#include <cmath>
#include <vector>

#include "cpd/error.hpp"
#include "cpd/svm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpd;

namespace {

void clouds(Rng& rng, Matrix& x, std::vector<int>& y) {
  x.resize(80, 2);
  y.clear();
  for (Eigen::Index i = 0; i < 80; ++i) {
    const int c = static_cast<int>(i % 2);
    x(i, 0) = (c ? 3.0 : -3.0) + rng.normal(0.0, 0.7);
    x(i, 1) = (c ? 1.0 : -1.0) + rng.normal(0.0, 0.7);
    y.push_back(c ? 4 : 2);
  }
}

ScoreMatrix scores_of(Matrix m) {
  ScoreMatrix s;
  s.classes.resize(static_cast<std::size_t>(m.cols()));
  for (std::size_t c = 0; c < s.classes.size(); ++c) s.classes[c] = static_cast<int>(c);
  s.scores = std::move(m);
  return s;
}

}  // namespace

TEST_CASE("separable clouds are fit exactly") {
  Rng rng(21);
  Matrix x;
  std::vector<int> y;
  clouds(rng, x, y);
  const LinearSvmModel m = svm_train(x, y);
  CHECK(m.classes == std::vector<int>{2, 4});
  CHECK(accuracy(predict(svm_score(m, x)), y) == 1.0);
}

TEST_CASE("one sample per class is scored highest by its own class") {
  Rng rng(3);
  Matrix x(5, 8);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index d = 0; d < 8; ++d) x(i, d) = rng.normal();
  const std::vector<int> y{0, 1, 2, 3, 4};
  SvmOptions o;
  o.c = 1e4;
  CHECK(predict(svm_score(svm_train(x, y, o), x)) == y);
}

TEST_CASE("duplicating every sample leaves the decision function unchanged") {
  Rng rng(8);
  Matrix x(30, 4);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 30; ++i) {
    y.push_back(static_cast<int>(i % 3));
    for (Eigen::Index d = 0; d < 4; ++d) x(i, d) = rng.normal(d == y.back() ? 1.5 : 0.0, 1.0);
  }
  Matrix x2(60, 4);
  x2 << x, x;
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  SvmOptions o;
  o.c = 1.0;
  o.tolerance = 1e-10;
  o.max_epochs = 100000;
  const LinearSvmModel a = svm_train(x, y, o);
  const LinearSvmModel b = svm_train(x2, y2, o);
  CHECK((svm_score(a, x).scores - svm_score(b, x).scores).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("training is deterministic and rejects a single class") {
  Rng rng(1);
  Matrix x;
  std::vector<int> y;
  clouds(rng, x, y);
  const LinearSvmModel a = svm_train(x, y);
  const LinearSvmModel b = svm_train(x, y);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK_THROWS_AS(svm_train(x, std::vector<int>(80, 1)), Error);
  CHECK_THROWS_AS(svm_train(x, std::vector<int>(3, 1)), Error);
}

TEST_CASE("score fusion") {
  Rng rng(4);
  auto random = [&] {
    Matrix m(6, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return scores_of(m);
  };
  const ScoreMatrix a = random(), b = random(), c = random();
  CHECK(fuse_scores(std::vector<ScoreMatrix>{a}).scores == a.scores);
  ScoreMatrix neg = a;
  neg.scores = -a.scores;
  CHECK(fuse_scores(std::vector<ScoreMatrix>{a, neg}).scores.cwiseAbs().maxCoeff() == 0.0);
  const ScoreMatrix f = fuse_scores(std::vector<ScoreMatrix>{a, b, c});
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      double s = 0.0;
      for (const ScoreMatrix* m : {&a, &b, &c}) s += m->scores(i, j);
      CHECK(f.scores(i, j) == s);
    }
  ScoreMatrix other = b;
  other.classes = {0, 2, 1};
  CHECK_THROWS_AS(fuse_scores(std::vector<ScoreMatrix>{a, other}), Error);
  CHECK_THROWS_AS(fuse_scores(std::vector<ScoreMatrix>{}), Error);
}

TEST_CASE("predict breaks ties toward the lowest class index") {
  Matrix m(2, 3);
  m << 1.0, 1.0, 0.5, -2.0, 3.0, 3.0;
  ScoreMatrix s = scores_of(m);
  s.classes = {7, 8, 9};
  CHECK(predict(s) == std::vector<int>{7, 8});
}

TEST_CASE("fusion order properties") {
  Rng rng(10);
  auto integers = [&] {
    Matrix m(5, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = double(rng.below(2001)) - 1000.0;
    return scores_of(m);
  };
  auto reals = [&] {
    Matrix m(5, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return scores_of(m);
  };
  const ScoreMatrix a = reals(), b = reals(), c = reals();
  using L = std::vector<ScoreMatrix>;
  CHECK(fuse_scores(L{a, b}).scores == fuse_scores(L{b, a}).scores);
  // Parts are added left to right, so left-nested fusion is the same computation.
  CHECK(fuse_scores(L{fuse_scores(L{a, b}), c}).scores == fuse_scores(L{a, b, c}).scores);
  // Where addition is exact, grouping and order do not matter at all.
  const ScoreMatrix p = integers(), q = integers(), r = integers();
  const Matrix abc = fuse_scores(L{p, q, r}).scores;
  CHECK(fuse_scores(L{p, fuse_scores(L{q, r})}).scores == abc);
  CHECK(fuse_scores(L{r, p, q}).scores == abc);
  CHECK(fuse_scores(L{q, r, p}).scores == abc);
}

TEST_CASE("predict ignores row shifts and positive row scaling") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m(4, 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = double(rng.below(21)) - 10.0;
    const ScoreMatrix s = scores_of(m);
    const std::vector<int> base = predict(s);
    ScoreMatrix shifted = s, scaled = s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      shifted.scores.row(i).array() += double(rng.below(1000)) - 500.0;
      scaled.scores.row(i) *= double(1 + rng.below(64));
    }
    CHECK(predict(shifted) == base);
    CHECK(predict(scaled) == base);
  }
}

TEST_CASE("svm_score is affine in the representation") {
  Rng rng(14);
  Matrix x;
  std::vector<int> y;
  clouds(rng, x, y);
  const LinearSvmModel m = svm_train(x, y);
  const Matrix wx = x * m.weights.transpose();
  const Matrix bias = m.bias.transpose().replicate(x.rows(), 1);
  CHECK(svm_score(m, x).scores == wx + bias);
  CHECK(svm_score(m, 4.0 * x).scores == 4.0 * wx + bias);
  for (double alpha : {-2.7, 0.3, 11.0}) {
    const Matrix sa = svm_score(m, alpha * x).scores;
    CHECK((sa - (alpha * wx + bias)).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + std::abs(alpha) * wx.cwiseAbs().maxCoeff()));
  }
}
