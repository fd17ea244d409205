#pragma once

// Random case generators and independent scalar-loop oracles shared by the
// unit tests and the acceptance runner. The oracles work on flat
// std::vector<double> buffers and compute their own (t, y, x, n) offsets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cpd/gmm.hpp"
#include "cpd/kmeans.hpp"
#include "cpd/rng.hpp"
#include "cpd/tensor.hpp"
#include "cpd/trajpool.hpp"

namespace support {

inline std::size_t flat(std::size_t X, std::size_t Y, std::size_t N, std::size_t x,
                        std::size_t y, std::size_t n, std::size_t t) {
  return ((t * Y + y) * X + x) * N + n;
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// Non-negative values with a share of exact zeros, whole zero channels and
// zero fibers mixed in.
inline cpd::Tensor4 random_activations(cpd::Shape s, cpd::Rng& rng, double scale = 10.0) {
  cpd::Tensor4 t(s);
  std::vector<bool> dead_channel(s.channels);
  for (std::size_t n = 0; n < s.channels; ++n) dead_channel[n] = rng.uniform() < 0.15;
  for (std::size_t tt = 0; tt < s.frames; ++tt)
    for (std::size_t y = 0; y < s.height; ++y)
      for (std::size_t x = 0; x < s.width; ++x) {
        const bool dead_fiber = rng.uniform() < 0.1;
        for (std::size_t n = 0; n < s.channels; ++n) {
          const double u = rng.uniform();
          double v = u < 0.3 ? 0.0 : rng.uniform() * scale;
          if (dead_channel[n] || dead_fiber) v = 0.0;
          t(x, y, n, tt) = v;
        }
      }
  return t;
}

inline cpd::Tensor4 random_unit(cpd::Shape s, cpd::Rng& rng) {
  cpd::Tensor4 t(s);
  for (double& v : t.values()) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
  return t;
}

inline cpd::Shape random_shape(cpd::Rng& rng, std::size_t max_xy, std::size_t max_n,
                               std::size_t max_t) {
  return {1 + rng.below(max_xy), 1 + rng.below(max_xy), 1 + rng.below(max_n), 1 + rng.below(max_t)};
}

inline cpd::VideoDims random_video(cpd::Rng& rng, const cpd::Shape& s) {
  // Video at least as large as the grid; sometimes an exact multiple.
  const auto w = static_cast<std::uint32_t>(s.width * (1 + rng.below(16)) + rng.below(8));
  const auto h = static_cast<std::uint32_t>(s.height * (1 + rng.below(16)) + rng.below(8));
  return {w, h, static_cast<std::uint32_t>(s.frames)};
}

inline cpd::Trajectory random_trajectory(cpd::Rng& rng, cpd::VideoDims dims, std::size_t length,
                                         std::size_t id = 0) {
  cpd::Trajectory tr;
  tr.id = id;
  for (std::size_t l = 0; l < length; ++l)
    tr.points.push_back({static_cast<std::uint32_t>(rng.below(dims.width)),
                         static_cast<std::uint32_t>(rng.below(dims.height)),
                         static_cast<std::uint32_t>(rng.below(dims.frames))});
  return tr;
}

// Consecutive frames starting at a random frame; length must not exceed dims.frames.
inline cpd::Trajectory random_track(cpd::Rng& rng, cpd::VideoDims dims, std::size_t length,
                                    std::size_t id = 0) {
  cpd::Trajectory tr = random_trajectory(rng, dims, length, id);
  const auto start = static_cast<std::uint32_t>(rng.below(dims.frames - length + 1));
  for (std::size_t l = 0; l < length; ++l) tr.points[l].t = start + static_cast<std::uint32_t>(l);
  return tr;
}

// Spatiotemporal: per-channel max over every (x, y, t).
inline std::vector<double> oracle_st(const std::vector<double>& v, std::size_t X, std::size_t Y,
                                     std::size_t N, std::size_t T) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    double m = 0.0;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t x = 0; x < X; ++x) m = std::max(m, v[flat(X, Y, N, x, y, n, t)]);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t x = 0; x < X; ++x) {
          const std::size_t k = flat(X, Y, N, x, y, n, t);
          out[k] = m > 0.0 ? v[k] / m : 0.0;
        }
  }
  return out;
}

// Channel: per-fiber max over n.
inline std::vector<double> oracle_ch(const std::vector<double>& v, std::size_t X, std::size_t Y,
                                     std::size_t N, std::size_t T) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < Y; ++y)
      for (std::size_t x = 0; x < X; ++x) {
        double m = 0.0;
        for (std::size_t n = 0; n < N; ++n) m = std::max(m, v[flat(X, Y, N, x, y, n, t)]);
        for (std::size_t n = 0; n < N; ++n) {
          const std::size_t k = flat(X, Y, N, x, y, n, t);
          out[k] = m > 0.0 ? v[k] / m : 0.0;
        }
      }
  return out;
}

inline std::size_t oracle_cell(std::uint32_t p, std::size_t grid, std::uint32_t video) {
  const double r = static_cast<double>(grid) / static_cast<double>(video);
  const double s = std::floor(r * static_cast<double>(p) + 0.5);
  if (s < 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), grid - 1);
}

// Sum of map fibers read at each trajectory point's scaled cell.
inline std::vector<double> oracle_pool(const std::vector<double>& v, std::size_t X, std::size_t Y,
                                       std::size_t N, cpd::VideoDims video,
                                       const cpd::Trajectory& tr) {
  std::vector<double> out(N, 0.0);
  for (const auto& p : tr.points) {
    const std::size_t i = oracle_cell(p.x, X, video.width);
    const std::size_t j = oracle_cell(p.y, Y, video.height);
    for (std::size_t n = 0; n < N; ++n) out[n] += v[flat(X, Y, N, i, j, n, p.t)];
  }
  return out;
}

// Cyclic Jacobi rotations on a dense symmetric matrix; eigenvalues descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// (1/M) covariance by explicit loops.
inline std::vector<std::vector<double>> covariance(const cpd::Matrix& x) {
  const auto m = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (double& v : mean) v /= static_cast<double>(m);
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) c[a][b] += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
  for (auto& row : c)
    for (double& v : row) v /= static_cast<double>(m);
  return c;
}

inline double partition_sse(const cpd::Matrix& x, const std::vector<int>& group, int k) {
  double sse = 0.0;
  for (int g = 0; g < k; ++g) {
    std::vector<double> c(static_cast<std::size_t>(x.cols()), 0.0);
    int count = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (group[static_cast<std::size_t>(i)] == g) {
        ++count;
        for (Eigen::Index d = 0; d < x.cols(); ++d) c[static_cast<std::size_t>(d)] += x(i, d);
      }
    if (count == 0) continue;
    for (double& v : c) v /= count;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (group[static_cast<std::size_t>(i)] == g)
        for (Eigen::Index d = 0; d < x.cols(); ++d) {
          const double r = x(i, d) - c[static_cast<std::size_t>(d)];
          sse += r * r;
        }
  }
  return sse;
}

// Minimum-SSE split into two non-empty groups over all 2^(n-1) - 1 candidates.
// Group 1 never contains point 0.
inline std::pair<std::vector<int>, double> best_two_partition(const cpd::Matrix& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<int> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> g(n, 0);
    for (std::size_t i = 1; i < n; ++i) g[i] = (mask >> (i - 1)) & 1u;
    const double sse = partition_sse(x, g, 2);
    if (sse < best_sse) {
      best_sse = sse;
      best = g;
    }
  }
  return {best, best_sse};
}

// Relabels so the group holding point 0 is 0, then the next new group is 1, and so on.
inline std::vector<int> canonical(const std::vector<std::size_t>& a) {
  std::vector<int> out(a.size());
  std::vector<std::pair<std::size_t, int>> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == a[i]; });
    if (it == seen.end()) {
      seen.emplace_back(a[i], static_cast<int>(seen.size()));
      out[i] = seen.back().second;
    } else {
      out[i] = it->second;
    }
  }
  return out;
}

// Mean per-sample log-likelihood of a diagonal GMM parameterized by standard deviations.
inline double mixture_ll(const std::vector<double>& w, const std::vector<std::vector<double>>& mu,
                         const std::vector<std::vector<double>>& sd,
                         const std::vector<std::vector<double>>& xs) {
  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  double total = 0.0;
  for (const auto& x : xs) {
    std::vector<double> lp(w.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.size(); ++k) {
      double s = std::log(w[k]);
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double z = (x[d] - mu[k][d]) / sd[k][d];
        s += -0.5 * (log2pi + z * z) - std::log(sd[k][d]);
      }
      lp[k] = s;
      mx = std::max(mx, s);
    }
    double acc = 0.0;
    for (double v : lp) acc += std::exp(v - mx);
    total += mx + std::log(acc);
  }
  return total / static_cast<double>(xs.size());
}

struct FisherCheck {
  double max_relative_error = 0.0;
  double min_gradient = 0.0;        // smallest |block entry|, to show the check is not vacuous
  double duplication_error = 0.0;   // max |fv({x, x}) - fv({x})|
};

// Random K-component, D-dim diagonal GMM and M nearby descriptors. Compares each
// Fisher block entry with a central-difference gradient of the mean
// log-likelihood with respect to the means and standard deviations, rescaled
// by sd / sqrt(w) (means) and sd / sqrt(2 w) (deviations).
inline FisherCheck fisher_gradient_check(std::uint64_t seed, std::size_t K = 2, std::size_t D = 3,
                                         std::size_t M = 5, double h = 1e-5) {
  cpd::Rng rng(seed);
  std::vector<double> w(K);
  double wsum = 0.0;
  for (double& v : w) wsum += (v = 0.5 + rng.uniform());
  for (double& v : w) v /= wsum;
  std::vector<std::vector<double>> mu(K, std::vector<double>(D)), sd = mu;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t d = 0; d < D; ++d) {
      mu[k][d] = rng.uniform(-1.0, 1.0);
      sd[k][d] = rng.uniform(0.7, 1.5);
    }
  std::vector<std::vector<double>> xs(M, std::vector<double>(D));
  for (auto& x : xs)
    for (double& v : x) v = rng.normal(0.0, 1.2);

  cpd::GmmModel g;
  g.weights.resize(static_cast<Eigen::Index>(K));
  g.means.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(D));
  g.variances.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(D));
  for (std::size_t k = 0; k < K; ++k) {
    g.weights(static_cast<Eigen::Index>(k)) = w[k];
    for (std::size_t d = 0; d < D; ++d) {
      g.means(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = mu[k][d];
      g.variances(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = sd[k][d] * sd[k][d];
    }
  }
  cpd::Matrix x(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(D));
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t d = 0; d < D; ++d)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = xs[i][d];
  const cpd::Vector fv = cpd::fisher_encode(g, x);

  FisherCheck out;
  out.min_gradient = std::numeric_limits<double>::infinity();
  auto compare = [&](double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    out.min_gradient = std::min(out.min_gradient, std::abs(analytic));
    out.max_relative_error =
        std::max(out.max_relative_error, denom == 0.0 ? 0.0 : std::abs(analytic - numeric) / denom);
  };
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t d = 0; d < D; ++d) {
      auto mp = mu, mm = mu;
      mp[k][d] += h;
      mm[k][d] -= h;
      const double dmu = (mixture_ll(w, mp, sd, xs) - mixture_ll(w, mm, sd, xs)) / (2.0 * h);
      auto sp = sd, sm = sd;
      sp[k][d] += h;
      sm[k][d] -= h;
      const double dsd = (mixture_ll(w, mu, sp, xs) - mixture_ll(w, mu, sm, xs)) / (2.0 * h);
      const auto u = static_cast<Eigen::Index>(2 * k * D + d);
      const auto v = static_cast<Eigen::Index>(2 * k * D + D + d);
      compare(fv(u), dmu * sd[k][d] / std::sqrt(w[k]));
      compare(fv(v), dsd * sd[k][d] / std::sqrt(2.0 * w[k]));
    }

  cpd::Matrix twice(2 * x.rows(), x.cols());
  twice << x, x;
  out.duplication_error = (cpd::fisher_encode(g, twice) - fv).cwiseAbs().maxCoeff();
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cpd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
