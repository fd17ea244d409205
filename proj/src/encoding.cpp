#include "cpd/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpd/error.hpp"
#include "cpd/rng.hpp"

namespace cpd {

std::string_view to_string(Encoder e) { return e == Encoder::fv ? "fv" : "vlad"; }

Encoder parse_encoder(std::string_view text) {
  if (text == "fv") return Encoder::fv;
  if (text == "vlad") return Encoder::vlad;
  fail(Errc::parse, "unknown encoder '" + std::string(text) + "'");
}

std::size_t Codebook::encoded_dim() const {
  if (const auto* g = std::get_if<GmmModel>(&mixture)) return 2 * g->components() * g->dim();
  const auto& km = std::get<KmeansModel>(mixture);
  return km.clusters() * km.dim();
}

Matrix subsample_rows(const Matrix& rows, std::size_t limit, std::uint64_t seed) {
  const auto total = static_cast<std::size_t>(rows.rows());
  if (total <= limit) return rows;
  std::vector<std::size_t> index(total);
  std::iota(index.begin(), index.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(index[i], index[j]);
  }
  index.resize(limit);
  std::sort(index.begin(), index.end());
  Matrix out(static_cast<Eigen::Index>(limit), rows.cols());
  for (std::size_t i = 0; i < limit; ++i)
    out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(index[i]));
  return out;
}

Codebook fit_codebook(const Matrix& descriptors, const CodebookParams& params) {
  if (params.max_sample == 0) fail(Errc::config, "codebook sample size must be >= 1");
  const Matrix sample = subsample_rows(descriptors, params.max_sample, mix_seed(params.seed, 0));
  Codebook cb;
  cb.encoder = params.encoder;
  cb.pca = pca_fit(sample, params.pca_dim);
  const Matrix reduced = pca_transform(cb.pca, sample);
  if (params.encoder == Encoder::fv)
    cb.mixture = gmm_fit(reduced, params.clusters, mix_seed(params.seed, 1)).model;
  else
    cb.mixture = kmeans_fit(reduced, params.clusters, mix_seed(params.seed, 1)).model;
  return cb;
}

Vector encode_raw(const Codebook& codebook, const Matrix& descriptors) {
  if (descriptors.rows() == 0) fail(Errc::input, "cannot encode a video with no descriptors");
  const Matrix reduced = pca_transform(codebook.pca, descriptors);
  if (const auto* g = std::get_if<GmmModel>(&codebook.mixture)) return fisher_encode(*g, reduced);
  return vlad_encode(std::get<KmeansModel>(codebook.mixture), reduced);
}

Vector postnormalize(const Vector& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double z = v(i);
    out(i) = z < 0.0 ? -std::sqrt(-z) : std::sqrt(z);
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

Vector encode_video(const Codebook& codebook, const Matrix& descriptors) {
  return postnormalize(encode_raw(codebook, descriptors));
}

void VideoRepresentation::append(std::string name, const Vector& block) {
  const auto offset = static_cast<std::size_t>(values_.size());
  Vector grown(values_.size() + block.size());
  grown.head(values_.size()) = values_;
  grown.tail(block.size()) = block;
  values_ = std::move(grown);
  blocks_.push_back({std::move(name), offset, static_cast<std::size_t>(block.size())});
}

VideoRepresentation assemble_layer(const Vector& st, const Vector& ch) {
  VideoRepresentation rep;
  rep.append("st", st);
  rep.append("ch", ch);
  return rep;
}

}  // namespace cpd
