#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpd/gmm.hpp"
#include "cpd/kmeans.hpp"
#include "cpd/matrix.hpp"
#include "cpd/pca.hpp"

namespace cpd {

enum class Encoder : std::uint8_t { fv = 0, vlad = 1 };
std::string_view to_string(Encoder e);
Encoder parse_encoder(std::string_view text);

struct EncoderParams {
  std::size_t pca_dim;
  std::size_t clusters;
};

// (D, K) selections: FV (64, 128), VLAD (128, 64).
inline constexpr EncoderParams kFisherDefaults{64, 128};
inline constexpr EncoderParams kVladDefaults{128, 64};
inline constexpr std::size_t kCodebookSampleSize = 256000;

constexpr EncoderParams default_params(Encoder e) {
  return e == Encoder::fv ? kFisherDefaults : kVladDefaults;
}

struct Codebook {
  Encoder encoder = Encoder::fv;
  PcaModel pca;
  std::variant<GmmModel, KmeansModel> mixture;

  std::size_t encoded_dim() const;
};

struct CodebookParams {
  Encoder encoder = Encoder::vlad;
  std::size_t pca_dim = kVladDefaults.pca_dim;
  std::size_t clusters = kVladDefaults.clusters;
  std::uint64_t seed = 0;
  std::size_t max_sample = kCodebookSampleSize;
};

// Rows drawn uniformly without replacement, returned in ascending order.
Matrix subsample_rows(const Matrix& rows, std::size_t limit, std::uint64_t seed);

// Subsample, PCA, then a GMM (fv) or k-means (vlad) in the reduced space.
Codebook fit_codebook(const Matrix& descriptors, const CodebookParams& params);

// Raw FV / VLAD of one video's descriptors, before post-normalization.
Vector encode_raw(const Codebook& codebook, const Matrix& descriptors);

// Signed square root followed by global L2 normalization. Zero stays zero.
Vector postnormalize(const Vector& v);

// encode_raw followed by postnormalize.
Vector encode_video(const Codebook& codebook, const Matrix& descriptors);

struct BlockSpan {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
  friend bool operator==(const BlockSpan&, const BlockSpan&) = default;
};

// Concatenated encoded blocks with a record of where each one sits.
class VideoRepresentation {
 public:
  void append(std::string name, const Vector& block);

  const Vector& values() const { return values_; }
  const std::vector<BlockSpan>& blocks() const { return blocks_; }

 private:
  Vector values_;
  std::vector<BlockSpan> blocks_;
};

// Per-layer vector: st-normalized block first, then ch-normalized.
VideoRepresentation assemble_layer(const Vector& st, const Vector& ch);

}  // namespace cpd
