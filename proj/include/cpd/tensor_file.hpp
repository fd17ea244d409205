#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cpd/tensor.hpp"

namespace cpd {

// Layout (little-endian, packed):
//   "CPDT" | u16 version | u32 X, Y, N, T | u8 stream | u32 V_w, V_h | f32 payload
// Payload order is (t, y, x, n).
inline constexpr std::uint16_t kTensorFileVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 31;
inline constexpr std::uint64_t kMaxTensorValues = std::uint64_t{1} << 32;

struct TensorRecord {
  Tensor4 values;
  Stream stream = Stream::spatial;
  VideoSize video;
};

std::vector<std::uint8_t> encode_tensor(const Tensor4& values, Stream stream, VideoSize video);
TensorRecord decode_tensor(std::span<const std::uint8_t> bytes);
// decode_tensor plus the feature-map invariants (non-negative values).
FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes);

FeatureMap load_tensor(const std::filesystem::path& path);
TensorRecord load_tensor_record(const std::filesystem::path& path);
void save_tensor(const FeatureMap& map, const std::filesystem::path& path);
void save_tensor(const Tensor4& values, Stream stream, VideoSize video,
                 const std::filesystem::path& path);

}  // namespace cpd
