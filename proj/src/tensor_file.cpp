#include "cpd/tensor_file.hpp"

#include <cmath>
#include <string>

#include "cpd/binary_io.hpp"
#include "cpd/error.hpp"

namespace cpd {

std::vector<std::uint8_t> encode_tensor(const Tensor4& values, Stream stream, VideoSize video) {
  const Shape& s = values.shape();
  ByteWriter w;
  w.raw("CPDT");
  w.u16(kTensorFileVersion);
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.channels));
  w.u32(static_cast<std::uint32_t>(s.frames));
  w.u8(static_cast<std::uint8_t>(stream));
  w.u32(video.width);
  w.u32(video.height);
  for (double v : values.values()) w.f32(static_cast<float>(v));
  return w.take();
}

TensorRecord decode_tensor(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != "CPDT") fail(Errc::bad_magic, "not a CPDT tensor file");
  if (bytes.size() < kTensorHeaderBytes)
    fail(Errc::truncated, "tensor header needs " + std::to_string(kTensorHeaderBytes) +
                              " bytes, file has " + std::to_string(bytes.size()));
  const std::uint16_t version = r.u16();
  if (version != kTensorFileVersion)
    fail(Errc::bad_version, "unsupported tensor file version " + std::to_string(version));
  Shape s;
  s.width = r.u32();
  s.height = r.u32();
  s.channels = r.u32();
  s.frames = r.u32();
  const std::uint8_t tag = r.u8();
  VideoSize video;
  video.width = r.u32();
  video.height = r.u32();
  if (tag > 1) fail(Errc::structural, "unknown stream tag " + std::to_string(tag));
  if (s.width == 0 || s.height == 0 || s.channels == 0 || s.frames == 0)
    fail(Errc::structural, "tensor dimensions must all be >= 1");

  std::uint64_t count = 1;
  for (std::uint64_t d : {std::uint64_t{s.width}, std::uint64_t{s.height},
                          std::uint64_t{s.channels}, std::uint64_t{s.frames}}) {
    if (count > kMaxTensorValues / d)
      fail(Errc::dim_overflow, "tensor dimensions exceed the supported volume");
    count *= d;
  }
  const std::uint64_t expected = count * 4;
  if (r.remaining() != expected)
    fail(r.remaining() < expected ? Errc::truncated : Errc::structural, "tensor payload: expected " + std::to_string(expected) +
                              " bytes, found " + std::to_string(r.remaining()));

  std::vector<double> data(static_cast<std::size_t>(count));
  for (double& v : data) v = static_cast<double>(r.f32());
  return {Tensor4(s, std::move(data)), static_cast<Stream>(tag), video};
}

FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes) {
  TensorRecord rec = decode_tensor(bytes);
  std::size_t index = 0;
  for (double v : rec.values.values()) {
    if (!std::isfinite(v))
      fail(Errc::input, "raw feature map value at flat index " + std::to_string(index) +
                            " is not finite");
    if (v < 0.0)
      fail(Errc::negative_value, "raw feature map value at flat index " + std::to_string(index) +
                                     " is negative");
    ++index;
  }
  return FeatureMap(std::move(rec.values), rec.stream, rec.video);
}

FeatureMap load_tensor(const std::filesystem::path& path) {
  try {
    return decode_feature_map(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

TensorRecord load_tensor_record(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_tensor(const FeatureMap& map, const std::filesystem::path& path) {
  save_tensor(map.values(), map.stream(), map.video(), path);
}

void save_tensor(const Tensor4& values, Stream stream, VideoSize video,
                 const std::filesystem::path& path) {
  write_file_atomic(path, encode_tensor(values, stream, video));
}

}  // namespace cpd
