#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cpd {

enum class Stream : std::uint8_t { spatial = 0, temporal = 1 };
enum class NormMode : std::uint8_t { st = 0, ch = 1 };

constexpr Stream complement(Stream s) {
  return s == Stream::spatial ? Stream::temporal : Stream::spatial;
}

std::string_view to_string(Stream s);    // "sp" | "tmp"
std::string_view to_string(NormMode m);  // "st" | "ch"
Stream parse_stream(std::string_view text);
NormMode parse_norm_mode(std::string_view text);

struct VideoSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  friend bool operator==(const VideoSize&, const VideoSize&) = default;
};

// Extent of a feature map: X cells wide, Y cells high, N channels, T frames.
// Storage is row-major in (t, y, x, n) so a channel fiber is contiguous.
struct Shape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::size_t frames = 0;

  std::size_t size() const { return width * height * channels * frames; }
  std::size_t cells() const { return width * height * frames; }
  std::size_t cell_index(std::size_t x, std::size_t y, std::size_t t) const {
    return (t * height + y) * width + x;
  }
  std::size_t index(std::size_t x, std::size_t y, std::size_t n, std::size_t t) const {
    return cell_index(x, y, t) * channels + n;
  }
  bool same_grid(const Shape& o) const {
    return width == o.width && height == o.height && frames == o.frames;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape shape, double fill = 0.0);
  Tensor4(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }

  double operator()(std::size_t x, std::size_t y, std::size_t n, std::size_t t) const {
    return data_[shape_.index(x, y, n, t)];
  }
  double& operator()(std::size_t x, std::size_t y, std::size_t n, std::size_t t) {
    return data_[shape_.index(x, y, n, t)];
  }

  std::span<const double> fiber(std::size_t x, std::size_t y, std::size_t t) const {
    return {data_.data() + shape_.cell_index(x, y, t) * shape_.channels, shape_.channels};
  }
  std::span<double> fiber(std::size_t x, std::size_t y, std::size_t t) {
    return {data_.data() + shape_.cell_index(x, y, t) * shape_.channels, shape_.channels};
  }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  Tensor4 scaled(double factor) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

struct Unchecked {};
inline constexpr Unchecked unchecked{};

// Post-ReLU activations of one convolutional layer over a whole video.
class FeatureMap {
 public:
  FeatureMap(Tensor4 values, Stream stream, VideoSize video);

  const Tensor4& values() const { return values_; }
  const Shape& shape() const { return values_.shape(); }
  Stream stream() const { return stream_; }
  VideoSize video() const { return video_; }

 private:
  Tensor4 values_;
  Stream stream_;
  VideoSize video_;
};

class NormalizedMap {
 public:
  NormalizedMap(Tensor4 values, Stream stream, NormMode mode, VideoSize video);
  // Skips the [0, 1] range check; for ablations on raw values.
  NormalizedMap(Tensor4 values, Stream stream, NormMode mode, VideoSize video, Unchecked);

  const Tensor4& values() const { return values_; }
  const Shape& shape() const { return values_.shape(); }
  Stream stream() const { return stream_; }
  NormMode mode() const { return mode_; }
  VideoSize video() const { return video_; }

 private:
  Tensor4 values_;
  Stream stream_;
  NormMode mode_;
  VideoSize video_;
};

// Channel-summed normalized activations; stored as a single-channel tensor.
class WeightMap {
 public:
  WeightMap(Tensor4 values, Stream source, NormMode mode, VideoSize video,
            std::size_t source_channels);

  double operator()(std::size_t x, std::size_t y, std::size_t t) const {
    return values_(x, y, 0, t);
  }
  const Tensor4& values() const { return values_; }
  const Shape& shape() const { return values_.shape(); }
  Stream source() const { return source_; }
  NormMode mode() const { return mode_; }
  VideoSize video() const { return video_; }
  std::size_t source_channels() const { return source_channels_; }

 private:
  Tensor4 values_;
  Stream source_;
  NormMode mode_;
  VideoSize video_;
  std::size_t source_channels_;
};

class CrossStreamMap {
 public:
  CrossStreamMap(Tensor4 values, Stream weighted, Stream weighting, NormMode mode,
                 VideoSize video);

  const Tensor4& values() const { return values_; }
  const Shape& shape() const { return values_.shape(); }
  Stream weighted() const { return weighted_; }
  Stream weighting() const { return weighting_; }
  NormMode mode() const { return mode_; }
  VideoSize video() const { return video_; }

 private:
  Tensor4 values_;
  Stream weighted_;
  Stream weighting_;
  NormMode mode_;
  VideoSize video_;
};

// Divides each channel by its maximum over (x, y, t). All-zero channels stay zero.
NormalizedMap spatiotemporal_normalize(const FeatureMap& map);
// Divides each (x, y, t) fiber by its maximum over channels. All-zero fibers stay zero.
NormalizedMap channel_normalize(const FeatureMap& map);
NormalizedMap normalize(const FeatureMap& map, NormMode mode);

WeightMap weight_map(const NormalizedMap& normalized);

struct CrossOptions {
  // Permit weighting a map by its own stream. Off unless running ablations.
  bool allow_same_stream = false;
};

CrossStreamMap cross_stream(const NormalizedMap& normalized, const WeightMap& weights,
                            CrossOptions options = {});

}  // namespace cpd
