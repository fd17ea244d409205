#include "cpd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

std::string_view to_string(Stream s) { return s == Stream::spatial ? "sp" : "tmp"; }
std::string_view to_string(NormMode m) { return m == NormMode::st ? "st" : "ch"; }

Stream parse_stream(std::string_view text) {
  if (text == "sp" || text == "spatial") return Stream::spatial;
  if (text == "tmp" || text == "temporal") return Stream::temporal;
  fail(Errc::parse, "unknown stream '" + std::string(text) + "'");
}

NormMode parse_norm_mode(std::string_view text) {
  if (text == "st") return NormMode::st;
  if (text == "ch") return NormMode::ch;
  fail(Errc::parse, "unknown norm mode '" + std::string(text) + "'");
}

namespace {

void check_shape(const Shape& s) {
  if (s.width == 0 || s.height == 0 || s.channels == 0 || s.frames == 0)
    fail(Errc::structural, "tensor dimensions must all be >= 1");
}

void check_video(const Shape& s, VideoSize video) {
  if (video.width < s.width || video.height < s.height)
    fail(Errc::structural, "video size " + std::to_string(video.width) + "x" +
                               std::to_string(video.height) + " smaller than map grid " +
                               std::to_string(s.width) + "x" + std::to_string(s.height));
}

}  // namespace

Tensor4::Tensor4(Shape shape, double fill) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.size(), fill);
}

Tensor4::Tensor4(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.size())
    fail(Errc::structural, "tensor data length " + std::to_string(data_.size()) +
                               " does not match shape volume " + std::to_string(shape_.size()));
}

Tensor4 Tensor4::scaled(double factor) const {
  Tensor4 out = *this;
  for (double& v : out.data_) v *= factor;
  return out;
}

FeatureMap::FeatureMap(Tensor4 values, Stream stream, VideoSize video)
    : values_(std::move(values)), stream_(stream), video_(video) {
  check_shape(values_.shape());
  if (values_.values().size() != values_.shape().size())
    fail(Errc::structural, "feature map data length mismatch");
  check_video(values_.shape(), video_);
  for (double v : values_.values()) {
    if (!std::isfinite(v)) fail(Errc::input, "feature map holds a non-finite activation");
    if (v < 0.0) fail(Errc::negative_value, "feature map holds a negative activation");
  }
}

NormalizedMap::NormalizedMap(Tensor4 values, Stream stream, NormMode mode, VideoSize video,
                             Unchecked)
    : values_(std::move(values)), stream_(stream), mode_(mode), video_(video) {
  check_shape(values_.shape());
  check_video(values_.shape(), video_);
}

NormalizedMap::NormalizedMap(Tensor4 values, Stream stream, NormMode mode, VideoSize video)
    : NormalizedMap(std::move(values), stream, mode, video, unchecked) {
  for (double v : values_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) fail(Errc::contract, "normalized value outside [0, 1]");
  }
}

WeightMap::WeightMap(Tensor4 values, Stream source, NormMode mode, VideoSize video,
                     std::size_t source_channels)
    : values_(std::move(values)),
      source_(source),
      mode_(mode),
      video_(video),
      source_channels_(source_channels) {
  check_shape(values_.shape());
  if (values_.shape().channels != 1) fail(Errc::structural, "weight map must have one channel");
  check_video(values_.shape(), video_);
}

CrossStreamMap::CrossStreamMap(Tensor4 values, Stream weighted, Stream weighting, NormMode mode,
                               VideoSize video)
    : values_(std::move(values)),
      weighted_(weighted),
      weighting_(weighting),
      mode_(mode),
      video_(video) {
  check_shape(values_.shape());
  check_video(values_.shape(), video_);
}

NormalizedMap spatiotemporal_normalize(const FeatureMap& map) {
  const Shape& s = map.shape();
  const auto src = map.values().values();
  std::vector<double> peak(s.channels, 0.0);
  for (std::size_t cell = 0; cell < s.cells(); ++cell) {
    for (std::size_t n = 0; n < s.channels; ++n)
      peak[n] = std::max(peak[n], src[cell * s.channels + n]);
  }
  Tensor4 out(s, 0.0);
  auto dst = out.values();
  for (std::size_t cell = 0; cell < s.cells(); ++cell) {
    for (std::size_t n = 0; n < s.channels; ++n) {
      const std::size_t i = cell * s.channels + n;
      dst[i] = peak[n] > 0.0 ? src[i] / peak[n] : 0.0;
    }
  }
  return NormalizedMap(std::move(out), map.stream(), NormMode::st, map.video());
}

NormalizedMap channel_normalize(const FeatureMap& map) {
  const Shape& s = map.shape();
  const auto src = map.values().values();
  Tensor4 out(s, 0.0);
  auto dst = out.values();
  for (std::size_t cell = 0; cell < s.cells(); ++cell) {
    const auto fiber = src.subspan(cell * s.channels, s.channels);
    const double peak = *std::max_element(fiber.begin(), fiber.end());
    if (peak <= 0.0) continue;
    for (std::size_t n = 0; n < s.channels; ++n) dst[cell * s.channels + n] = fiber[n] / peak;
  }
  return NormalizedMap(std::move(out), map.stream(), NormMode::ch, map.video());
}

NormalizedMap normalize(const FeatureMap& map, NormMode mode) {
  return mode == NormMode::st ? spatiotemporal_normalize(map) : channel_normalize(map);
}

WeightMap weight_map(const NormalizedMap& normalized) {
  const Shape& s = normalized.shape();
  Shape ws = s;
  ws.channels = 1;
  Tensor4 out(ws, 0.0);
  auto dst = out.values();
  const auto src = normalized.values().values();
  for (std::size_t cell = 0; cell < s.cells(); ++cell) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.channels; ++n) sum += src[cell * s.channels + n];
    dst[cell] = sum;
  }
  return WeightMap(std::move(out), normalized.stream(), normalized.mode(), normalized.video(),
                   s.channels);
}

CrossStreamMap cross_stream(const NormalizedMap& normalized, const WeightMap& weights,
                            CrossOptions options) {
  const Shape& s = normalized.shape();
  if (!s.same_grid(weights.shape()))
    fail(Errc::structural, "weight map grid does not match normalized map grid");
  if (!options.allow_same_stream && weights.source() == normalized.stream())
    fail(Errc::contract, "cross_stream requires weights from the other stream (got " +
                             std::string(to_string(weights.source())) + " on " +
                             std::string(to_string(normalized.stream())) + ")");
  Tensor4 out(s, 0.0);
  auto dst = out.values();
  const auto src = normalized.values().values();
  const auto w = weights.values().values();
  for (std::size_t cell = 0; cell < s.cells(); ++cell) {
    for (std::size_t n = 0; n < s.channels; ++n) {
      const std::size_t i = cell * s.channels + n;
      dst[i] = src[i] * w[cell];
    }
  }
  return CrossStreamMap(std::move(out), normalized.stream(), weights.source(), normalized.mode(),
                        normalized.video());
}

}  // namespace cpd
