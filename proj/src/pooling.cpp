#include <algorithm>
#include <optional>
#include <string>

#include "cpd/error.hpp"
#include "cpd/trajpool.hpp"

namespace cpd {

namespace {

void check_inputs(const Trajectory& traj, const Shape& shape, VideoSize video, VideoDims dims) {
  if (video != dims.size())
    fail(Errc::structural, "map video size does not match trajectory video size");
  for (std::size_t l = 0; l < traj.points.size(); ++l) {
    const TrajectoryPoint& p = traj.points[l];
    if (p.t >= shape.frames)
      fail(Errc::input, "trajectory " + std::to_string(traj.id) + ", point " +
                            std::to_string(l) + ": frame " + std::to_string(p.t) +
                            " beyond map with " + std::to_string(shape.frames) + " frames");
    if (p.x >= dims.width || p.y >= dims.height)
      fail(Errc::input, "trajectory " + std::to_string(traj.id) + ", point " +
                            std::to_string(l) + ": position outside the video frame");
  }
}

// Ascending-l accumulation; pool_cpd_weighted mirrors this loop exactly.
std::vector<double> pool_tensor(const Trajectory& traj, const Tensor4& values, VideoSize video) {
  const Shape& s = values.shape();
  const ScaleRatio ratio = scale_ratio(s, video);
  std::vector<double> acc(s.channels, 0.0);
  for (const TrajectoryPoint& p : traj.points) {
    const Cell c = map_point(p.x, p.y, ratio, s.width, s.height);
    const auto fiber = values.fiber(c.i, c.j, p.t);
    for (std::size_t n = 0; n < s.channels; ++n) acc[n] += fiber[n];
  }
  return acc;
}

}  // namespace

PooledDescriptor pool_tdd(const Trajectory& traj, const NormalizedMap& normalized, VideoDims dims) {
  check_inputs(traj, normalized.shape(), normalized.video(), dims);
  return {pool_tensor(traj, normalized.values(), normalized.video()), traj.id,
          normalized.stream(), normalized.mode(), DescriptorKind::tdd};
}

PooledDescriptor pool_cpd_direct(const Trajectory& traj, const CrossStreamMap& crossed,
                                 VideoDims dims) {
  check_inputs(traj, crossed.shape(), crossed.video(), dims);
  return {pool_tensor(traj, crossed.values(), crossed.video()), traj.id, crossed.weighted(),
          crossed.mode(), DescriptorKind::cpd};
}

PooledDescriptor pool_cpd_weighted(const Trajectory& traj, const NormalizedMap& normalized,
                                   const WeightMap& weights, VideoDims dims,
                                   CrossOptions options) {
  const Shape& s = normalized.shape();
  if (!s.same_grid(weights.shape()))
    fail(Errc::structural, "weight map grid does not match normalized map grid");
  if (!options.allow_same_stream && weights.source() == normalized.stream())
    fail(Errc::contract, "weighted pooling requires weights from the other stream");
  check_inputs(traj, s, normalized.video(), dims);

  const ScaleRatio ratio = scale_ratio(s, normalized.video());
  std::vector<double> acc(s.channels, 0.0);
  for (const TrajectoryPoint& p : traj.points) {
    const Cell c = map_point(p.x, p.y, ratio, s.width, s.height);
    const double w = weights(c.i, c.j, p.t);
    const auto fiber = normalized.values().fiber(c.i, c.j, p.t);
    for (std::size_t n = 0; n < s.channels; ++n) acc[n] += fiber[n] * w;
  }
  return {std::move(acc), traj.id, normalized.stream(), normalized.mode(), DescriptorKind::cpd};
}

LayerMaps::LayerMaps(std::string layer, const FeatureMap& spatial, const FeatureMap& temporal,
                     std::span<const NormMode> modes)
    : layer_(std::move(layer)), modes_(modes.begin(), modes.end()) {
  if (spatial.stream() != Stream::spatial || temporal.stream() != Stream::temporal)
    fail(Errc::contract, "layer " + layer_ + ": expected one spatial and one temporal map");
  if (spatial.shape() != temporal.shape())
    fail(Errc::structural, "layer " + layer_ + ": spatial and temporal map shapes differ");
  if (spatial.video() != temporal.video())
    fail(Errc::structural, "layer " + layer_ + ": spatial and temporal video sizes differ");
  if (modes_.empty()) fail(Errc::config, "at least one norm mode is required");
  video_ = spatial.video();
  frames_ = spatial.shape().frames;
  for (const FeatureMap* map : {&spatial, &temporal}) {
    for (NormMode mode : modes_) {
      normalized_.push_back(normalize(*map, mode));
      weights_.push_back(weight_map(normalized_.back()));
    }
  }
}

std::size_t LayerMaps::slot(Stream stream, NormMode mode) const {
  const auto it = std::find(modes_.begin(), modes_.end(), mode);
  if (it == modes_.end())
    fail(Errc::config, "norm mode " + std::string(to_string(mode)) + " was not prepared");
  const std::size_t base = stream == Stream::spatial ? 0 : modes_.size();
  return base + static_cast<std::size_t>(it - modes_.begin());
}

const NormalizedMap& LayerMaps::normalized(Stream stream, NormMode mode) const {
  return normalized_[slot(stream, mode)];
}

const WeightMap& LayerMaps::weights(Stream stream, NormMode mode) const {
  return weights_[slot(stream, mode)];
}

std::vector<DescriptorSet> pool_all(const TrajectorySet& trajectories, const LayerMaps& maps,
                                    const PoolConfig& config) {
  const VideoDims dims = trajectories.dims();
  if (dims.size() != maps.video())
    fail(Errc::structural, "layer " + maps.layer() + ": map video size differs from trajectories");
  if (dims.frames != maps.frames())
    fail(Errc::structural, "layer " + maps.layer() + ": map has " + std::to_string(maps.frames()) +
                               " frames but the video has " + std::to_string(dims.frames));

  std::vector<DescriptorSet> out;
  for (Stream stream : {Stream::spatial, Stream::temporal}) {
    for (NormMode mode : config.modes) {
      const NormalizedMap& own = maps.normalized(stream, mode);
      const WeightMap& other = maps.weights(complement(stream), mode);
      for (DescriptorKind kind : config.kinds) {
        DescriptorSet set{{maps.layer(), stream, mode, kind}, {}};
        set.descriptors.reserve(trajectories.size());
        // Direct formulation materializes the crossed map once per block.
        std::optional<CrossStreamMap> crossed;
        if (kind == DescriptorKind::cpd && config.formulation == CpdFormulation::direct)
          crossed.emplace(cross_stream(own, other));
        for (const Trajectory& traj : trajectories.trajectories()) {
          try {
            if (kind == DescriptorKind::tdd)
              set.descriptors.push_back(pool_tdd(traj, own, dims));
            else if (crossed)
              set.descriptors.push_back(pool_cpd_direct(traj, *crossed, dims));
            else
              set.descriptors.push_back(pool_cpd_weighted(traj, own, other, dims));
          } catch (const Error& e) {
            throw Error(e.code(), set.key.name() + " trajectory " + std::to_string(traj.id) +
                                      ": " + e.what());
          }
        }
        out.push_back(std::move(set));
      }
    }
  }
  return out;
}

}  // namespace cpd
