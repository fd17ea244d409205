#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpd/tensor.hpp"

namespace cpd {

inline constexpr std::size_t kDefaultTrajectoryLength = 15;

struct TrajectoryPoint {
  std::uint32_t x = 0;  // pixel column
  std::uint32_t y = 0;  // pixel row
  std::uint32_t t = 0;  // frame index
  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct Trajectory {
  std::size_t id = 0;
  std::vector<TrajectoryPoint> points;
};

struct VideoDims {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t frames = 0;
  VideoSize size() const { return {width, height}; }
  friend bool operator==(const VideoDims&, const VideoDims&) = default;
};

// Throws Errc::input naming the trajectory id and offending point index.
void validate_trajectory(const Trajectory& traj, VideoDims dims);

class TrajectorySet {
 public:
  TrajectorySet(VideoDims dims, std::vector<Trajectory> trajectories);

  VideoDims dims() const { return dims_; }
  std::span<const Trajectory> trajectories() const { return trajectories_; }
  std::size_t size() const { return trajectories_.size(); }

 private:
  VideoDims dims_;
  std::vector<Trajectory> trajectories_;
};

struct ScaleRatio {
  double rx = 1.0;
  double ry = 1.0;
};

// (X / V_w, Y / V_h) for a map grid laid over a video frame.
ScaleRatio scale_ratio(const Shape& grid, VideoSize video);

struct Cell {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Scales a pixel into the map grid, rounding half up and clamping to the last cell.
Cell map_point(std::uint32_t x, std::uint32_t y, ScaleRatio ratio, std::size_t grid_width,
               std::size_t grid_height);

enum class DescriptorKind : std::uint8_t { tdd = 0, cpd = 1 };
std::string_view to_string(DescriptorKind kind);
DescriptorKind parse_descriptor_kind(std::string_view text);

struct PooledDescriptor {
  std::vector<double> values;
  std::size_t trajectory_id = 0;
  Stream stream = Stream::spatial;
  NormMode mode = NormMode::st;
  DescriptorKind kind = DescriptorKind::tdd;
};

PooledDescriptor pool_tdd(const Trajectory& traj, const NormalizedMap& normalized, VideoDims dims);

PooledDescriptor pool_cpd_direct(const Trajectory& traj, const CrossStreamMap& crossed,
                                 VideoDims dims);

// Pools the normalized map along the trajectory with each point weighted by the
// other stream's weight map, sampled at the same scaled cell as the map.
PooledDescriptor pool_cpd_weighted(const Trajectory& traj, const NormalizedMap& normalized,
                                   const WeightMap& weights, VideoDims dims,
                                   CrossOptions options = {});

// Normalized maps and weight maps of both streams of one layer.
class LayerMaps {
 public:
  LayerMaps(std::string layer, const FeatureMap& spatial, const FeatureMap& temporal,
            std::span<const NormMode> modes);

  const std::string& layer() const { return layer_; }
  std::span<const NormMode> modes() const { return modes_; }
  const NormalizedMap& normalized(Stream stream, NormMode mode) const;
  const WeightMap& weights(Stream stream, NormMode mode) const;
  VideoSize video() const { return video_; }
  std::size_t frames() const { return frames_; }

 private:
  std::size_t slot(Stream stream, NormMode mode) const;

  std::string layer_;
  std::vector<NormMode> modes_;
  std::vector<NormalizedMap> normalized_;
  std::vector<WeightMap> weights_;
  VideoSize video_;
  std::size_t frames_ = 0;
};

enum class CpdFormulation : std::uint8_t { weighted, direct };

struct PoolConfig {
  std::vector<NormMode> modes{NormMode::st, NormMode::ch};
  std::vector<DescriptorKind> kinds{DescriptorKind::tdd, DescriptorKind::cpd};
  CpdFormulation formulation = CpdFormulation::weighted;
};

struct BlockKey {
  std::string layer;
  Stream stream = Stream::spatial;
  NormMode mode = NormMode::st;
  DescriptorKind kind = DescriptorKind::tdd;

  // e.g. "conv5.sp.st.cpd"
  std::string name() const;
  friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
};

struct DescriptorSet {
  BlockKey key;
  std::vector<PooledDescriptor> descriptors;
  std::size_t dim() const { return descriptors.empty() ? 0 : descriptors.front().values.size(); }
};

// One set per (stream, mode, kind) in that nesting order; descriptors within a
// set follow ascending trajectory id.
std::vector<DescriptorSet> pool_all(const TrajectorySet& trajectories, const LayerMaps& maps,
                                    const PoolConfig& config);

}  // namespace cpd
