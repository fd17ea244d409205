#include <algorithm>
#include <cmath>
#include <string>

#include "cpd/error.hpp"
#include "cpd/trajpool.hpp"

namespace cpd {

void validate_trajectory(const Trajectory& traj, VideoDims dims) {
  const std::string who = "trajectory " + std::to_string(traj.id);
  if (traj.points.empty()) fail(Errc::input, who + ": no points");
  for (std::size_t l = 0; l < traj.points.size(); ++l) {
    const TrajectoryPoint& p = traj.points[l];
    const std::string where = who + ", point " + std::to_string(l);
    if (p.x >= dims.width || p.y >= dims.height)
      fail(Errc::input, where + ": position (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") outside " + std::to_string(dims.width) +
                            "x" + std::to_string(dims.height) + " frame");
    if (p.t >= dims.frames)
      fail(Errc::input, where + ": frame " + std::to_string(p.t) + " outside video of " +
                            std::to_string(dims.frames) + " frames");
    if (l > 0 && p.t != traj.points[l - 1].t + 1)
      fail(Errc::input, where + ": frame indices must advance by exactly one");
  }
}

TrajectorySet::TrajectorySet(VideoDims dims, std::vector<Trajectory> trajectories)
    : dims_(dims), trajectories_(std::move(trajectories)) {
  if (dims_.width == 0 || dims_.height == 0 || dims_.frames == 0)
    fail(Errc::input, "video dimensions must be positive");
  for (const Trajectory& traj : trajectories_) validate_trajectory(traj, dims_);
  std::stable_sort(trajectories_.begin(), trajectories_.end(),
                   [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
  for (std::size_t k = 1; k < trajectories_.size(); ++k) {
    if (trajectories_[k].id == trajectories_[k - 1].id)
      fail(Errc::input, "duplicate trajectory id " + std::to_string(trajectories_[k].id));
  }
}

ScaleRatio scale_ratio(const Shape& grid, VideoSize video) {
  return {static_cast<double>(grid.width) / static_cast<double>(video.width),
          static_cast<double>(grid.height) / static_cast<double>(video.height)};
}

namespace {

std::size_t round_clamp(double v, std::size_t extent) {
  const double r = std::floor(v + 0.5);
  if (r <= 0.0) return 0;
  const auto idx = static_cast<std::size_t>(r);
  return std::min(idx, extent - 1);
}

}  // namespace

Cell map_point(std::uint32_t x, std::uint32_t y, ScaleRatio ratio, std::size_t grid_width,
               std::size_t grid_height) {
  return {round_clamp(ratio.rx * static_cast<double>(x), grid_width),
          round_clamp(ratio.ry * static_cast<double>(y), grid_height)};
}

std::string_view to_string(DescriptorKind kind) {
  return kind == DescriptorKind::tdd ? "tdd" : "cpd";
}

DescriptorKind parse_descriptor_kind(std::string_view text) {
  if (text == "tdd") return DescriptorKind::tdd;
  if (text == "cpd") return DescriptorKind::cpd;
  fail(Errc::parse, "unknown descriptor kind '" + std::string(text) + "'");
}

std::string BlockKey::name() const {
  return layer + "." + std::string(to_string(stream)) + "." + std::string(to_string(mode)) + "." +
         std::string(to_string(kind));
}

}  // namespace cpd
