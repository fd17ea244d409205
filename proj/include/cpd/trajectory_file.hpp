#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cpd/trajpool.hpp"

namespace cpd {

// Plain text: a header line "V_w V_h T L K", then K lines each holding L
// space-separated "x,y,t" triples. Trajectory ids are the 0-based line ordinals.
TrajectorySet parse_trajectories(std::string_view text);
std::string format_trajectories(const TrajectorySet& set);

TrajectorySet load_trajectories(const std::filesystem::path& path);
void save_trajectories(const TrajectorySet& set, const std::filesystem::path& path);

}  // namespace cpd
