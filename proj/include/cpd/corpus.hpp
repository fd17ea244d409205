#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cpd {

enum class Split { train, test };
std::string_view to_string(Split s);

struct VideoEntry {
  std::string id;
  Split split = Split::train;
  int label = 0;
};

// <corpus>/manifest.txt: '#' comments, then one "video_id split label" per line.
// Each video directory <corpus>/<video_id>/ holds trajectories.txt and one
// <layer>.sp.cpdt / <layer>.tmp.cpdt pair per layer.
inline constexpr std::string_view kManifestName = "manifest.txt";
inline constexpr std::string_view kTrajectoryFileName = "trajectories.txt";

std::vector<VideoEntry> parse_manifest(std::string_view text);
std::string format_manifest(const std::vector<VideoEntry>& videos);
std::vector<VideoEntry> load_manifest(const std::filesystem::path& corpus);

std::filesystem::path map_path(const std::filesystem::path& corpus, const VideoEntry& video,
                               std::string_view layer, std::string_view stream);
std::filesystem::path trajectory_path(const std::filesystem::path& corpus, const VideoEntry& video);

}  // namespace cpd
