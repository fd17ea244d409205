#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpd/corpus.hpp"
#include "cpd/trajpool.hpp"

namespace cpd {

struct SynthLayer {
  std::string name;
  std::uint32_t width = 14;
  std::uint32_t height = 14;
  std::uint32_t channels = 32;
};

// Class-structured corpus. Every video has one moving hotspot whose
// appearance and motion channels follow the video's class; static clutter
// blobs elsewhere show the appearance patterns of uniformly random classes and
// carry no motion, and sparse activation noise covers both streams. Only the
// hotspot differs between classes.
struct SynthSpec {
  std::size_t classes = 4;
  std::size_t train_per_class = 8;
  std::size_t test_per_class = 6;
  std::uint32_t video_width = 112;
  std::uint32_t video_height = 112;
  std::uint32_t frames = 16;
  std::vector<SynthLayer> layers{{"conv3", 14, 14, 32}, {"conv4", 14, 14, 32}, {"conv5", 7, 7, 32}};
  std::size_t trajectories = 60;
  std::size_t trajectory_length = kDefaultTrajectoryLength;
  double hotspot_share = 0.25;       // fraction of trajectories started on the hotspot
  std::size_t clutter_blobs = 5;
  double hotspot_radius = 0.12;      // fraction of the video width
  double noise_density = 0.05;       // probability a value carries background noise
  double noise_level = 0.35;
  double motion_class_share = 0.5;   // class-specific part of the hotspot motion pattern
  double shake_level = 0.05;         // peak per-frame camera-shake motion
};

struct SynthSummary {
  std::vector<VideoEntry> videos;
  std::size_t files = 0;
};

SynthSummary generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                                const std::filesystem::path& out);

}  // namespace cpd
