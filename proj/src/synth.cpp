#include "cpd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cpd/binary_io.hpp"
#include "cpd/error.hpp"
#include "cpd/rng.hpp"
#include "cpd/tensor_file.hpp"
#include "cpd/trajectory_file.hpp"

namespace cpd {

namespace {

struct Blob {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double radius = 1.0;
  double amplitude = 1.0;
  std::size_t pattern = 0;

  double cx(double t) const { return x + vx * t; }
  double cy(double t) const { return y + vy * t; }
  double falloff(double px, double py, double t) const {
    const double dx = px - cx(t);
    const double dy = py - cy(t);
    const double s = radius / 1.5;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
  }
};

// Appearance prototypes per class; motion prototypes mix a shared pattern with a
// class-specific one.
struct Prototypes {
  std::vector<std::vector<double>> appearance;  // classes x N
  std::vector<std::vector<double>> motion;      // classes x N
  std::vector<double> shake;                    // N, camera-shake motion pattern
};

std::vector<double> random_pattern(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (double& v : p) v = rng.uniform() < 0.4 ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.08);
  return p;
}

Prototypes make_prototypes(const SynthSpec& spec, const SynthLayer& layer, std::uint64_t seed) {
  Rng rng(seed);
  Prototypes p;
  const std::vector<double> shared = random_pattern(rng, layer.channels);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    p.appearance.push_back(random_pattern(rng, layer.channels));
    const std::vector<double> own = random_pattern(rng, layer.channels);
    std::vector<double> motion(layer.channels);
    for (std::size_t n = 0; n < layer.channels; ++n)
      motion[n] = spec.motion_class_share * own[n] + (1.0 - spec.motion_class_share) * shared[n];
    p.motion.push_back(std::move(motion));
  }
  p.shake = random_pattern(rng, layer.channels);
  return p;
}

std::uint32_t clamp_pixel(double v, std::uint32_t extent) {
  const double r = std::floor(v + 0.5);
  if (r < 0.0) return 0;
  return static_cast<std::uint32_t>(std::min(r, static_cast<double>(extent - 1)));
}

}  // namespace

SynthSummary generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                                const std::filesystem::path& out) {
  if (spec.classes < 2) fail(Errc::config, "synthetic corpus needs at least two classes");
  if (spec.layers.empty()) fail(Errc::config, "synthetic corpus needs at least one layer");
  if (spec.trajectory_length == 0 || spec.trajectory_length > spec.frames)
    fail(Errc::config, "trajectory length must be in [1, frames]");
  if (spec.trajectories == 0) fail(Errc::config, "at least one trajectory per video is required");
  for (const SynthLayer& l : spec.layers) {
    if (l.width == 0 || l.height == 0 || l.channels == 0 || l.width > spec.video_width ||
        l.height > spec.video_height)
      fail(Errc::config, "layer " + l.name + " has an invalid grid");
  }

  std::vector<Prototypes> protos;
  for (std::size_t li = 0; li < spec.layers.size(); ++li)
    protos.push_back(make_prototypes(spec, spec.layers[li], mix_seed(seed, 100 + li)));

  SynthSummary summary;
  const double vw = spec.video_width;
  const double vh = spec.video_height;
  const double radius = spec.hotspot_radius * vw;
  std::size_t ordinal = 0;
  for (Split split : {Split::train, Split::test}) {
    const std::size_t per_class = split == Split::train ? spec.train_per_class : spec.test_per_class;
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t c = 0; c < spec.classes; ++c) {
        VideoEntry video;
        std::string digits = std::to_string(ordinal);
        video.id = "v" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
        video.split = split;
        video.label = static_cast<int>(c);
        Rng rng(mix_seed(seed, 10000 + ordinal));
        ++ordinal;

        Blob hot;
        hot.x = rng.uniform(0.3, 0.7) * vw;
        hot.y = rng.uniform(0.3, 0.7) * vh;
        hot.vx = rng.uniform(-1.0, 1.0);
        hot.vy = rng.uniform(-1.0, 1.0);
        hot.radius = radius;
        hot.amplitude = rng.uniform(0.8, 1.2);
        hot.pattern = c;

        std::vector<Blob> clutter;
        while (clutter.size() < spec.clutter_blobs) {
          Blob b;
          b.x = rng.uniform(0.05, 0.95) * vw;
          b.y = rng.uniform(0.05, 0.95) * vh;
          b.radius = radius * rng.uniform(0.8, 1.2);
          b.amplitude = rng.uniform(0.8, 1.2);
          b.pattern = static_cast<std::size_t>(rng.below(spec.classes));
          const double dx = b.x - hot.x;
          const double dy = b.y - hot.y;
          if (std::sqrt(dx * dx + dy * dy) < 2.0 * radius) continue;
          clutter.push_back(b);
        }
        std::vector<double> shake(spec.frames);
        for (double& s : shake) s = rng.uniform(0.0, spec.shake_level);

        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
          const SynthLayer& layer = spec.layers[li];
          const Prototypes& p = protos[li];
          const Shape shape{layer.width, layer.height, layer.channels, spec.frames};
          Tensor4 spatial(shape, 0.0);
          Tensor4 temporal(shape, 0.0);
          const double sx = vw / layer.width;
          const double sy = vh / layer.height;
          for (std::size_t t = 0; t < spec.frames; ++t) {
            for (std::size_t y = 0; y < layer.height; ++y) {
              for (std::size_t x = 0; x < layer.width; ++x) {
                const double px = static_cast<double>(x) * sx;
                const double py = static_cast<double>(y) * sy;
                const double td = static_cast<double>(t);
                const double h = hot.amplitude * hot.falloff(px, py, td);
                auto sp = spatial.fiber(x, y, t);
                auto tm = temporal.fiber(x, y, t);
                for (std::size_t n = 0; n < layer.channels; ++n) {
                  double a = h * p.appearance[c][n];
                  for (const Blob& b : clutter)
                    a += b.amplitude * b.falloff(px, py, td) * p.appearance[b.pattern][n];
                  if (rng.uniform() < spec.noise_density) a += rng.uniform(0.0, spec.noise_level);
                  double m = h * p.motion[c][n] + shake[t] * p.shake[n] * 0.5;
                  if (rng.uniform() < spec.noise_density) m += rng.uniform(0.0, spec.noise_level);
                  sp[n] = a;
                  tm[n] = m;
                }
              }
            }
          }
          const VideoSize vs{spec.video_width, spec.video_height};
          save_tensor(spatial, Stream::spatial, vs, map_path(out, video, layer.name, "sp"));
          save_tensor(temporal, Stream::temporal, vs, map_path(out, video, layer.name, "tmp"));
          summary.files += 2;
        }

        std::vector<Trajectory> trajs;
        const auto hot_count = static_cast<std::size_t>(
            std::llround(spec.hotspot_share * static_cast<double>(spec.trajectories)));
        const std::size_t starts = spec.frames - spec.trajectory_length + 1;
        for (std::size_t k = 0; k < spec.trajectories; ++k) {
          Trajectory traj;
          traj.id = k;
          const auto t0 = static_cast<std::uint32_t>(rng.below(starts));
          double x, y, vx, vy;
          if (k < hot_count) {
            const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double rr = radius * 0.6 * std::sqrt(rng.uniform());
            x = hot.cx(t0) + rr * std::cos(ang);
            y = hot.cy(t0) + rr * std::sin(ang);
            vx = hot.vx;
            vy = hot.vy;
          } else {
            x = rng.uniform(0.0, vw - 1.0);
            y = rng.uniform(0.0, vh - 1.0);
            vx = 0.0;
            vy = 0.0;
          }
          for (std::size_t l = 0; l < spec.trajectory_length; ++l) {
            traj.points.push_back({clamp_pixel(x, spec.video_width), clamp_pixel(y, spec.video_height),
                                   static_cast<std::uint32_t>(t0 + l)});
            x += vx + rng.uniform(-0.5, 0.5);
            y += vy + rng.uniform(-0.5, 0.5);
          }
          trajs.push_back(std::move(traj));
        }
        save_trajectories(TrajectorySet({spec.video_width, spec.video_height, spec.frames}, std::move(trajs)),
                          trajectory_path(out, video));
        ++summary.files;
        summary.videos.push_back(std::move(video));
      }
    }
  }
  write_text_atomic(out / kManifestName, format_manifest(summary.videos));
  return summary;
}

}  // namespace cpd
