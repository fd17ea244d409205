#include "cpd/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpd/binary_io.hpp"
#include "cpd/error.hpp"

namespace cpd {

std::vector<std::uint8_t> weightmap_pgm(const WeightMap& weights, std::size_t frame) {
  const Shape& s = weights.shape();
  if (frame >= s.frames)
    fail(Errc::input, "frame " + std::to_string(frame) + " outside weight map with " +
                          std::to_string(s.frames) + " frames");
  double lo = weights(0, 0, frame);
  double hi = lo;
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t x = 0; x < s.width; ++x) {
      lo = std::min(lo, weights(x, y, frame));
      hi = std::max(hi, weights(x, y, frame));
    }
  }
  ByteWriter w;
  w.raw("P5\n" + std::to_string(s.width) + " " + std::to_string(s.height) + "\n255\n");
  const double range = hi - lo;
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t x = 0; x < s.width; ++x) {
      double v = 0.0;
      if (range > 0.0) v = std::floor((weights(x, y, frame) - lo) / range * 255.0 + 0.5);
      w.u8(static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)));
    }
  }
  return w.take();
}

void export_weightmap_image(const WeightMap& weights, std::size_t frame,
                            const std::filesystem::path& path) {
  write_file_atomic(path, weightmap_pgm(weights, frame));
}

}  // namespace cpd
