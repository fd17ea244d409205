#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cpd/tensor.hpp"

namespace cpd {

// One frame of a weight map min-max scaled to 0..255 (round half up) as a
// binary PGM. A constant frame renders black.
std::vector<std::uint8_t> weightmap_pgm(const WeightMap& weights, std::size_t frame);

void export_weightmap_image(const WeightMap& weights, std::size_t frame,
                            const std::filesystem::path& path);

}  // namespace cpd
