#pragma once

// Raw heatmap sidecar: a 16-byte header followed by H*W float32 values in
// row-major order, all little-endian.
//
//   offset  size  field
//   0       8     magic "VGEMHEAT"
//   8       4     height (u32)
//   12      4     width (u32)
//   16      4*H*W values

#include "videogem/grounding.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace videogem {

std::vector<std::uint8_t> encode_heatmap_raw(const Heatmap& map);
Heatmap decode_heatmap_raw(const std::vector<std::uint8_t>& bytes);

void write_heatmap_raw(const Heatmap& map, const std::filesystem::path& path);
Heatmap read_heatmap_raw(const std::filesystem::path& path);

}  // namespace videogem
