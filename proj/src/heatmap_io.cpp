#include "videogem/heatmap_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace videogem {

namespace {

constexpr char kMagic[8] = {'V', 'G', 'E', 'M', 'H', 'E', 'A', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_heatmap_raw(const Heatmap& map) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(map.grid(y, x))));
  return out;
}

Heatmap decode_heatmap_raw(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw ParseError("not a heatmap sidecar", 0);
  const std::uint32_t h = get_u32(bytes.data() + 8), w = get_u32(bytes.data() + 12);
  if (bytes.size() != 16 + 4 * static_cast<std::size_t>(h) * w) throw ParseError("heatmap sidecar size mismatch", 0);
  Heatmap map{MatrixXd(h, w)};
  const std::uint8_t* p = bytes.data() + 16;
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x, p += 4) map.grid(y, x) = std::bit_cast<float>(get_u32(p));
  return map;
}

void write_heatmap_raw(const Heatmap& map, const std::filesystem::path& path) {
  const auto bytes = encode_heatmap_raw(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Heatmap read_heatmap_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_heatmap_raw(bytes);
}

}  // namespace videogem
