#pragma once

// Frame decoding and image export. A media path is one of:
//   - a directory of still images, frames ordered by file name
//   - a single still image (one frame)
//   - a video file decodable by OpenCV

#include "videogem/backbone.hpp"
#include "videogem/grounding.hpp"

#include <filesystem>
#include <memory>
#include <vector>

namespace videogem {

class MediaSource {
 public:
  /// Throws IoError when the path is missing or undecodable.
  static MediaSource open(const std::filesystem::path& path);

  int frame_count() const { return frame_count_; }
  const std::filesystem::path& path() const { return path_; }

  /// Decodes the requested frames (repeats allowed) as 8-bit RGB.
  std::vector<Image> read_frames(const std::vector<int>& indices) const;

 private:
  enum class Kind { directory, image, video };
  Kind kind_ = Kind::image;
  std::filesystem::path path_;
  std::vector<std::filesystem::path> files_;
  int frame_count_ = 0;
};

/// Builds the clip around `labeled_index` and decodes it.
FrameBatch sample_frames(const MediaSource& media, int labeled_index, int clip_length, FrameMode mode);

Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

/// Heatmap as 8-bit grayscale, value v stored as round(255 v).
void write_heatmap_image(const Heatmap& map, const std::filesystem::path& path);

/// Heatmap color-mapped and alpha-blended over the frame.
void write_overlay(const Image& frame, const Heatmap& map, const std::filesystem::path& path, double alpha = 0.5);

}  // namespace videogem
