#include "videogem/media.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace videogem {

namespace {

const std::set<std::string> kImageExtensions = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".pnm", ".tif", ".tiff"};

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

Image from_mat(const cv::Mat& bgr) {
  cv::Mat rgb;
  if (bgr.channels() == 1) {
    cv::cvtColor(bgr, rgb, cv::COLOR_GRAY2RGB);
  } else if (bgr.channels() == 4) {
    cv::cvtColor(bgr, rgb, cv::COLOR_BGRA2RGB);
  } else {
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  }
  if (rgb.depth() != CV_8U) rgb.convertTo(rgb, CV_8U);
  Image img(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    std::copy(row, row + static_cast<std::ptrdiff_t>(rgb.cols) * 3, img.rgb.begin() + static_cast<std::ptrdiff_t>(y) * rgb.cols * 3);
  }
  return img;
}

cv::Mat to_bgr(const Image& img) {
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

cv::Mat heatmap_gray(const Heatmap& map) {
  cv::Mat gray(map.height(), map.width(), CV_8UC1);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const double v = std::clamp(map.grid(y, x), 0.0, 1.0);
      gray.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  return gray;
}

void write_mat(const cv::Mat& m, const std::filesystem::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot decode image " + path.string());
  return from_mat(m);
}

void write_image(const Image& image, const std::filesystem::path& path) { write_mat(to_bgr(image), path); }

MediaSource MediaSource::open(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw IoError("media not found: " + path.string());
  MediaSource m;
  m.path_ = path;
  if (std::filesystem::is_directory(path)) {
    m.kind_ = Kind::directory;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && kImageExtensions.contains(lower_extension(entry.path()))) {
        m.files_.push_back(entry.path());
      }
    }
    std::sort(m.files_.begin(), m.files_.end());
    if (m.files_.empty()) throw IoError("no image frames in " + path.string());
    m.frame_count_ = static_cast<int>(m.files_.size());
  } else if (kImageExtensions.contains(lower_extension(path))) {
    m.kind_ = Kind::image;
    m.frame_count_ = 1;
  } else {
    m.kind_ = Kind::video;
    cv::VideoCapture cap(path.string());
    if (!cap.isOpened()) throw IoError("cannot open video " + path.string());
    int count = 0;
    cv::Mat frame;
    while (cap.read(frame)) ++count;
    if (count == 0) throw IoError("video has no decodable frames: " + path.string());
    m.frame_count_ = count;
  }
  return m;
}

std::vector<Image> MediaSource::read_frames(const std::vector<int>& indices) const {
  for (int i : indices)
    if (i < 0 || i >= frame_count_) throw InvalidInput("frame index " + std::to_string(i) + " out of range");

  std::vector<Image> out;
  out.reserve(indices.size());
  switch (kind_) {
    case Kind::image: {
      const Image img = read_image(path_);
      out.assign(indices.size(), img);
      break;
    }
    case Kind::directory: {
      std::map<int, Image> cache;
      for (int i : indices) {
        auto it = cache.find(i);
        if (it == cache.end()) it = cache.emplace(i, read_image(files_[static_cast<std::size_t>(i)])).first;
        out.push_back(it->second);
      }
      break;
    }
    case Kind::video: {
      std::map<int, Image> decoded;
      const int last = *std::max_element(indices.begin(), indices.end());
      const std::set<int> wanted(indices.begin(), indices.end());
      cv::VideoCapture cap(path_.string());
      if (!cap.isOpened()) throw IoError("cannot open video " + path_.string());
      cv::Mat frame;
      for (int i = 0; i <= last; ++i) {
        if (!cap.read(frame)) throw IoError("video ended before frame " + std::to_string(i));
        if (wanted.contains(i)) decoded.emplace(i, from_mat(frame));
      }
      for (int i : indices) out.push_back(decoded.at(i));
      break;
    }
  }
  return out;
}

FrameBatch sample_frames(const MediaSource& media, int labeled_index, int clip_length, FrameMode mode) {
  const auto indices = sample_frame_indices(labeled_index, media.frame_count(), clip_length, mode);
  FrameBatch batch{media.read_frames(indices), target_position(clip_length, mode), mode};
  batch.validate();
  return batch;
}

void write_heatmap_image(const Heatmap& map, const std::filesystem::path& path) { write_mat(heatmap_gray(map), path); }

void write_overlay(const Image& frame, const Heatmap& map, const std::filesystem::path& path, double alpha) {
  if (frame.width != map.width() || frame.height != map.height()) throw InvalidInput("overlay: size mismatch");
  cv::Mat colored;
  cv::applyColorMap(heatmap_gray(map), colored, cv::COLORMAP_JET);
  cv::Mat blended;
  cv::addWeighted(to_bgr(frame), 1.0 - alpha, colored, alpha, 0.0, blended);
  write_mat(blended, path);
}

}  // namespace videogem
