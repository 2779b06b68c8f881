#include "videogem/grounding.hpp"

#include "videogem/ops.hpp"

#include <algorithm>
#include <cmath>

namespace videogem {

std::vector<int> sample_frame_indices(int labeled_index, int frame_count, int clip_length, FrameMode mode) {
  if (clip_length < 1) throw InvalidInput("clip length must be >= 1");
  if (frame_count < 1) throw InvalidInput("media has no frames");
  if (labeled_index < 0 || labeled_index >= frame_count) {
    throw InvalidInput("labeled frame " + std::to_string(labeled_index) + " outside [0, " +
                       std::to_string(frame_count) + ")");
  }
  std::vector<int> indices(static_cast<std::size_t>(clip_length), labeled_index);
  if (mode == FrameMode::repeated_image) return indices;
  const int before = target_position(clip_length, mode);
  for (int i = 0; i < clip_length; ++i) {
    indices[static_cast<std::size_t>(i)] = std::clamp(labeled_index - before + i, 0, frame_count - 1);
  }
  return indices;
}

int target_position(int clip_length, FrameMode mode) {
  return mode == FrameMode::video ? clip_length / 2 : 0;
}

VectorXd patch_text_similarity(const MatrixXd& tokens, const TextEmbedding& text, const JointProjection& joint) {
  if (tokens.rows() < 2) throw InvalidInput("similarity: no patch tokens");
  if (tokens.cols() != joint.proj.rows()) throw InvalidInput("similarity: token width does not match projection");
  if (text.vector.size() != joint.proj.cols()) throw InvalidInput("similarity: text width does not match joint space");
  const MatrixXd projected = joint.map_rows(tokens.bottomRows(tokens.rows() - 1));
  VectorXd s(projected.rows());
  for (Index i = 0; i < projected.rows(); ++i) s(i) = cosine(projected.row(i).transpose(), text.vector);
  return s;
}

MatrixXd bilinear_resize(const MatrixXd& grid, int out_height, int out_width) {
  if (grid.size() == 0 || out_height < 1 || out_width < 1) throw InvalidInput("resize: empty grid or target");
  const Index in_h = grid.rows(), in_w = grid.cols();
  auto source = [](int dst, Index in, int out) {
    const double s = (dst + 0.5) * static_cast<double>(in) / out - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(in - 1));
  };
  MatrixXd out(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    const double sy = source(y, in_h, out_height);
    const Index y0 = static_cast<Index>(std::floor(sy));
    const Index y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (int x = 0; x < out_width; ++x) {
      const double sx = source(x, in_w, out_width);
      const Index x0 = static_cast<Index>(std::floor(sx));
      const Index x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = (1.0 - fx) * grid(y0, x0) + fx * grid(y0, x1);
      const double bottom = (1.0 - fx) * grid(y1, x0) + fx * grid(y1, x1);
      out(y, x) = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

Heatmap min_max_normalize(const MatrixXd& grid) {
  if (grid.size() == 0) throw InvalidInput("normalize: empty grid");
  const double lo = grid.minCoeff(), hi = grid.maxCoeff();
  if (!(hi > lo)) return Heatmap{MatrixXd::Zero(grid.rows(), grid.cols())};
  return Heatmap{((grid.array() - lo) / (hi - lo)).matrix()};
}

Heatmap heatmap_for_target_frame(const VectorXd& similarities, int target_frame, int grid_rows, int grid_cols,
                                 int frame_height, int frame_width) {
  const Index n = static_cast<Index>(grid_rows) * grid_cols;
  if (n < 1) throw InvalidInput("heatmap: empty patch grid");
  if (similarities.size() % n != 0) throw InvalidInput("heatmap: score count is not a multiple of N");
  const Index frames = similarities.size() / n;
  if (target_frame < 0 || target_frame >= frames) throw InvalidInput("heatmap: target frame out of range");
  MatrixXd patch_grid(grid_rows, grid_cols);
  for (int r = 0; r < grid_rows; ++r)
    for (int c = 0; c < grid_cols; ++c) patch_grid(r, c) = similarities(target_frame * n + r * grid_cols + c);
  return min_max_normalize(bilinear_resize(patch_grid, frame_height, frame_width));
}

Heatmap heatmap_for_target_frame(const VectorXd& similarities, const FrameBatch& batch,
                                 const BackboneDescriptor& backbone) {
  if (similarities.size() != static_cast<Index>(batch.frame_count()) * backbone.patch_count()) {
    throw InvalidInput("heatmap: expected T*N = " +
                       std::to_string(batch.frame_count() * backbone.patch_count()) + " scores");
  }
  return heatmap_for_target_frame(similarities, batch.target_index, backbone.grid_rows, backbone.grid_cols,
                                  batch.height(), batch.width());
}

CenterPrediction predict_center(const Heatmap& map, std::string source) {
  if (map.grid.size() == 0) throw InvalidInput("predict: empty heatmap");
  Index best_r = 0, best_c = 0;
  double best = map.grid(0, 0);
  for (Index r = 0; r < map.grid.rows(); ++r) {
    for (Index c = 0; c < map.grid.cols(); ++c) {
      if (map.grid(r, c) > best) {
        best = map.grid(r, c);
        best_r = r;
        best_c = c;
      }
    }
  }
  return CenterPrediction{static_cast<double>(best_c), static_cast<double>(best_r), std::move(source)};
}

}  // namespace videogem
