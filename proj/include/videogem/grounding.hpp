#pragma once

#include "videogem/backbone.hpp"

#include <string>
#include <vector>

namespace videogem {

/// Min-max normalized map over the pixels of the target frame.
struct Heatmap {
  MatrixXd grid;  // height x width

  int width() const { return static_cast<int>(grid.cols()); }
  int height() const { return static_cast<int>(grid.rows()); }
};

/// Pixel location, x to the right and y downward.
struct CenterPrediction {
  double x = 0.0;
  double y = 0.0;
  std::string source;
};

/// Indices of the frames that make up a clip around `labeled_index`.
///
/// Video mode takes T/2 frames before and T-1-T/2 after the labeled frame
/// (4 before, 3 after for T = 8), clamping out-of-range indices to the first
/// or last frame. Repeated-image mode returns the labeled index T times.
/// The labeled frame always sits at position T/2 in video mode, 0 otherwise.
std::vector<int> sample_frame_indices(int labeled_index, int frame_count, int clip_length, FrameMode mode);

/// Position of the labeled frame inside a clip built by sample_frame_indices.
int target_position(int clip_length, FrameMode mode);

/// Cosine similarity between every patch token (CLS row excluded) mapped to
/// the joint space and the text embedding.
VectorXd patch_text_similarity(const MatrixXd& tokens, const TextEmbedding& text, const JointProjection& joint);

/// Bilinear resize with half-pixel centers and edge clamping (the
/// align_corners=false convention).
MatrixXd bilinear_resize(const MatrixXd& grid, int out_height, int out_width);

/// (x - min) / (max - min); a constant field maps to all zeros.
Heatmap min_max_normalize(const MatrixXd& grid);

/// Target frame's N scores reshaped to the patch grid, upsampled to the frame
/// size and min-max normalized.
Heatmap heatmap_for_target_frame(const VectorXd& similarities, int target_frame, int grid_rows, int grid_cols,
                                 int frame_height, int frame_width);
Heatmap heatmap_for_target_frame(const VectorXd& similarities, const FrameBatch& batch,
                                 const BackboneDescriptor& backbone);

/// Argmax pixel; ties go to the lowest row-major index.
CenterPrediction predict_center(const Heatmap& map, std::string source = {});

}  // namespace videogem
