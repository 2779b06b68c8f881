#pragma once

#include "videogem/common.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace videogem {

/// Shape of a frozen vision-language backbone.
struct BackboneDescriptor {
  int layer_count = 0;
  int embed_dim = 0;
  int head_count = 0;
  int head_dim = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  /// 1 for image backbones, 8 for the video backbone.
  int native_frame_count = 1;
  /// Width of the shared image-text space.
  int joint_dim = 0;
  /// Fixture path or external adapter handle.
  std::string weight_source;

  int patch_count() const { return grid_rows * grid_cols; }
  bool is_video() const { return native_frame_count > 1; }

  /// Throws InvalidInput when the dims are inconsistent.
  void validate() const;
};

/// 8-bit interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

enum class FrameMode { video, repeated_image };

struct FrameBatch {
  std::vector<Image> frames;
  /// Position of the labeled frame inside `frames`.
  int target_index = 0;
  FrameMode mode = FrameMode::video;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }

  void validate() const;
};

/// Attention-side weights of one block, shared by the self-self pathway.
struct AttentionWeights {
  VectorXd ln_gain;
  VectorXd ln_bias;
  MatrixXd w_q;  // d x (h*d_h)
  MatrixXd w_k;
  MatrixXd w_v;
  MatrixXd w_out;  // (h*d_h) x d
  VectorXd b_out;
};

/// Visual-to-joint map: final layer norm followed by the visual projection.
struct JointProjection {
  VectorXd ln_gain;
  VectorXd ln_bias;
  MatrixXd proj;  // d x joint_dim

  VectorXd map(const VectorXd& token) const;
  MatrixXd map_rows(const MatrixXd& tokens) const;
};

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Row-wise layer norm.
MatrixXd layer_norm(const MatrixXd& x, const VectorXd& gain, const VectorXd& bias,
                    double eps = kLayerNormEpsilon);

/// Activations captured during one forward pass.
///
/// Token layout: row 0 is the single CLS token, then patches frame-major and
/// row-major within a frame, so patch (t, r, c) sits at 1 + t*N + r*cols + c.
struct LayerTrace {
  BackboneDescriptor descriptor;
  int frame_count = 0;
  /// X^0 .. X^L.
  std::vector<MatrixXd> layer_outputs;
  /// Y^1 .. Y^L stored at index l-1, so X^l = X^{l-1} + Y^l.
  std::vector<MatrixXd> pre_residual;
  /// Row l-1 holds the CLS residual of layer l. Row 0 also carries the CLS
  /// embedding of X^0, so the rows sum exactly to the final CLS token.
  MatrixXd cls_residuals;
  /// Per-layer attention weights at index l-1.
  std::vector<AttentionWeights> attention;
  JointProjection joint;

  int layer_count() const { return static_cast<int>(pre_residual.size()); }
  Index token_count() const { return layer_outputs.empty() ? 0 : layer_outputs.front().rows(); }
  const MatrixXd& X(int l) const { return layer_outputs.at(static_cast<std::size_t>(l)); }
  const MatrixXd& Y(int l) const { return pre_residual.at(static_cast<std::size_t>(l - 1)); }
  const AttentionWeights& weights(int l) const { return attention.at(static_cast<std::size_t>(l - 1)); }
  VectorXd cls_final() const { return layer_outputs.back().row(0).transpose(); }
  /// Joint-space embedding of the final CLS token.
  VectorXd cls_joint() const { return joint.map(cls_final()); }
};

struct TextEmbedding {
  /// Unnormalized joint-space vector.
  VectorXd vector;
  std::string source_prompt;
};

/// Uniform interface over frozen backbones. Forwards are const but an
/// implementation may hold scratch state; use one instance per worker unless
/// the implementation documents otherwise.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual const BackboneDescriptor& descriptor() const = 0;
  virtual LayerTrace forward_with_trace(const FrameBatch& batch) const = 0;
  virtual TextEmbedding encode_text(std::string_view prompt) const = 0;
  /// Whether concurrent forwards on one instance are safe.
  virtual bool thread_safe() const { return false; }
};

inline LayerTrace forward_with_trace(const FrameBatch& batch, const Backbone& backbone) {
  return backbone.forward_with_trace(batch);
}

inline TextEmbedding encode_text(std::string_view prompt, const Backbone& backbone) {
  return backbone.encode_text(prompt);
}

/// Opens a backbone by name: "toy" (reads the fixture at `weight_source`) or
/// an external adapter name. Unknown adapters throw ConfigError.
std::unique_ptr<Backbone> open_backbone(const std::string& name, const std::string& weight_source);

}  // namespace videogem
