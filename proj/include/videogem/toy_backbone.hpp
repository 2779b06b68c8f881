#pragma once

// Deterministic toy ViT with a byte-histogram text stub. Used for fixtures and
// every numeric test; weights are reproducible from a 64-bit seed.
//
// Fixture file layout (all integers and floats little-endian):
//
//   offset  size  field
//   0       8     magic "VGEMTOY1"
//   8       8     seed (u64)
//   16      4*9   layers, embed_dim, heads, head_dim, grid_rows, grid_cols,
//                 native_frames, joint_dim, mlp_dim (u32 each)
//   52      ...   float32 tensors, each matrix row-major, in this order:
//                   patch_w [3 x d], patch_b [d], class_embed [d], pos_embed [N x d]
//                   per layer: ln1_gain [d], ln1_bias [d], w_q [d x d], w_k [d x d],
//                              w_v [d x d], w_out [d x d], b_out [d],
//                              ln2_gain [d], ln2_bias [d], fc1_w [d x m], fc1_b [m],
//                              fc2_w [m x d], fc2_b [d]
//                   post_gain [d], post_bias [d], proj [d x j], text_proj [256 x j]
//
// The file ends exactly after text_proj.

#include "videogem/backbone.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace videogem {

using VectorXf = Vector<float>;

struct ToyConfig {
  int layers = 4;
  int embed_dim = 8;
  int heads = 2;
  int grid_rows = 2;
  int grid_cols = 2;
  int native_frames = 1;
  /// 0 means embed_dim.
  int joint_dim = 0;
  /// 0 means 4 * embed_dim.
  int mlp_dim = 0;

  int resolved_joint_dim() const { return joint_dim > 0 ? joint_dim : embed_dim; }
  int resolved_mlp_dim() const { return mlp_dim > 0 ? mlp_dim : 4 * embed_dim; }
  BackboneDescriptor descriptor() const;
};

struct ToyLayerWeights {
  VectorXf ln1_gain, ln1_bias;
  MatrixXf w_q, w_k, w_v, w_out;
  VectorXf b_out;
  VectorXf ln2_gain, ln2_bias;
  MatrixXf fc1_w;
  VectorXf fc1_b;
  MatrixXf fc2_w;
  VectorXf fc2_b;
};

struct ToyWeights {
  ToyConfig config;
  std::uint64_t seed = 0;
  MatrixXf patch_w;  // 3 x d
  VectorXf patch_b;
  VectorXf class_embed;
  MatrixXf pos_embed;  // N x d
  std::vector<ToyLayerWeights> layers;
  VectorXf post_gain, post_bias;
  MatrixXf proj;       // d x j
  MatrixXf text_proj;  // 256 x j
};

/// Materializes every weight from `seed` (std::mt19937_64 stream, top 24 bits
/// per draw mapped to [-1, 1) and scaled per tensor).
ToyWeights generate_toy_weights(std::uint64_t seed, const ToyConfig& config);

/// All projection and MLP weights and biases zero, unit norm gains, zero
/// norm biases. Embeddings and text projection still come from `seed`.
ToyWeights zero_toy_weights(std::uint64_t seed, const ToyConfig& config);

std::vector<std::uint8_t> serialize_toy_weights(const ToyWeights& weights);
ToyWeights deserialize_toy_weights(const std::vector<std::uint8_t>& bytes);

void write_toy_fixture(const ToyWeights& weights, const std::filesystem::path& path);
ToyWeights read_toy_fixture(const std::filesystem::path& path);

/// Generates weights from `seed`, writes them to `fixture_path`, and returns a
/// descriptor whose weight_source points at the file.
BackboneDescriptor make_toy_backbone(std::uint64_t seed, const ToyConfig& config,
                                     const std::filesystem::path& fixture_path);

/// QuickGELU, as used in CLIP MLPs.
double quick_gelu(double x);

class ToyBackbone final : public Backbone {
 public:
  explicit ToyBackbone(ToyWeights weights, std::string source = {});
  static ToyBackbone load(const std::filesystem::path& fixture_path);

  const BackboneDescriptor& descriptor() const override { return descriptor_; }
  LayerTrace forward_with_trace(const FrameBatch& batch) const override;
  TextEmbedding encode_text(std::string_view prompt) const override;
  bool thread_safe() const override { return true; }

  const ToyWeights& weights() const { return weights_; }

  /// Mean RGB of each grid cell mapped to [-1, 1]; rows follow patch order.
  MatrixXd patch_features(const Image& frame) const;

 private:
  struct Layer {
    AttentionWeights attention;
    VectorXd ln2_gain, ln2_bias;
    MatrixXd fc1_w;
    VectorXd fc1_b;
    MatrixXd fc2_w;
    VectorXd fc2_b;
  };

  ToyWeights weights_;
  BackboneDescriptor descriptor_;
  MatrixXd patch_w_;
  VectorXd patch_b_;
  VectorXd class_embed_;
  MatrixXd pos_embed_;
  std::vector<Layer> layers_;
  JointProjection joint_;
  MatrixXd text_proj_;
};

}  // namespace videogem
