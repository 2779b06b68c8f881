#include "videogem/backbone.hpp"
#include "videogem/toy_backbone.hpp"

#include <cmath>

namespace videogem {

void BackboneDescriptor::validate() const {
  if (layer_count < 1) throw InvalidInput("backbone: layer_count must be >= 1");
  if (embed_dim < 1 || head_count < 1 || head_dim < 1) throw InvalidInput("backbone: dims must be positive");
  if (embed_dim != head_count * head_dim) {
    throw InvalidInput("backbone: embed_dim " + std::to_string(embed_dim) + " != heads * head_dim (" +
                       std::to_string(head_count) + " * " + std::to_string(head_dim) + ")");
  }
  if (grid_rows < 1 || grid_cols < 1) throw InvalidInput("backbone: patch grid must be at least 1x1");
  if (native_frame_count != 1 && native_frame_count != 8) {
    throw InvalidInput("backbone: native_frame_count must be 1 or 8");
  }
  if (joint_dim < 1) throw InvalidInput("backbone: joint_dim must be positive");
}

void FrameBatch::validate() const {
  if (frames.empty()) throw InvalidInput("frame batch is empty");
  if (target_index < 0 || target_index >= frame_count()) {
    throw InvalidInput("frame batch target index " + std::to_string(target_index) + " out of range");
  }
  for (const auto& f : frames) {
    if (f.width != width() || f.height != height()) throw InvalidInput("frames differ in size");
    if (f.rgb.size() != static_cast<std::size_t>(f.width) * f.height * 3) {
      throw InvalidInput("frame buffer size does not match its dimensions");
    }
  }
}

MatrixXd layer_norm(const MatrixXd& x, const VectorXd& gain, const VectorXd& bias, double eps) {
  MatrixXd out(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).sum() / n;
    const auto centered = (x.row(i).array() - mean).matrix();
    const double var = centered.squaredNorm() / n;
    const double inv = 1.0 / std::sqrt(var + eps);
    out.row(i) = (centered.array() * inv * gain.transpose().array() + bias.transpose().array()).matrix();
  }
  return out;
}

VectorXd JointProjection::map(const VectorXd& token) const {
  return map_rows(token.transpose()).row(0).transpose();
}

MatrixXd JointProjection::map_rows(const MatrixXd& tokens) const {
  return layer_norm(tokens, ln_gain, ln_bias) * proj;
}

std::unique_ptr<Backbone> open_backbone(const std::string& name, const std::string& weight_source) {
  if (name == "toy") {
    if (weight_source.empty()) throw ConfigError("fixture", "toy backbone needs a fixture path");
    return std::make_unique<ToyBackbone>(ToyBackbone::load(weight_source));
  }
  throw ConfigError("backbone", "adapter '" + name + "' is not available in this build");
}

}  // namespace videogem
