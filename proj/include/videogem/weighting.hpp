#pragma once

#include "videogem/backbone.hpp"
#include "videogem/gem.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace videogem {

enum class WeightingMode { none, static_weights, dynamic, combined };

std::string to_string(WeightingMode mode);
/// Accepts none, static, dynamic, combined (also stat, dyn, s+d).
std::optional<WeightingMode> parse_weighting_mode(std::string_view text);

struct WeightConfig {
  /// K: pathway depth.
  int depth = 7;
  /// D: number of final layers that get dynamic weights. 0 disables them.
  int dynamic_depth = 3;
  /// tau_d.
  double dynamic_temperature = 20.0;
  /// w_s, K+1 entries; entry 0 weights X^{L-K}, entry i weights Z^{L-K+i}.
  std::vector<double> static_weights{0.3, 0.4, 0.5, 0.6, 0.7, 0.9, 0.9, 0.9};
  WeightingMode mode = WeightingMode::combined;

  void validate() const;

  /// Same settings at a shallower (or equal) depth: keeps the last k+1
  /// static weights and clamps D to k.
  WeightConfig with_depth(int k) const;
};

struct DynamicWeights {
  /// s^{L-D+1} .. s^L.
  VectorXd similarities;
  /// softmax(-s * tau_d).
  VectorXd weights;
};

/// sum_i weights[i] * term_i with term_0 = X^{L-K} and term_i = Z^{L-K+i},
/// accumulated in that order.
MatrixXd weighted_layer_sum(const PathwayState& pathway, std::span<const double> weights);

/// O_stat.
MatrixXd static_weighted_output(const PathwayState& pathway, std::span<const double> static_weights);

/// cos(map(x_cls - residual_l), e) for each row of `residuals`. Rows whose
/// removal leaves a zero vector get similarity 0.
template <typename Map>
VectorXd removal_similarities(const VectorXd& cls_final, const MatrixXd& residuals, const VectorXd& text,
                              Map&& to_joint) {
  VectorXd s(residuals.rows());
  for (Index i = 0; i < residuals.rows(); ++i) {
    const VectorXd removed = cls_final - residuals.row(i).transpose();
    s(i) = removed.norm() == 0.0 ? 0.0 : cosine(to_joint(removed), text);
  }
  return s;
}

/// s^l for the last D layers, CLS residuals taken from the frozen backbone and
/// compared in the joint space.
VectorXd layer_similarities(const LayerTrace& trace, const TextEmbedding& text, int dynamic_depth);

DynamicWeights dynamic_weights(const VectorXd& similarities, double temperature);

/// Effective per-term weights (length K+1) for a mode. `dynamic` is required
/// for modes dynamic and combined when D > 0.
std::vector<double> layer_weights(const WeightConfig& cfg, const DynamicWeights* dynamic);

/// Resolves the dynamic weights a config needs for one prompt, or nullopt when
/// the mode has none.
std::optional<DynamicWeights> prompt_dynamic_weights(const LayerTrace& trace, const WeightConfig& cfg,
                                                     const TextEmbedding* text);

/// Pathway output under `cfg.mode`. With K = 0 there are no pathway terms and
/// the backbone output X^L is returned for every mode.
MatrixXd combined_output(const LayerTrace& trace, const PathwayState& pathway, const WeightConfig& cfg,
                         const TextEmbedding* text);

}  // namespace videogem
