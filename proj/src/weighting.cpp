#include "videogem/weighting.hpp"

#include <cmath>

namespace videogem {

std::string to_string(WeightingMode mode) {
  switch (mode) {
    case WeightingMode::none: return "none";
    case WeightingMode::static_weights: return "static";
    case WeightingMode::dynamic: return "dynamic";
    case WeightingMode::combined: return "combined";
  }
  return "none";
}

std::optional<WeightingMode> parse_weighting_mode(std::string_view text) {
  if (text == "none") return WeightingMode::none;
  if (text == "static" || text == "stat") return WeightingMode::static_weights;
  if (text == "dynamic" || text == "dyn") return WeightingMode::dynamic;
  if (text == "combined" || text == "s+d") return WeightingMode::combined;
  return std::nullopt;
}

void WeightConfig::validate() const {
  if (depth < 0) throw InvalidInput("weighting: K must be >= 0");
  if (dynamic_depth < 0 || dynamic_depth > depth) {
    throw InvalidInput("weighting: D = " + std::to_string(dynamic_depth) + " must lie in [0, K = " +
                       std::to_string(depth) + "]");
  }
  if (!(dynamic_temperature > 0.0) || !std::isfinite(dynamic_temperature)) {
    throw InvalidInput("weighting: tau_d must be > 0");
  }
  if (static_weights.size() != static_cast<std::size_t>(depth) + 1) {
    throw InvalidInput("weighting: w_s has " + std::to_string(static_weights.size()) + " entries, expected K+1 = " +
                       std::to_string(depth + 1));
  }
}

WeightConfig WeightConfig::with_depth(int k) const {
  validate();
  if (k < 0 || k > depth) throw InvalidInput("weighting: depth " + std::to_string(k) + " outside [0, K]");
  WeightConfig out = *this;
  out.depth = k;
  out.dynamic_depth = std::min(dynamic_depth, k);
  out.static_weights.assign(static_weights.end() - (k + 1), static_weights.end());
  return out;
}

MatrixXd weighted_layer_sum(const PathwayState& pathway, std::span<const double> weights) {
  if (weights.size() != pathway.z.size() + 1) {
    throw InvalidInput("weighting: " + std::to_string(weights.size()) + " weights for " +
                       std::to_string(pathway.z.size() + 1) + " terms");
  }
  MatrixXd out = weights[0] * pathway.base;
  for (std::size_t i = 0; i < pathway.z.size(); ++i) out += weights[i + 1] * pathway.z[i];
  return out;
}

MatrixXd static_weighted_output(const PathwayState& pathway, std::span<const double> static_weights) {
  return weighted_layer_sum(pathway, static_weights);
}

VectorXd layer_similarities(const LayerTrace& trace, const TextEmbedding& text, int dynamic_depth) {
  const int L = trace.layer_count();
  if (dynamic_depth < 0 || dynamic_depth > L) throw InvalidInput("weighting: D outside [0, L]");
  if (text.vector.size() != trace.joint.proj.cols()) {
    throw InvalidInput("weighting: text embedding width does not match the joint space");
  }
  const MatrixXd residuals = trace.cls_residuals.bottomRows(dynamic_depth);
  return removal_similarities(trace.cls_final(), residuals, text.vector,
                              [&](const VectorXd& v) { return trace.joint.map(v); });
}

DynamicWeights dynamic_weights(const VectorXd& similarities, double temperature) {
  if (!similarities.allFinite()) throw InvalidInput("weighting: non-finite similarity");
  if (!(temperature > 0.0)) throw InvalidInput("weighting: tau_d must be > 0");
  return DynamicWeights{similarities, softmax((-similarities * temperature).eval())};
}

std::vector<double> layer_weights(const WeightConfig& cfg, const DynamicWeights* dynamic) {
  cfg.validate();
  const std::size_t terms = static_cast<std::size_t>(cfg.depth) + 1;
  const int D = cfg.dynamic_depth;
  const bool needs_dynamic =
      D > 0 && (cfg.mode == WeightingMode::dynamic || cfg.mode == WeightingMode::combined);
  if (needs_dynamic && (dynamic == nullptr || dynamic->weights.size() != D)) {
    throw InvalidInput("weighting: mode " + to_string(cfg.mode) + " needs " + std::to_string(D) +
                       " dynamic weights");
  }

  std::vector<double> w(terms, 1.0);
  if (cfg.mode == WeightingMode::static_weights || cfg.mode == WeightingMode::combined) w = cfg.static_weights;
  if (needs_dynamic) {
    const double shift = cfg.mode == WeightingMode::combined ? 1.0 / D : 0.0;
    for (int i = 0; i < D; ++i) {
      const std::size_t pos = terms - static_cast<std::size_t>(D) + static_cast<std::size_t>(i);
      w[pos] = cfg.mode == WeightingMode::combined ? w[pos] - shift + dynamic->weights(i) : dynamic->weights(i);
    }
  }
  return w;
}

std::optional<DynamicWeights> prompt_dynamic_weights(const LayerTrace& trace, const WeightConfig& cfg,
                                                     const TextEmbedding* text) {
  const bool needs = cfg.dynamic_depth > 0 &&
                     (cfg.mode == WeightingMode::dynamic || cfg.mode == WeightingMode::combined);
  if (!needs) return std::nullopt;
  if (text == nullptr) throw InvalidInput("weighting: mode " + to_string(cfg.mode) + " needs a text embedding");
  return dynamic_weights(layer_similarities(trace, *text, cfg.dynamic_depth), cfg.dynamic_temperature);
}

MatrixXd combined_output(const LayerTrace& trace, const PathwayState& pathway, const WeightConfig& cfg,
                         const TextEmbedding* text) {
  cfg.validate();
  if (pathway.depth != cfg.depth) throw InvalidInput("weighting: pathway depth differs from K");
  if (cfg.depth == 0 || cfg.mode == WeightingMode::none) return pathway.output;
  const auto dynamic = prompt_dynamic_weights(trace, cfg, text);
  return weighted_layer_sum(pathway, layer_weights(cfg, dynamic ? &*dynamic : nullptr));
}

}  // namespace videogem
