#pragma once

// Single-sample grounding: trace -> self-self pathway -> per-prompt weighted
// output -> patch/text similarity -> heatmap -> center -> fusion.

#include "videogem/backbone.hpp"
#include "videogem/config.hpp"
#include "videogem/evaluation.hpp"
#include "videogem/gem.hpp"
#include "videogem/grounding.hpp"
#include "videogem/prompt.hpp"
#include "videogem/weighting.hpp"

#include <optional>
#include <string>
#include <vector>

namespace videogem {

struct PromptOutcome {
  /// verb, object or action.
  std::string role;
  std::string prompt;
  Heatmap heatmap;
  CenterPrediction center;
  std::optional<DynamicWeights> dynamic;
  /// Effective weights applied to X^{L-K}, Z^{L-K+1}, ..., Z^L.
  std::vector<double> layer_weights;
};

struct GroundingResult {
  PromptBundle bundle;
  /// verb, object, action in that order; only action without decomposition.
  std::vector<PromptOutcome> outcomes;
  /// Raw fused point.
  Point fused;
  /// Fused point rounded to a pixel; this is what gets scored.
  Point fused_pixel;
  /// Set for the heatmap merge strategies.
  std::optional<Heatmap> merged;

  const PromptOutcome& outcome(const std::string& role) const;
};

/// Backbone pass and label decomposition, independent of layer weighting.
struct PreparedSample {
  FrameBatch batch;
  LayerTrace trace;
  Decomposition decomposition;
};

class Grounder {
 public:
  /// Both references must outlive the grounder.
  Grounder(const Backbone& backbone, RunConfig config, const ComponentExtractor& extractor);

  const RunConfig& config() const { return config_; }
  const Backbone& backbone() const { return backbone_; }

  PreparedSample prepare(FrameBatch batch, std::string_view label, LabelStyle style) const;

  /// Runs the weighting and prompt fusion for one sweep setting.
  GroundingResult run(const PreparedSample& sample, const SweepSetting& setting) const;
  GroundingResult run(const PreparedSample& sample) const;

  GroundingResult ground(FrameBatch batch, std::string_view label, LabelStyle style) const;

  SweepSetting default_setting() const { return SweepSetting{config_.weights, std::nullopt}; }

 private:
  PromptOutcome ground_prompt(const PreparedSample& sample, const PathwayState& pathway, const SweepSetting& setting,
                              const std::string& role, const std::string& prompt) const;

  const Backbone& backbone_;
  RunConfig config_;
  const ComponentExtractor& extractor_;
};

/// Scored prediction for an evaluation record.
Prediction to_prediction(const std::string& sample_id, const GroundingResult& result);

/// Rounds to 6 decimals so serialized output does not depend on last-bit
/// differences between math libraries.
double stable(double v);

}  // namespace videogem
