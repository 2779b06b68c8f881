#include "videogem/pipeline.hpp"

#include <cmath>

namespace videogem {

const PromptOutcome& GroundingResult::outcome(const std::string& role) const {
  for (const auto& o : outcomes)
    if (o.role == role) return o;
  throw InvalidInput("no outcome for prompt role " + role);
}

Grounder::Grounder(const Backbone& backbone, RunConfig config, const ComponentExtractor& extractor)
    : backbone_(backbone), config_(std::move(config)), extractor_(extractor) {
  config_.weights.validate();
  config_.fusion.validate();
  config_.merge.validate();
  const auto& d = backbone_.descriptor();
  if (config_.weights.depth > d.layer_count) {
    throw ConfigError("K", "exceeds the backbone's " + std::to_string(d.layer_count) + " layers");
  }
  if (d.is_video() && config_.clip_length != d.native_frame_count) {
    throw ConfigError("T", "video backbone takes exactly " + std::to_string(d.native_frame_count) + " frames");
  }
}

PreparedSample Grounder::prepare(FrameBatch batch, std::string_view label, LabelStyle style) const {
  LayerTrace trace = backbone_.forward_with_trace(batch);
  const VectorXd visual = trace.cls_joint();
  Decomposition decomposition = decompose_label(label, style, &extractor_, &backbone_, &visual);
  return PreparedSample{std::move(batch), std::move(trace), std::move(decomposition)};
}

PromptOutcome Grounder::ground_prompt(const PreparedSample& sample, const PathwayState& pathway,
                                      const SweepSetting& setting, const std::string& role,
                                      const std::string& prompt) const {
  const WeightConfig& wc = setting.weights;
  PromptOutcome out;
  out.role = role;
  out.prompt = prompt;
  const TextEmbedding text = backbone_.encode_text(prompt);

  MatrixXd tokens;
  if (wc.depth == 0) {
    tokens = pathway.output;
  } else {
    out.dynamic = prompt_dynamic_weights(sample.trace, wc, &text);
    out.layer_weights = layer_weights(wc, out.dynamic ? &*out.dynamic : nullptr);
    if (setting.zeroed_position) out.layer_weights.at(static_cast<std::size_t>(*setting.zeroed_position)) = 0.0;
    tokens = weighted_layer_sum(pathway, out.layer_weights);
  }
  const VectorXd scores = patch_text_similarity(tokens, text, sample.trace.joint);
  out.heatmap = heatmap_for_target_frame(scores, sample.batch, backbone_.descriptor());
  out.center = predict_center(out.heatmap, role);
  return out;
}

GroundingResult Grounder::run(const PreparedSample& sample, const SweepSetting& setting) const {
  setting.weights.validate();
  const PathwayState pathway = gem_accumulate(sample.trace, setting.weights.depth,
                                              config_.self_self(backbone_.descriptor()), config_.pathway_input);

  GroundingResult result;
  result.bundle.decomposition = sample.decomposition;
  result.bundle.prompts = render_prompts(sample.decomposition);
  result.bundle.weights = config_.fusion;

  if (!config_.decomposition) {
    result.outcomes.push_back(ground_prompt(sample, pathway, setting, "action", result.bundle.prompts.action));
    const auto& c = result.outcomes.back().center;
    result.fused = Point{c.x, c.y};
    result.fused_pixel = result.fused;
    return result;
  }

  result.outcomes.push_back(ground_prompt(sample, pathway, setting, "verb", result.bundle.prompts.verb));
  result.outcomes.push_back(ground_prompt(sample, pathway, setting, "object", result.bundle.prompts.object));
  result.outcomes.push_back(ground_prompt(sample, pathway, setting, "action", result.bundle.prompts.action));
  const auto& v = result.outcomes[0];
  const auto& o = result.outcomes[1];
  const auto& a = result.outcomes[2];

  if (config_.merge.strategy == MergeStrategy::center_average) {
    result.fused = combine_centers(Point{v.center.x, v.center.y}, Point{o.center.x, o.center.y},
                                   Point{a.center.x, a.center.y}, config_.fusion);
    result.fused_pixel = round_to_pixel(result.fused);
  } else {
    result.merged = merge_heatmaps(v.heatmap, o.heatmap, a.heatmap, config_.merge);
    const auto c = predict_center(*result.merged, "merged");
    result.fused = Point{c.x, c.y};
    result.fused_pixel = result.fused;
  }
  return result;
}

GroundingResult Grounder::run(const PreparedSample& sample) const { return run(sample, default_setting()); }

GroundingResult Grounder::ground(FrameBatch batch, std::string_view label, LabelStyle style) const {
  return run(prepare(std::move(batch), label, style));
}

Prediction to_prediction(const std::string& sample_id, const GroundingResult& result) {
  Prediction p;
  p.sample_id = sample_id;
  p.point = result.fused_pixel;
  for (const auto& o : result.outcomes) p.by_prompt[o.role] = Point{o.center.x, o.center.y};
  return p;
}

double stable(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace videogem
