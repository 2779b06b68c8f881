#pragma once

#include "videogem/backbone.hpp"
#include "videogem/grounding.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace videogem {

enum class LabelStyle { underscore, natural };

std::string to_string(LabelStyle style);
std::optional<LabelStyle> parse_label_style(std::string_view text);

/// Verb and object candidates found in a free-form action description.
struct Components {
  std::vector<std::string> verbs;
  std::vector<std::string> objects;
};

/// Part-of-speech extraction hook. Plug an NLP tagger in here.
class ComponentExtractor {
 public:
  virtual ~ComponentExtractor() = default;
  virtual Components extract(std::string_view description) const = 0;
};

/// Closed word lists plus suffix rules; needs no external tools.
class RuleBasedExtractor final : public ComponentExtractor {
 public:
  Components extract(std::string_view description) const override;
};

/// Fixed verb/object lists, for tests and callers that already know them.
class StaticExtractor final : public ComponentExtractor {
 public:
  explicit StaticExtractor(Components components) : components_(std::move(components)) {}
  Components extract(std::string_view) const override { return components_; }

 private:
  Components components_;
};

struct Decomposition {
  std::optional<std::string> verb;
  std::optional<std::string> object;
  /// Action phrase inserted into the action template.
  std::string action;
};

/// "verb_object" labels: split at the first underscore. A label without an
/// underscore is all verb.
Decomposition decompose_underscore(std::string_view label);

/// Free-form labels: every candidate is rendered into its template and the one
/// whose text embedding is closest (cosine) to `visual` wins; ties keep the
/// earlier candidate.
Decomposition decompose_natural(std::string_view label, const ComponentExtractor& extractor,
                                const Backbone& backbone, const VectorXd& visual);

/// Dispatches on style. Natural style needs the extractor, backbone and the
/// visual joint embedding of the input.
Decomposition decompose_label(std::string_view label, LabelStyle style, const ComponentExtractor* extractor,
                              const Backbone* backbone, const VectorXd* visual);

struct PromptSet {
  std::string verb;
  std::string object;
  std::string action;
};

std::string verb_prompt(const std::optional<std::string>& verb);
std::string object_prompt(const std::optional<std::string>& object);
std::string action_prompt(std::string_view action);

PromptSet render_prompts(const std::optional<std::string>& verb, const std::optional<std::string>& object,
                         std::string_view action);
inline PromptSet render_prompts(const Decomposition& d) { return render_prompts(d.verb, d.object, d.action); }

struct FusionWeights {
  double verb = 0.2;
  double object = 0.2;
  double action = 0.6;

  /// Nonnegative and summing to 1 within 1e-9.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// c_dec = w_verb c_verb + w_obj c_obj + w_act c_act.
Point combine_centers(const Point& verb, const Point& object, const Point& action, const FusionWeights& weights);

/// Nearest pixel; exact halves go to the lower index.
Point round_to_pixel(const Point& p);

enum class MergeStrategy { center_average, heatmap_multiply, heatmap_average };

std::string to_string(MergeStrategy strategy);
std::optional<MergeStrategy> parse_merge_strategy(std::string_view text);

struct MergePolicy {
  MergeStrategy strategy = MergeStrategy::center_average;
  /// verb : object : action.
  std::array<double, 3> ratio{1.0, 1.0, 3.0};

  void validate() const;
  std::array<double, 3> normalized_ratio() const;
};

/// Pixelwise weighted mean (heatmap_average) or weighted geometric product
/// (heatmap_multiply, each map raised to its normalized ratio), then min-max
/// normalized.
Heatmap merge_heatmaps(const Heatmap& verb, const Heatmap& object, const Heatmap& action, const MergePolicy& policy);

struct PromptBundle {
  Decomposition decomposition;
  PromptSet prompts;
  FusionWeights weights;
};

nlohmann::json to_json(const PromptBundle& bundle);

}  // namespace videogem
