#include "videogem/prompt.hpp"

#include "videogem/ops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

namespace videogem {

namespace {

const std::set<std::string, std::less<>> kStopWords = {
    "a",    "an",  "the", "on",  "in",   "into", "onto", "of",   "to",   "and",  "or",   "with", "some",
    "from", "for", "it",  "its", "up",   "off",  "over", "at",   "by",   "out",  "then", "while", "his",
    "her",  "their", "them", "this", "that", "these", "those", "is", "are", "be", "using", "down", "again",
};

const std::set<std::string, std::less<>> kVerbs = {
    "add",   "apply",  "bake",   "beat",   "boil",  "brush",   "carry",  "catch", "chop",  "clean",  "close",
    "cook",  "crack",  "cut",    "dice",   "drain", "drink",   "drop",   "eat",   "fill",  "flip",   "fold",
    "fry",   "grab",   "grate",  "grill",  "heat",  "hit",     "hold",   "insert", "kick", "knead",  "lift",
    "melt",  "mince",  "mix",    "open",   "pack",  "peel",    "pick",   "place", "play",  "pour",   "press",
    "pull",  "push",   "put",    "remove", "ride",  "rinse",   "roll",   "rub",   "season", "serve", "shake",
    "slice", "spoon",  "spread", "sprinkle", "squeeze", "stir", "strain", "take",  "throw", "toss",   "transfer",
    "turn",  "unpack", "wash",   "whisk",  "wipe",  "wrap",
};

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalpha(uc) || ch == '-' || ch == '\'') {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

bool looks_like_verb(const std::string& w) {
  if (kVerbs.contains(w)) return true;
  if (w.size() >= 5 && w.ends_with("ing")) return true;
  if (w.size() > 3 && w.ends_with('s') && kVerbs.contains(std::string_view(w).substr(0, w.size() - 1))) return true;
  return false;
}

void push_unique(std::vector<std::string>& out, const std::string& w) {
  if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
}

std::string spaced(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

template <typename Render>
std::optional<std::string> most_visible(const std::vector<std::string>& candidates, Render render,
                                        const Backbone& backbone, const VectorXd& visual) {
  std::optional<std::string> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double score = cosine(backbone.encode_text(render(c)).vector, visual);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string to_string(LabelStyle style) { return style == LabelStyle::underscore ? "underscore" : "natural"; }

std::optional<LabelStyle> parse_label_style(std::string_view text) {
  if (text == "underscore") return LabelStyle::underscore;
  if (text == "natural") return LabelStyle::natural;
  return std::nullopt;
}

Components RuleBasedExtractor::extract(std::string_view description) const {
  Components out;
  for (const auto& w : words_of(description)) {
    if (kStopWords.contains(w)) continue;
    if (looks_like_verb(w)) {
      push_unique(out.verbs, w);
    } else if (!(w.size() > 3 && w.ends_with("ly"))) {
      push_unique(out.objects, w);
    }
  }
  return out;
}

Decomposition decompose_underscore(std::string_view label) {
  if (label.empty()) throw InvalidInput("empty label");
  Decomposition d;
  d.action = spaced(label);
  const auto cut = label.find('_');
  if (cut == std::string_view::npos) {
    d.verb = std::string(label);
    return d;
  }
  if (cut > 0) d.verb = std::string(label.substr(0, cut));
  if (cut + 1 < label.size()) d.object = std::string(label.substr(cut + 1));
  return d;
}

Decomposition decompose_natural(std::string_view label, const ComponentExtractor& extractor,
                                const Backbone& backbone, const VectorXd& visual) {
  if (label.empty()) throw InvalidInput("empty label");
  const Components found = extractor.extract(label);
  Decomposition d;
  d.action = std::string(label);
  d.verb = most_visible(found.verbs, [](const std::string& v) { return verb_prompt(v); }, backbone, visual);
  d.object = most_visible(found.objects, [](const std::string& o) { return object_prompt(o); }, backbone, visual);
  return d;
}

Decomposition decompose_label(std::string_view label, LabelStyle style, const ComponentExtractor* extractor,
                              const Backbone* backbone, const VectorXd* visual) {
  if (style == LabelStyle::underscore) return decompose_underscore(label);
  if (extractor == nullptr || backbone == nullptr || visual == nullptr) {
    throw InvalidInput("natural labels need an extractor, a backbone and a visual embedding");
  }
  return decompose_natural(label, *extractor, *backbone, *visual);
}

std::string verb_prompt(const std::optional<std::string>& verb) {
  if (!verb) return "A photo of a person doing something.";
  return "A photo of a person " + spaced(*verb) + " something.";
}

std::string object_prompt(const std::optional<std::string>& object) {
  if (!object) return "A photo of a person.";
  return "A photo of a person using " + spaced(*object) + ".";
}

std::string action_prompt(std::string_view action) { return "A photo of a person " + std::string(action) + "."; }

PromptSet render_prompts(const std::optional<std::string>& verb, const std::optional<std::string>& object,
                         std::string_view action) {
  if (action.empty()) throw InvalidInput("empty action");
  return PromptSet{verb_prompt(verb), object_prompt(object), action_prompt(action)};
}

void FusionWeights::validate() const {
  if (verb < 0.0 || object < 0.0 || action < 0.0) throw InvalidInput("fusion weights must be nonnegative");
  if (std::abs(verb + object + action - 1.0) > 1e-9) throw InvalidInput("fusion weights must sum to 1");
}

Point combine_centers(const Point& verb, const Point& object, const Point& action, const FusionWeights& w) {
  w.validate();
  return Point{w.verb * verb.x + w.object * object.x + w.action * action.x,
               w.verb * verb.y + w.object * object.y + w.action * action.y};
}

Point round_to_pixel(const Point& p) { return Point{std::ceil(p.x - 0.5), std::ceil(p.y - 0.5)}; }

std::string to_string(MergeStrategy strategy) {
  switch (strategy) {
    case MergeStrategy::center_average: return "center_average";
    case MergeStrategy::heatmap_multiply: return "heatmap_multiply";
    case MergeStrategy::heatmap_average: return "heatmap_average";
  }
  return "center_average";
}

std::optional<MergeStrategy> parse_merge_strategy(std::string_view text) {
  if (text == "center_average") return MergeStrategy::center_average;
  if (text == "heatmap_multiply" || text == "mul") return MergeStrategy::heatmap_multiply;
  if (text == "heatmap_average" || text == "avg") return MergeStrategy::heatmap_average;
  return std::nullopt;
}

void MergePolicy::validate() const {
  for (double r : ratio)
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("merge ratio entries must be positive");
}

std::array<double, 3> MergePolicy::normalized_ratio() const {
  validate();
  const double total = ratio[0] + ratio[1] + ratio[2];
  return {ratio[0] / total, ratio[1] / total, ratio[2] / total};
}

Heatmap merge_heatmaps(const Heatmap& verb, const Heatmap& object, const Heatmap& action, const MergePolicy& policy) {
  if (verb.grid.rows() != action.grid.rows() || verb.grid.cols() != action.grid.cols() ||
      object.grid.rows() != action.grid.rows() || object.grid.cols() != action.grid.cols()) {
    throw InvalidInput("merge: heatmap shapes differ");
  }
  const auto r = policy.normalized_ratio();
  MatrixXd merged;
  switch (policy.strategy) {
    case MergeStrategy::heatmap_multiply:
      merged = (verb.grid.array().pow(r[0]) * object.grid.array().pow(r[1]) * action.grid.array().pow(r[2])).matrix();
      break;
    case MergeStrategy::heatmap_average:
    case MergeStrategy::center_average:
      merged = r[0] * verb.grid + r[1] * object.grid + r[2] * action.grid;
      break;
  }
  return min_max_normalize(merged);
}

nlohmann::json to_json(const PromptBundle& b) {
  auto optional_string = [](const std::optional<std::string>& s) -> nlohmann::json {
    return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
  };
  return nlohmann::json{
      {"verb", optional_string(b.decomposition.verb)},
      {"object", optional_string(b.decomposition.object)},
      {"action", b.decomposition.action},
      {"prompts", {{"verb", b.prompts.verb}, {"object", b.prompts.object}, {"action", b.prompts.action}}},
      {"weights", {{"verb", b.weights.verb}, {"object", b.weights.object}, {"action", b.weights.action}}},
  };
}

}  // namespace videogem
