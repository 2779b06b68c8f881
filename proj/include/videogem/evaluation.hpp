#pragma once

#include "videogem/prompt.hpp"
#include "videogem/weighting.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace videogem {

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  std::optional<std::string> role;

  /// Boundary inclusive.
  bool contains(const Point& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// How several ground-truth boxes combine. `union_of_boxes` counts a point
/// inside any box; `hull` uses the single box enclosing all of them.
enum class UnionPolicy { single, union_of_boxes, hull };

std::string to_string(UnionPolicy policy);
std::optional<UnionPolicy> parse_union_policy(std::string_view text);

/// One line of the annotation file:
///
///   {"sample_id": "v1", "media_path": "clips/v1", "labeled_frame_index": 12,
///    "label": "cutting_onion",
///    "boxes": [{"x_min": 0, "y_min": 0, "x_max": 10, "y_max": 10, "role": "human"}],
///    "union_policy": "union", "label_style": "underscore"}
///
/// union_policy (single | union | hull) defaults to union; label_style is
/// optional and falls back to the run configuration.
struct AnnotationRecord {
  std::string sample_id;
  std::string media_path;
  int labeled_frame_index = 0;
  std::string label;
  std::vector<BoundingBox> boxes;
  UnionPolicy union_policy = UnionPolicy::union_of_boxes;
  std::optional<LabelStyle> label_style;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

AnnotationRecord record_from_json(const nlohmann::json& j, std::size_t line_no);
nlohmann::json to_json(const AnnotationRecord& record);

/// Reads JSON Lines; blank lines are skipped. Throws ParseError naming the line.
std::vector<AnnotationRecord> parse_annotations(std::istream& in);
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::string serialize_annotations(const std::vector<AnnotationRecord>& records);

bool point_in_box(const Point& point, const AnnotationRecord& record);

/// Enclosing box of every box in the record.
BoundingBox hull_box(const std::vector<BoundingBox>& boxes);

struct Prediction {
  std::string sample_id;
  /// Fused point, already rounded to a pixel.
  Point point;
  /// Optional per-prompt points (verb, object, action, ...).
  std::map<std::string, Point> by_prompt;
};

struct SampleResult {
  std::string sample_id;
  Point point;
  bool correct = false;
  std::map<std::string, bool> by_prompt;
};

struct EvalReport {
  /// Sorted by sample_id.
  std::vector<SampleResult> samples;
  std::size_t correct = 0;
  std::size_t total = 0;
  /// correct / total.
  double accuracy = 0.0;
  /// Accuracy of each per-prompt point.
  std::map<std::string, double> breakdown;
  /// Number of samples per union policy.
  std::map<std::string, std::size_t> union_policies;

  nlohmann::json to_json() const;
};

/// Throws InvalidInput on empty input or when ids do not pair up.
EvalReport accuracy(const std::vector<Prediction>& predictions, const std::vector<AnnotationRecord>& records);

enum class SweepMode { remove_layer, depth };

std::string to_string(SweepMode mode);
std::optional<SweepMode> parse_sweep_mode(std::string_view text);

/// Inclusive.
struct SweepRange {
  int first = 0;
  int last = 0;
};

/// "a..b", "a-b" or a single integer.
std::optional<SweepRange> parse_sweep_range(std::string_view text);

struct SweepRow {
  std::string setting;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// One sweep point: the weight config to run with, and for layer removal the
/// position (0 = X^{L-K}, K = final layer) whose weight is forced to 0.
struct SweepSetting {
  WeightConfig weights;
  std::optional<int> zeroed_position;
};

using SweepEvaluator = std::function<EvalReport(const SweepSetting&)>;

/// Layer removal indexes 1 = final layer up to K+1 = the X^{L-K} input.
/// Depth sweeps run K' = first..last using with_depth. Ranges outside the
/// configured K throw InvalidInput.
std::vector<SweepSetting> sweep_settings(const WeightConfig& base, SweepMode mode, SweepRange range);
std::vector<SweepRow> ablation_sweep(const WeightConfig& base, SweepMode mode, SweepRange range,
                                     const SweepEvaluator& evaluate);

/// "setting,accuracy,n" header, accuracy printed with 6 decimals.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace videogem
