#include "videogem/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace videogem {

std::string to_string(UnionPolicy policy) {
  switch (policy) {
    case UnionPolicy::single: return "single";
    case UnionPolicy::union_of_boxes: return "union";
    case UnionPolicy::hull: return "hull";
  }
  return "union";
}

std::optional<UnionPolicy> parse_union_policy(std::string_view text) {
  if (text == "single") return UnionPolicy::single;
  if (text == "union") return UnionPolicy::union_of_boxes;
  if (text == "hull") return UnionPolicy::hull;
  return std::nullopt;
}

namespace {

const nlohmann::json& required(const nlohmann::json& j, const char* key, std::size_t line_no) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing required field \"") + key + "\"", line_no);
  return *it;
}

std::string required_string(const nlohmann::json& j, const char* key, std::size_t line_no) {
  const auto& v = required(j, key, line_no);
  if (!v.is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line_no);
  return v.get<std::string>();
}

double required_number(const nlohmann::json& j, const char* key, std::size_t line_no) {
  const auto& v = required(j, key, line_no);
  if (!v.is_number()) throw ParseError(std::string("field \"") + key + "\" must be a number", line_no);
  return v.get<double>();
}

}  // namespace

AnnotationRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
  if (!j.is_object()) throw ParseError("record must be a JSON object", line_no);
  AnnotationRecord r;
  r.sample_id = required_string(j, "sample_id", line_no);
  r.media_path = required_string(j, "media_path", line_no);
  const auto& frame = required(j, "labeled_frame_index", line_no);
  if (!frame.is_number_integer() || frame.get<long long>() < 0) {
    throw ParseError("field \"labeled_frame_index\" must be a nonnegative integer", line_no);
  }
  r.labeled_frame_index = frame.get<int>();
  r.label = required_string(j, "label", line_no);
  if (r.label.empty()) throw ParseError("field \"label\" is empty", line_no);

  const auto& boxes = required(j, "boxes", line_no);
  if (!boxes.is_array() || boxes.empty()) throw ParseError("field \"boxes\" must be a non-empty array", line_no);
  for (const auto& b : boxes) {
    if (!b.is_object()) throw ParseError("box must be an object", line_no);
    BoundingBox box{required_number(b, "x_min", line_no), required_number(b, "y_min", line_no),
                    required_number(b, "x_max", line_no), required_number(b, "y_max", line_no), std::nullopt};
    if (box.x_min > box.x_max || box.y_min > box.y_max) throw ParseError("box has min > max", line_no);
    if (const auto it = b.find("role"); it != b.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError("box role must be a string", line_no);
      box.role = it->get<std::string>();
    }
    r.boxes.push_back(std::move(box));
  }

  if (const auto it = j.find("union_policy"); it != j.end()) {
    const auto policy = it->is_string() ? parse_union_policy(it->get<std::string>()) : std::nullopt;
    if (!policy) throw ParseError("union_policy must be single, union or hull", line_no);
    r.union_policy = *policy;
  }
  if (r.union_policy == UnionPolicy::single && r.boxes.size() != 1) {
    throw ParseError("union_policy single needs exactly one box", line_no);
  }
  if (const auto it = j.find("label_style"); it != j.end() && !it->is_null()) {
    const auto style = it->is_string() ? parse_label_style(it->get<std::string>()) : std::nullopt;
    if (!style) throw ParseError("label_style must be underscore or natural", line_no);
    r.label_style = *style;
  }
  return r;
}

nlohmann::json to_json(const AnnotationRecord& r) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : r.boxes) {
    nlohmann::json jb{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
    if (b.role) jb["role"] = *b.role;
    boxes.push_back(std::move(jb));
  }
  nlohmann::json j{{"sample_id", r.sample_id},
                   {"media_path", r.media_path},
                   {"labeled_frame_index", r.labeled_frame_index},
                   {"label", r.label},
                   {"boxes", std::move(boxes)},
                   {"union_policy", to_string(r.union_policy)}};
  if (r.label_style) j["label_style"] = to_string(*r.label_style);
  return j;
}

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
  std::vector<AnnotationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    records.push_back(record_from_json(j, line_no));
  }
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations " + path.string());
  return parse_annotations(in);
}

std::string serialize_annotations(const std::vector<AnnotationRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

BoundingBox hull_box(const std::vector<BoundingBox>& boxes) {
  if (boxes.empty()) throw InvalidInput("hull of no boxes");
  BoundingBox h = boxes.front();
  h.role.reset();
  for (const auto& b : boxes) {
    h.x_min = std::min(h.x_min, b.x_min);
    h.y_min = std::min(h.y_min, b.y_min);
    h.x_max = std::max(h.x_max, b.x_max);
    h.y_max = std::max(h.y_max, b.y_max);
  }
  return h;
}

bool point_in_box(const Point& point, const AnnotationRecord& record) {
  if (record.boxes.empty()) throw InvalidInput("record " + record.sample_id + " has no boxes");
  switch (record.union_policy) {
    case UnionPolicy::single: return record.boxes.front().contains(point);
    case UnionPolicy::hull: return hull_box(record.boxes).contains(point);
    case UnionPolicy::union_of_boxes:
      return std::any_of(record.boxes.begin(), record.boxes.end(),
                         [&](const BoundingBox& b) { return b.contains(point); });
  }
  return false;
}

EvalReport accuracy(const std::vector<Prediction>& predictions, const std::vector<AnnotationRecord>& records) {
  if (records.empty() || predictions.empty()) throw InvalidInput("accuracy: empty input");

  std::unordered_map<std::string, const AnnotationRecord*> by_id;
  for (const auto& r : records) {
    if (!by_id.emplace(r.sample_id, &r).second) throw InvalidInput("accuracy: duplicate record id " + r.sample_id);
  }
  std::vector<std::string> missing;
  std::unordered_map<std::string, const Prediction*> seen;
  for (const auto& p : predictions) {
    if (!by_id.contains(p.sample_id)) missing.push_back(p.sample_id);
    if (!seen.emplace(p.sample_id, &p).second) throw InvalidInput("accuracy: duplicate prediction " + p.sample_id);
  }
  for (const auto& r : records)
    if (!seen.contains(r.sample_id)) missing.push_back(r.sample_id);
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw InvalidInput("accuracy: unmatched sample ids: " + list);
  }

  EvalReport report;
  std::map<std::string, std::size_t> prompt_hits, prompt_totals;
  for (const auto& p : predictions) {
    const AnnotationRecord& rec = *by_id.at(p.sample_id);
    SampleResult s{p.sample_id, p.point, point_in_box(p.point, rec), {}};
    for (const auto& [name, pt] : p.by_prompt) {
      const bool hit = point_in_box(pt, rec);
      s.by_prompt[name] = hit;
      prompt_hits[name] += hit ? 1 : 0;
      prompt_totals[name] += 1;
    }
    report.correct += s.correct ? 1 : 0;
    report.union_policies[to_string(rec.union_policy)] += 1;
    report.samples.push_back(std::move(s));
  }
  std::sort(report.samples.begin(), report.samples.end(),
            [](const SampleResult& a, const SampleResult& b) { return a.sample_id < b.sample_id; });
  report.total = report.samples.size();
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  for (const auto& [name, total] : prompt_totals) {
    report.breakdown[name] = static_cast<double>(prompt_hits[name]) / static_cast<double>(total);
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["correct"] = correct;
  j["total"] = total;
  j["breakdown"] = breakdown;
  j["union_policies"] = union_policies;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : samples) {
    rows.push_back({{"sample_id", s.sample_id},
                    {"point", {s.point.x, s.point.y}},
                    {"correct", s.correct},
                    {"by_prompt", s.by_prompt}});
  }
  j["samples"] = std::move(rows);
  return j;
}

std::string to_string(SweepMode mode) { return mode == SweepMode::depth ? "depth" : "remove_layer"; }

std::optional<SweepMode> parse_sweep_mode(std::string_view text) {
  if (text == "depth") return SweepMode::depth;
  if (text == "remove_layer") return SweepMode::remove_layer;
  return std::nullopt;
}

std::optional<SweepRange> parse_sweep_range(std::string_view text) {
  auto parse_int = [](std::string_view s) -> std::optional<int> {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
  };
  std::size_t sep = text.find("..");
  std::size_t sep_len = 2;
  if (sep == std::string_view::npos) {
    sep = text.find('-', 1);
    sep_len = 1;
  }
  if (sep == std::string_view::npos) {
    const auto v = parse_int(text);
    if (!v) return std::nullopt;
    return SweepRange{*v, *v};
  }
  const auto a = parse_int(text.substr(0, sep));
  const auto b = parse_int(text.substr(sep + sep_len));
  if (!a || !b || *a > *b) return std::nullopt;
  return SweepRange{*a, *b};
}

std::vector<SweepSetting> sweep_settings(const WeightConfig& base, SweepMode mode, SweepRange range) {
  base.validate();
  const int K = base.depth;
  const int lo = mode == SweepMode::depth ? 0 : 1;
  const int hi = mode == SweepMode::depth ? K : K + 1;
  if (range.first > range.last || range.first < lo || range.last > hi) {
    throw InvalidInput("sweep range " + std::to_string(range.first) + ".." + std::to_string(range.last) +
                       " outside " + std::to_string(lo) + ".." + std::to_string(hi) + " for K = " +
                       std::to_string(K));
  }
  std::vector<SweepSetting> out;
  for (int i = range.first; i <= range.last; ++i) {
    if (mode == SweepMode::depth) {
      out.push_back(SweepSetting{base.with_depth(i), std::nullopt});
    } else {
      out.push_back(SweepSetting{base, K + 1 - i});
    }
  }
  return out;
}

std::vector<SweepRow> ablation_sweep(const WeightConfig& base, SweepMode mode, SweepRange range,
                                     const SweepEvaluator& evaluate) {
  std::vector<SweepRow> rows;
  int index = range.first;
  for (const auto& setting : sweep_settings(base, mode, range)) {
    const EvalReport report = evaluate(setting);
    rows.push_back(SweepRow{std::to_string(index++), report.accuracy, report.total});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "setting,accuracy,n\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.accuracy);
    out += r.setting + "," + buf + "," + std::to_string(r.n) + "\n";
  }
  return out;
}

}  // namespace videogem
