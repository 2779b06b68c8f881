#pragma once

// File-level drivers behind the CLI: ground one clip, evaluate an annotation
// set, run layer sweeps. Output files are deterministic for a fixed config and
// fixtures; floats are written through stable().

#include "videogem/evaluation.hpp"
#include "videogem/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace videogem {

struct GroundRequest {
  std::filesystem::path media;
  int labeled_frame = 0;
  std::string label;
  /// Falls back to the config's label style.
  std::optional<LabelStyle> label_style;
};

nlohmann::json run_metadata(const RunConfig& config);

/// Grounds one clip and writes into `out_dir`:
///   result.json, heatmap_<role>.png, heatmap_<role>.hmap, overlay_<role>.png
///   (and the merged map for heatmap merge strategies).
/// Returns the JSON written to result.json.
nlohmann::json run_ground(const Grounder& grounder, const GroundRequest& request, const std::filesystem::path& out_dir);

/// Loads media for every record (paths relative to `base_dir`) and runs the
/// backbone once per record; `workers` threads.
std::vector<PreparedSample> prepare_records(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                                            const std::filesystem::path& base_dir, int workers);

EvalReport evaluate_prepared(const Grounder& grounder, const std::vector<PreparedSample>& samples,
                             const std::vector<AnnotationRecord>& records, const SweepSetting& setting, int workers);

EvalReport run_eval(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                    const std::filesystem::path& base_dir, int workers);

std::vector<SweepRow> run_sweep(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                                const std::filesystem::path& base_dir, SweepMode mode, SweepRange range, int workers);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace videogem
