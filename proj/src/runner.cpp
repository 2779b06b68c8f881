#include "videogem/runner.hpp"

#include "videogem/heatmap_io.hpp"
#include "videogem/media.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

namespace videogem {

namespace {

nlohmann::json point_json(const Point& p) { return nlohmann::json::array({stable(p.x), stable(p.y)}); }

nlohmann::json vector_json(const VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(stable(v(i)));
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first failure by
/// index is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int effective_workers(const Grounder& g, int workers) { return g.backbone().thread_safe() ? workers : 1; }

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

nlohmann::json run_metadata(const RunConfig& config) {
  return nlohmann::json{{"tool", "videogem"}, {"config", config.metadata()}};
}

nlohmann::json run_ground(const Grounder& grounder, const GroundRequest& request, const std::filesystem::path& out_dir) {
  const RunConfig& cfg = grounder.config();
  const LabelStyle style = request.label_style.value_or(cfg.label_style);
  const MediaSource media = MediaSource::open(request.media);
  const auto indices = sample_frame_indices(request.labeled_frame, media.frame_count(), cfg.clip_length, cfg.frame_mode);
  FrameBatch batch = sample_frames(media, request.labeled_frame, cfg.clip_length, cfg.frame_mode);

  const PreparedSample sample = grounder.prepare(std::move(batch), request.label, style);
  const GroundingResult result = grounder.run(sample);
  const Image& target = sample.batch.frames.at(static_cast<std::size_t>(sample.batch.target_index));

  std::filesystem::create_directories(out_dir);
  nlohmann::json centers = nlohmann::json::object();
  nlohmann::json files = nlohmann::json::object();
  nlohmann::json dynamic = nlohmann::json::object();
  nlohmann::json layer_weights = nlohmann::json::object();
  auto export_map = [&](const std::string& role, const Heatmap& map) {
    const std::string png = "heatmap_" + role + ".png";
    const std::string raw = "heatmap_" + role + ".hmap";
    const std::string overlay = "overlay_" + role + ".png";
    write_heatmap_image(map, out_dir / png);
    write_heatmap_raw(map, out_dir / raw);
    write_overlay(target, map, out_dir / overlay);
    files[role] = {{"image", png}, {"raw", raw}, {"overlay", overlay}};
  };
  for (const auto& o : result.outcomes) {
    centers[o.role] = point_json(Point{o.center.x, o.center.y});
    export_map(o.role, o.heatmap);
    if (o.dynamic) {
      dynamic[o.role] = {{"similarities", vector_json(o.dynamic->similarities)},
                         {"weights", vector_json(o.dynamic->weights)}};
    }
    nlohmann::json lw = nlohmann::json::array();
    for (double w : o.layer_weights) lw.push_back(stable(w));
    layer_weights[o.role] = std::move(lw);
  }
  if (result.merged) export_map("merged", *result.merged);
  centers["decomposed"] = point_json(result.fused);
  centers["decomposed_pixel"] = point_json(result.fused_pixel);

  nlohmann::json out;
  out["sample"] = {{"media", request.media.generic_string()},
                   {"labeled_frame", request.labeled_frame},
                   {"label", request.label},
                   {"label_style", to_string(style)}};
  out["frames"] = {{"indices", indices}, {"target_position", sample.batch.target_index}};
  out["prompts"] = to_json(result.bundle);
  out["centers"] = std::move(centers);
  out["dynamic_weights"] = std::move(dynamic);
  out["layer_weights"] = std::move(layer_weights);
  out["heatmaps"] = std::move(files);
  out["metadata"] = run_metadata(cfg);
  write_text_file(out_dir / "result.json", out.dump(2) + "\n");
  return out;
}

std::vector<PreparedSample> prepare_records(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                                            const std::filesystem::path& base_dir, int workers) {
  const RunConfig& cfg = grounder.config();
  std::vector<std::optional<PreparedSample>> slots(records.size());
  parallel_for(records.size(), effective_workers(grounder, workers), [&](std::size_t i) {
    const AnnotationRecord& r = records[i];
    const std::filesystem::path media_path =
        std::filesystem::path(r.media_path).is_absolute() ? std::filesystem::path(r.media_path) : base_dir / r.media_path;
    const MediaSource media = MediaSource::open(media_path);
    FrameBatch batch = sample_frames(media, r.labeled_frame_index, cfg.clip_length, cfg.frame_mode);
    slots[i] = grounder.prepare(std::move(batch), r.label, r.label_style.value_or(cfg.label_style));
  });
  std::vector<PreparedSample> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

EvalReport evaluate_prepared(const Grounder& grounder, const std::vector<PreparedSample>& samples,
                             const std::vector<AnnotationRecord>& records, const SweepSetting& setting, int workers) {
  if (samples.size() != records.size()) throw InvalidInput("evaluate: samples and records differ in count");
  std::vector<Prediction> predictions(records.size());
  parallel_for(records.size(), effective_workers(grounder, workers), [&](std::size_t i) {
    predictions[i] = to_prediction(records[i].sample_id, grounder.run(samples[i], setting));
  });
  return accuracy(predictions, records);
}

EvalReport run_eval(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                    const std::filesystem::path& base_dir, int workers) {
  if (records.empty()) throw InvalidInput("no annotation records");
  const auto samples = prepare_records(grounder, records, base_dir, workers);
  return evaluate_prepared(grounder, samples, records, grounder.default_setting(), workers);
}

std::vector<SweepRow> run_sweep(const Grounder& grounder, const std::vector<AnnotationRecord>& records,
                                const std::filesystem::path& base_dir, SweepMode mode, SweepRange range, int workers) {
  if (records.empty()) throw InvalidInput("no annotation records");
  // Validate the range before paying for any forward passes.
  sweep_settings(grounder.config().weights, mode, range);
  const auto samples = prepare_records(grounder, records, base_dir, workers);
  return ablation_sweep(grounder.config().weights, mode, range, [&](const SweepSetting& setting) {
    return evaluate_prepared(grounder, samples, records, setting, workers);
  });
}

}  // namespace videogem
