// videogem: training-free action grounding from the command line.
//
//   videogem ground --config run.cfg --media clip/ --frame 12 --label cutting_onion [--out dir]
//   videogem eval   --config run.cfg --annotations test.jsonl [--out dir]
//   videogem sweep  --config run.cfg --annotations test.jsonl --mode depth --range 0..7 [--out dir]
//   videogem make-fixture --seed 42 --out toy.bin [--layers 4 --dim 8 --heads 2 ...]
//
// Exit codes: 0 success, 1 usage or config error, 2 data error.

#include "videogem/config.hpp"
#include "videogem/runner.hpp"
#include "videogem/toy_backbone.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

using namespace videogem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

RunConfig load_config(const std::string& path) { return path.empty() ? default_run_config() : load_run_config(path); }

struct Session {
  RunConfig config;
  std::unique_ptr<Backbone> backbone;
  RuleBasedExtractor extractor;
  std::unique_ptr<Grounder> grounder;

  Session(const std::string& config_path, const std::string& out_override) : config(load_config(config_path)) {
    if (!out_override.empty()) config.out_dir = out_override;
    backbone = open_backbone(config.backbone, config.fixture.string());
    grounder = std::make_unique<Grounder>(*backbone, config, extractor);
  }
};

int cmd_ground(const std::string& config_path, const std::string& media, int frame, const std::string& label,
               const std::string& style, const std::string& out) {
  Session s(config_path, out);
  GroundRequest req{media, frame, label, std::nullopt};
  if (!style.empty()) {
    req.label_style = parse_label_style(style);
    if (!req.label_style) throw ConfigError("--style", "expected underscore or natural");
  }
  const auto json = run_ground(*s.grounder, req, s.config.out_dir);
  const auto& c = json.at("centers").at("decomposed_pixel");
  std::printf("center %g %g\n", c.at(0).get<double>(), c.at(1).get<double>());
  std::printf("wrote %s\n", (s.config.out_dir / "result.json").string().c_str());
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& annotations, const std::string& out) {
  Session s(config_path, out);
  const auto records = load_annotations(annotations);
  if (records.empty()) throw InvalidInput("annotation file " + annotations + " has no records");
  const auto base = std::filesystem::path(annotations).parent_path();
  const EvalReport report = run_eval(*s.grounder, records, base, s.config.workers);
  nlohmann::json out_json{{"report", report.to_json()}, {"metadata", run_metadata(s.config)}};
  out_json["metadata"]["annotations"] = std::filesystem::path(annotations).filename().string();
  write_text_file(s.config.out_dir / "report.json", out_json.dump(2) + "\n");
  std::printf("accuracy %.6f (%zu/%zu)\n", report.accuracy, report.correct, report.total);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& annotations, const std::string& mode_text,
              const std::string& range_text, const std::string& out) {
  Session s(config_path, out);
  const auto mode = parse_sweep_mode(mode_text);
  if (!mode) throw ConfigError("--mode", "expected remove_layer or depth, got '" + mode_text + "'");
  SweepRange range;
  if (range_text.empty()) {
    range = *mode == SweepMode::depth ? SweepRange{0, s.config.weights.depth} : SweepRange{1, s.config.weights.depth + 1};
  } else {
    const auto parsed = parse_sweep_range(range_text);
    if (!parsed) throw ConfigError("--range", "expected a..b, got '" + range_text + "'");
    range = *parsed;
  }
  try {
    sweep_settings(s.config.weights, *mode, range);
  } catch (const InvalidInput& e) {
    throw ConfigError("--range", e.what());
  }
  const auto records = load_annotations(annotations);
  if (records.empty()) throw InvalidInput("annotation file " + annotations + " has no records");
  const auto base = std::filesystem::path(annotations).parent_path();
  const auto rows = run_sweep(*s.grounder, records, base, *mode, range, s.config.workers);
  const std::string csv = sweep_csv(rows);
  write_text_file(s.config.out_dir / ("sweep_" + to_string(*mode) + ".csv"), csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_make_fixture(std::uint64_t seed, const ToyConfig& toy, const std::string& out) {
  try {
    toy.descriptor().validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("make-fixture", e.what());
  }
  if (out.empty()) throw ConfigError("--out", "fixture path required");
  const auto d = make_toy_backbone(seed, toy, out);
  std::printf("wrote %s (L=%d d=%d h=%d grid=%dx%d frames=%d)\n", d.weight_source.c_str(), d.layer_count,
              d.embed_dim, d.head_count, d.grid_rows, d.grid_cols, d.native_frame_count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free spatial action grounding"};
  app.require_subcommand(1);

  std::string config_path, media, label, style, annotations, mode, range, out;
  int frame = 0;

  auto* ground = app.add_subcommand("ground", "Ground one labeled frame and export heatmaps");
  ground->add_option("--config", config_path, "Run configuration file");
  ground->add_option("--media", media, "Frame directory, image or video")->required();
  ground->add_option("--frame", frame, "Labeled frame index")->required();
  ground->add_option("--label", label, "Action label")->required();
  ground->add_option("--style", style, "Label style override (underscore | natural)");
  ground->add_option("--out", out, "Output directory");

  auto* eval = app.add_subcommand("eval", "Pointing-game accuracy over an annotation file");
  eval->add_option("--config", config_path, "Run configuration file");
  eval->add_option("--annotations", annotations, "JSON Lines annotations")->required();
  eval->add_option("--out", out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Layer removal or depth sweep");
  sweep->add_option("--config", config_path, "Run configuration file");
  sweep->add_option("--annotations", annotations, "JSON Lines annotations")->required();
  sweep->add_option("--mode", mode, "remove_layer | depth")->required();
  sweep->add_option("--range", range, "Inclusive range a..b");
  sweep->add_option("--out", out, "Output directory");

  std::uint64_t seed = 42;
  ToyConfig toy;
  auto* fixture = app.add_subcommand("make-fixture", "Write a seeded toy backbone fixture");
  fixture->add_option("--seed", seed, "64-bit seed");
  fixture->add_option("--layers", toy.layers);
  fixture->add_option("--dim", toy.embed_dim);
  fixture->add_option("--heads", toy.heads);
  fixture->add_option("--grid-rows", toy.grid_rows);
  fixture->add_option("--grid-cols", toy.grid_cols);
  fixture->add_option("--frames", toy.native_frames, "Native frame count (1 or 8)");
  fixture->add_option("--joint", toy.joint_dim, "Joint space width (default: dim)");
  fixture->add_option("--mlp", toy.mlp_dim, "MLP width (default: 4*dim)");
  fixture->add_option("--out", out, "Fixture path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ground) return cmd_ground(config_path, media, frame, label, style, out);
    if (*eval) return cmd_eval(config_path, annotations, out);
    if (*sweep) return cmd_sweep(config_path, annotations, mode, range, out);
    if (*fixture) return cmd_make_fixture(seed, toy, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
