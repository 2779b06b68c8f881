#include "videogem/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace videogem {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

bool parse_switch(const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw ConfigError(key, "expected on or off, got '" + text + "'");
}

template <typename T, typename Parse>
T parse_enum(const std::string& key, const std::string& text, Parse parse) {
  const auto v = parse(text);
  if (!v) throw ConfigError(key, "unknown value '" + text + "'");
  return *v;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& default_config_entries() {
  static const std::vector<std::pair<std::string, std::string>> entries = {
      {"backbone", "toy"},
      {"fixture", ""},
      {"K", "7"},
      {"J", "1"},
      {"tau", "sqrt_dh"},
      {"w_s", "0.3,0.4,0.5,0.6,0.7,0.9,0.9,0.9"},
      {"D", "3"},
      {"tau_d", "20"},
      {"weighting", "combined"},
      {"pathway_input", "accumulated"},
      {"decomposition", "on"},
      {"fusion", "0.2,0.2,0.6"},
      {"merge", "center_average"},
      {"merge_ratio", "1,1,3"},
      {"label_style", "underscore"},
      {"T", "8"},
      {"frame_mode", "video"},
      {"workers", "1"},
      {"out", "out"},
  };
  return entries;
}

std::filesystem::path resolve_fixture(const std::filesystem::path& fixture, const std::filesystem::path& base_dir) {
  if (fixture.empty() || fixture.is_absolute()) return fixture;
  if (const char* root = std::getenv(kFixtureRootEnv); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / fixture;
  }
  return base_dir.empty() ? fixture : base_dir / fixture;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> given;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    bool known = false;
    for (const auto& [k, v] : default_config_entries()) known = known || k == key;
    if (!known) throw ConfigError(key, "unknown key");
    if (!given.emplace(key, value).second) throw ConfigError(key, "given twice");
  }

  RunConfig cfg;
  for (const auto& [key, def] : default_config_entries()) {
    const auto it = given.find(key);
    cfg.raw.emplace_back(key, it != given.end() ? it->second : def);
  }
  auto value = [&](const std::string& key) -> const std::string& {
    for (const auto& [k, v] : cfg.raw)
      if (k == key) return v;
    throw ConfigError(key, "missing");
  };

  cfg.backbone = value("backbone");
  if (cfg.backbone.empty()) throw ConfigError("backbone", "must not be empty");
  cfg.fixture = resolve_fixture(value("fixture"), base_dir);
  if (cfg.backbone == "toy") {
    if (cfg.fixture.empty()) throw ConfigError("fixture", "toy backbone needs a fixture path");
    if (!std::filesystem::exists(cfg.fixture)) throw ConfigError("fixture", "file not found: " + cfg.fixture.string());
  }

  cfg.iterations = parse_int("J", value("J"));
  if (cfg.iterations < 0) throw ConfigError("J", "must be >= 0");
  if (value("tau") != "sqrt_dh") {
    cfg.temperature = parse_double("tau", value("tau"));
    if (!(*cfg.temperature > 0.0)) throw ConfigError("tau", "must be > 0");
  }

  cfg.weights.depth = parse_int("K", value("K"));
  cfg.weights.dynamic_depth = parse_int("D", value("D"));
  cfg.weights.dynamic_temperature = parse_double("tau_d", value("tau_d"));
  cfg.weights.static_weights = parse_list("w_s", value("w_s"));
  cfg.weights.mode = parse_enum<WeightingMode>("weighting", value("weighting"), parse_weighting_mode);
  if (cfg.weights.depth < 0) throw ConfigError("K", "must be >= 0");
  if (cfg.weights.dynamic_depth < 0 || cfg.weights.dynamic_depth > cfg.weights.depth) {
    throw ConfigError("D", "must lie in [0, K]");
  }
  if (!(cfg.weights.dynamic_temperature > 0.0)) throw ConfigError("tau_d", "must be > 0");
  if (cfg.weights.static_weights.size() != static_cast<std::size_t>(cfg.weights.depth) + 1) {
    throw ConfigError("w_s", "needs K+1 = " + std::to_string(cfg.weights.depth + 1) + " entries");
  }

  const std::string& input = value("pathway_input");
  if (input == "accumulated") {
    cfg.pathway_input = PathwayInput::accumulated;
  } else if (input == "backbone") {
    cfg.pathway_input = PathwayInput::backbone;
  } else {
    throw ConfigError("pathway_input", "unknown value '" + input + "'");
  }

  cfg.decomposition = parse_switch("decomposition", value("decomposition"));
  const auto fusion = parse_list("fusion", value("fusion"));
  if (fusion.size() != 3) throw ConfigError("fusion", "needs three weights");
  cfg.fusion = FusionWeights{fusion[0], fusion[1], fusion[2]};
  try {
    cfg.fusion.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("fusion", e.what());
  }
  cfg.merge.strategy = parse_enum<MergeStrategy>("merge", value("merge"), parse_merge_strategy);
  const auto ratio = parse_list("merge_ratio", value("merge_ratio"));
  if (ratio.size() != 3) throw ConfigError("merge_ratio", "needs three entries");
  cfg.merge.ratio = {ratio[0], ratio[1], ratio[2]};
  try {
    cfg.merge.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("merge_ratio", e.what());
  }
  cfg.label_style = parse_enum<LabelStyle>("label_style", value("label_style"), parse_label_style);

  cfg.clip_length = parse_int("T", value("T"));
  if (cfg.clip_length < 1) throw ConfigError("T", "must be >= 1");
  const std::string& mode = value("frame_mode");
  if (mode == "video") {
    cfg.frame_mode = FrameMode::video;
  } else if (mode == "repeated_image") {
    cfg.frame_mode = FrameMode::repeated_image;
  } else {
    throw ConfigError("frame_mode", "unknown value '" + mode + "'");
  }
  cfg.workers = parse_int("workers", value("workers"));
  if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
  cfg.out_dir = value("out");
  if (cfg.out_dir.empty()) throw ConfigError("out", "must not be empty");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.raw = default_config_entries();
  return cfg;
}

SelfSelfConfig RunConfig::self_self(const BackboneDescriptor& backbone) const {
  SelfSelfConfig ss = SelfSelfConfig::for_backbone(backbone, iterations);
  if (temperature) ss.temperature = *temperature;
  return ss;
}

nlohmann::json RunConfig::metadata() const {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : raw) cfg[k] = v;
  return cfg;
}

}  // namespace videogem
