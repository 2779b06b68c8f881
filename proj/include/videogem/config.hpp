#pragma once

// Run configuration: a flat `key = value` text file, `#` starts a comment.
// Every key is optional; missing keys take the defaults below, which are the
// settings used for the published results.
//
//   backbone       toy                                 adapter name
//   fixture        (none)                              toy weight file
//   K              7                                   pathway depth
//   J              1                                   self-self iterations
//   tau            sqrt_dh                             self-self temperature, or a number
//   w_s            0.3,0.4,0.5,0.6,0.7,0.9,0.9,0.9     static weights from X^{L-K} up
//   D              3                                   dynamic depth
//   tau_d          20                                  dynamic temperature
//   weighting      combined                            none | static | dynamic | combined
//   pathway_input  accumulated                         accumulated | backbone
//   decomposition  on                                  on | off
//   fusion         0.2,0.2,0.6                         verb,object,action center weights
//   merge          center_average                      center_average | heatmap_average | heatmap_multiply
//   merge_ratio    1,1,3                               heatmap merge ratio
//   label_style    underscore                          underscore | natural
//   T              8                                   clip length
//   frame_mode     video                               video | repeated_image
//   workers        1                                   evaluation threads
//   out            out                                 output directory
//
// Relative fixture paths resolve against $VIDEOGEM_FIXTURE_ROOT when set,
// otherwise against the config file's directory.

#include "videogem/evaluation.hpp"
#include "videogem/gem.hpp"
#include "videogem/prompt.hpp"
#include "videogem/weighting.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace videogem {

inline constexpr const char* kFixtureRootEnv = "VIDEOGEM_FIXTURE_ROOT";

struct RunConfig {
  std::string backbone = "toy";
  std::filesystem::path fixture;
  int iterations = 1;
  /// Empty means sqrt(d_h).
  std::optional<double> temperature;
  WeightConfig weights;
  PathwayInput pathway_input = PathwayInput::accumulated;
  bool decomposition = true;
  FusionWeights fusion;
  MergePolicy merge;
  LabelStyle label_style = LabelStyle::underscore;
  int clip_length = 8;
  FrameMode frame_mode = FrameMode::video;
  int workers = 1;
  std::filesystem::path out_dir = "out";

  /// Key/value pairs as written in the file (defaults filled in), in the
  /// canonical key order. Echoed verbatim into run metadata.
  std::vector<std::pair<std::string, std::string>> raw;

  SelfSelfConfig self_self(const BackboneDescriptor& backbone) const;
  nlohmann::json metadata() const;
};

/// Canonical keys and their default value text.
const std::vector<std::pair<std::string, std::string>>& default_config_entries();

/// Throws ConfigError naming the first bad key.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig default_run_config();

/// Resolves a fixture path with the rules above.
std::filesystem::path resolve_fixture(const std::filesystem::path& fixture, const std::filesystem::path& base_dir);

}  // namespace videogem
