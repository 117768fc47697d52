#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "priorfill/align.hpp"
#include "priorfill/io.hpp"
#include "priorfill/scenegen.hpp"
#include "priorfill/synth.hpp"

namespace priorfill {

inline constexpr const char* kToolVersion = "priorfill 1.0.0";
inline constexpr int kConfigVersion = 1;

enum class Method { prefill, prefill_uniform, interpolation, global_align };
std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

enum class RegionMode { all, holes };

/// One pattern of a prior recipe. Seeds left unset are derived from the
/// master seed.
struct PatternEntry {
  PriorPattern pattern;
  std::optional<std::uint64_t> seed;
};

struct PriorRecipe {
  std::string name;
  /// Keep only the most confident pixels of the ground-truth map first
  /// (needs inputs.confidence).
  std::optional<double> confidence_top_fraction;
  std::vector<PatternEntry> patterns;
  std::optional<NoiseSpec> noise;
  /// Unset outlier ranges default to the ground-truth depth range.
  bool noise_range_explicit = false;
  /// Unset noise seeds are derived from the master seed.
  bool noise_seed_explicit = false;
};

struct InputFiles {
  std::optional<std::filesystem::path> gt;
  std::optional<std::filesystem::path> prediction;
  std::optional<std::filesystem::path> confidence;
  std::optional<std::filesystem::path> prior;
  std::optional<std::filesystem::path> estimate;
};

struct PipelineConfig {
  std::optional<SceneSpec> scene;
  bool scene_seed_explicit = false;
  PredictionSpec prediction;
  bool prediction_seed_explicit = false;
  std::optional<InputFiles> inputs;
  double png_scale_mm = 1.0;

  std::vector<PriorRecipe> priors;
  std::vector<Method> methods;
  FillConfig fill;

  double silog_lambda = 1.0;
  RegionMode regions = RegionMode::all;
  bool error_maps = false;

  int bench_scenes = 1;
  std::vector<SceneKind> bench_kinds;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Normalized echo of the parsed document, written into reports.
  nlohmann::json echo;
};

/// Throws ConfigError (schema problems) or BadSpec (illegal values).
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  unsigned threads = 1;
  bool timings = false;
  int verbosity = 0;
};

/// Process exit status for a typed error: 2 for configuration/IO problems,
/// 3 for data problems (empty priors, empty evaluation sets, bad files).
int exit_code_for(Errc code) noexcept;

// Each command writes into cfg.output_dir (created if missing) and returns
// the report bytes it wrote, if it writes one.
void cmd_scene(const PipelineConfig& cfg, const RunOptions& opt);
void cmd_synth(const PipelineConfig& cfg, const RunOptions& opt);
Bytes cmd_prefill(const PipelineConfig& cfg, const RunOptions& opt);
Bytes cmd_eval(const PipelineConfig& cfg, const RunOptions& opt);
Bytes cmd_bench(const PipelineConfig& cfg, const RunOptions& opt);

/// Resolves the named prior recipe shorthand ("S", "L", "M", "S+M", ...).
std::vector<PatternEntry> preset_patterns(std::string_view preset);

}  // namespace priorfill
