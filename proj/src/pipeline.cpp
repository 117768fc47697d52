#include "priorfill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "priorfill/metrics.hpp"
#include "priorfill/parallel.hpp"
#include "priorfill/random.hpp"

namespace priorfill {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::prefill: return "prefill";
    case Method::prefill_uniform: return "prefill_uniform";
    case Method::interpolation: return "interpolation";
    case Method::global_align: return "global_align";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::prefill, Method::prefill_uniform, Method::interpolation,
                 Method::global_align}) {
    if (method_name(m) == name) return m;
  }
  throw Error(Errc::ConfigError, "unknown method '" + std::string(name) + "'");
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigError:
    case Errc::BadSpec:
    case Errc::BadRange:
    case Errc::IoError:
      return 2;
    default:
      return 3;
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

// Typed access to one JSON object; finish() rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  template <class T>
  T req(const std::string& key) {
    if (!has(key)) fail("missing required key '" + key + "'");
    return get<T>(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::ConfigError, where_ + ": " + msg);
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T get(const std::string& key) {
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          throw std::invalid_argument("not unsigned");
        }
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw std::invalid_argument("not integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("not a number");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      fail("bad value for '" + key + "': " + v.dump());
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Distortion parse_distortion(const json& j, const std::string& where, bool& seed_explicit) {
  ObjectReader r(j, where);
  const auto type = r.req<std::string>("type");
  Distortion d = NoDistortion{};
  if (type == "none") {
  } else if (type == "gamma") {
    d = GammaDistortion{r.req<double>("gamma")};
  } else if (type == "smooth_noise") {
    SmoothNoiseDistortion n;
    n.amplitude = r.req<double>("amplitude");
    n.cell_px = r.opt<int>("cell_px").value_or(16);
    if (auto s = r.opt<std::uint64_t>("seed")) {
      n.seed = *s;
      seed_explicit = true;
    }
    d = n;
  } else {
    r.fail("unknown distortion type '" + type + "'");
  }
  r.finish();
  return d;
}

PatternEntry parse_pattern(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  const auto type = r.req<std::string>("type");
  PatternEntry e{SparseRandom{}, r.opt<std::uint64_t>("seed")};
  if (type == "sparse_random") {
    e.pattern = SparseRandom{r.req<std::size_t>("n")};
  } else if (type == "sparse_keypoint") {
    e.pattern = SparseKeypoint{r.req<std::size_t>("n")};
  } else if (type == "lidar_lines") {
    e.pattern = LidarLines{r.req<int>("lines")};
  } else if (type == "low_res") {
    e.pattern = LowRes{r.req<int>("factor")};
  } else if (type == "range_mask") {
    e.pattern = RangeMask{r.req<double>("threshold_m")};
  } else if (type == "square_mask") {
    SquareMask m{r.req<int>("side_px"), std::nullopt};
    if (r.has("center")) {
      const auto c = r.raw("center");
      if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer()) {
        r.fail("center must be [x, y]");
      }
      m.center = Coord{c[0].get<int>(), c[1].get<int>()};
    }
    e.pattern = m;
  } else if (type == "mask_file") {
    const fs::path p = r.req<std::string>("path");
    e.pattern = MaskFile{read_mask_png(read_file(p))};
  } else {
    r.fail("unknown pattern type '" + type + "'");
  }
  r.finish();
  return e;
}

NoiseSpec parse_noise(const json& j, const std::string& where, bool& range_explicit,
                      bool& seed_explicit) {
  ObjectReader r(j, where);
  NoiseSpec n;
  n.outlier_fraction = r.opt<double>("outlier_fraction").value_or(n.outlier_fraction);
  n.boundary_noise_sigma = r.opt<double>("boundary_noise_sigma").value_or(n.boundary_noise_sigma);
  n.boundary_band_px = r.opt<int>("boundary_band_px").value_or(n.boundary_band_px);
  if (r.has("outlier_range")) {
    const auto v = r.raw("outlier_range");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      r.fail("outlier_range must be [min_m, max_m]");
    }
    n.outlier_min_m = v[0].get<double>();
    n.outlier_max_m = v[1].get<double>();
    range_explicit = true;
  }
  if (auto s = r.opt<std::uint64_t>("seed")) {
    n.seed = *s;
    seed_explicit = true;
  }
  r.finish();
  return n;
}

}  // namespace

std::vector<PatternEntry> preset_patterns(std::string_view preset) {
  std::vector<PatternEntry> out;
  std::size_t start = 0;
  while (start <= preset.size()) {
    const std::size_t end = std::min(preset.find('+', start), preset.size());
    const std::string_view part = preset.substr(start, end - start);
    if (part == "S" || part == "Extreme") {
      out.push_back({SparseRandom{100}, std::nullopt});
    } else if (part == "L") {
      out.push_back({LowRes{16}, std::nullopt});
    } else if (part == "M" || part == "Shape") {
      out.push_back({SquareMask{160, std::nullopt}, std::nullopt});
    } else if (part == "LiDAR") {
      out.push_back({LidarLines{8}, std::nullopt});
    } else {
      throw Error(Errc::ConfigError, "unknown prior preset '" + std::string(part) + "'");
    }
    start = end + 1;
  }
  return out;
}

PipelineConfig parse_config(const json& doc) {
  PipelineConfig cfg;
  ObjectReader top(doc, "config");
  const int version = top.req<int>("version");
  if (version != kConfigVersion) top.fail("unsupported config version " + std::to_string(version));
  cfg.seed = top.opt<std::uint64_t>("seed").value_or(0);
  if (auto out = top.opt<std::string>("output")) cfg.output_dir = *out;

  if (top.has("scene")) {
    ObjectReader r(top.raw("scene"), "scene");
    SceneSpec s;
    s.kind = parse_scene_kind(r.req<std::string>("kind"));
    s.width = r.req<int>("width");
    s.height = r.req<int>("height");
    const auto range = r.req<std::vector<double>>("depth_range");
    if (range.size() != 2) r.fail("depth_range must be [min_m, max_m]");
    s.min_depth_m = range[0];
    s.max_depth_m = range[1];
    s.steps = r.opt<int>("steps").value_or(s.steps);
    if (auto seed = r.opt<std::uint64_t>("seed")) {
      s.seed = *seed;
      cfg.scene_seed_explicit = true;
    }
    r.finish();
    if (s.width < 8 || s.height < 8) throw Error(Errc::BadSpec, "scene must be at least 8x8");
    if (!(s.min_depth_m > 0.0) || !(s.max_depth_m > s.min_depth_m)) {
      throw Error(Errc::BadSpec, "scene depth_range must satisfy 0 < min < max");
    }
    cfg.scene = s;
  }

  if (top.has("prediction")) {
    ObjectReader r(top.raw("prediction"), "prediction");
    cfg.prediction.a = r.opt<double>("a").value_or(1.0);
    cfg.prediction.b = r.opt<double>("b").value_or(0.0);
    if (r.has("distortion")) {
      cfg.prediction.distortion =
          parse_distortion(r.raw("distortion"), "prediction.distortion", cfg.prediction_seed_explicit);
    }
    r.finish();
    if (!(cfg.prediction.a > 0.0)) throw Error(Errc::BadSpec, "prediction.a must be > 0");
  }

  if (top.has("inputs")) {
    ObjectReader r(top.raw("inputs"), "inputs");
    InputFiles in;
    if (auto p = r.opt<std::string>("gt")) in.gt = *p;
    if (auto p = r.opt<std::string>("prediction")) in.prediction = *p;
    if (auto p = r.opt<std::string>("confidence")) in.confidence = *p;
    if (auto p = r.opt<std::string>("prior")) in.prior = *p;
    if (auto p = r.opt<std::string>("estimate")) in.estimate = *p;
    cfg.png_scale_mm = r.opt<double>("png_scale_mm").value_or(1.0);
    r.finish();
    cfg.inputs = in;
  }
  if (cfg.scene && cfg.inputs) {
    throw Error(Errc::ConfigError, "config: 'scene' and 'inputs' are mutually exclusive");
  }
  if (top.has("png_scale_mm")) cfg.png_scale_mm = top.req<double>("png_scale_mm");
  if (!(cfg.png_scale_mm > 0.0)) throw Error(Errc::BadSpec, "png_scale_mm must be > 0");

  if (top.has("priors")) {
    const json& arr = top.raw("priors");
    if (!arr.is_array()) throw Error(Errc::ConfigError, "priors: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "priors[" + std::to_string(i) + "]";
      ObjectReader r(arr[i], where);
      PriorRecipe rec;
      rec.name = r.req<std::string>("name");
      if (rec.name.empty() || rec.name.find_first_of("/\\ ") != std::string::npos) {
        r.fail("prior names must be non-empty without spaces or slashes");
      }
      if (!names.insert(rec.name).second) r.fail("duplicate prior name '" + rec.name + "'");
      if (auto preset = r.opt<std::string>("preset")) rec.patterns = preset_patterns(*preset);
      if (r.has("patterns")) {
        const json& ps = r.raw("patterns");
        if (!ps.is_array()) r.fail("patterns must be an array");
        for (std::size_t j = 0; j < ps.size(); ++j) {
          rec.patterns.push_back(parse_pattern(ps[j], where + ".patterns[" + std::to_string(j) + "]"));
        }
      }
      rec.confidence_top_fraction = r.opt<double>("confidence_top_fraction");
      if (r.has("noise")) {
        rec.noise = parse_noise(r.raw("noise"), where + ".noise", rec.noise_range_explicit,
                                rec.noise_seed_explicit);
      }
      r.finish();
      cfg.priors.push_back(std::move(rec));
    }
  }

  if (top.has("methods")) {
    for (const auto& m : top.req<std::vector<std::string>>("methods")) {
      cfg.methods.push_back(parse_method(m));
    }
  } else {
    cfg.methods = {Method::prefill};
  }
  if (cfg.methods.empty()) throw Error(Errc::ConfigError, "methods: at least one method required");

  if (top.has("fill")) {
    ObjectReader r(top.raw("fill"), "fill");
    const auto k = r.opt<long long>("k").value_or(5);
    if (k < 1) throw Error(Errc::BadSpec, "fill.k must be >= 1");
    cfg.fill.k = static_cast<std::size_t>(k);
    if (auto w = r.opt<std::string>("weighting")) cfg.fill.weighting = parse_weighting(*w);
    cfg.fill.min_scale_variance =
        r.opt<double>("min_scale_variance").value_or(cfg.fill.min_scale_variance);
    cfg.fill.expand_degenerate = r.opt<bool>("expand_degenerate").value_or(true);
    cfg.fill.max_leverage = r.opt<double>("max_leverage").value_or(cfg.fill.max_leverage);
    r.finish();
    if (!(cfg.fill.max_leverage >= 0.0)) throw Error(Errc::BadSpec, "fill.max_leverage must be >= 0");
    if (!(cfg.fill.min_scale_variance >= 0.0)) {
      throw Error(Errc::BadSpec, "fill.min_scale_variance must be >= 0");
    }
  }

  if (top.has("metrics")) {
    ObjectReader r(top.raw("metrics"), "metrics");
    cfg.silog_lambda = r.opt<double>("lambda").value_or(1.0);
    const auto regions = r.opt<std::string>("regions").value_or("all");
    if (regions == "all") {
      cfg.regions = RegionMode::all;
    } else if (regions == "holes") {
      cfg.regions = RegionMode::holes;
    } else {
      r.fail("regions must be 'all' or 'holes'");
    }
    cfg.error_maps = r.opt<bool>("error_maps").value_or(false);
    r.finish();
  }

  if (top.has("bench")) {
    ObjectReader r(top.raw("bench"), "bench");
    cfg.bench_scenes = r.opt<int>("scenes").value_or(1);
    if (cfg.bench_scenes < 1) throw Error(Errc::BadSpec, "bench.scenes must be >= 1");
    for (const auto& k : r.opt<std::vector<std::string>>("kinds").value_or(std::vector<std::string>{})) {
      cfg.bench_kinds.push_back(parse_scene_kind(k));
    }
    r.finish();
  }
  top.finish();

  cfg.echo = doc;
  cfg.echo.erase("output");
  cfg.echo["seed"] = cfg.seed;
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  const Bytes bytes = read_file(path);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Execution

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

class Logger {
 public:
  explicit Logger(int verbosity) : verbosity_(verbosity) {}
  void info(const std::string& msg) const {
    if (verbosity_ > 0) std::cerr << "[priorfill] " << msg << '\n';
  }

 private:
  int verbosity_;
};

bool is_png(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

DepthMap read_depth_file(const fs::path& p, double png_scale_mm) {
  const Bytes bytes = read_file(p);
  return is_png(p) ? read_depth_png16(bytes, png_scale_mm) : DepthMap::from_sentinel(read_pfm(bytes));
}

struct SceneData {
  DepthMap gt;
  std::optional<RelativePrediction> pred;
  std::optional<Grid> confidence;
  std::uint64_t seed = 0;
};

SceneData load_scene(const PipelineConfig& cfg, int index) {
  const std::string tag = "scene/" + std::to_string(index);
  if (cfg.scene) {
    SceneSpec spec = *cfg.scene;
    if (!cfg.bench_kinds.empty()) {
      spec.kind = cfg.bench_kinds[static_cast<std::size_t>(index) % cfg.bench_kinds.size()];
    }
    spec.seed = derive_seed(cfg.scene_seed_explicit ? cfg.scene->seed : cfg.seed, tag);
    DepthMap gt = generate_scene(spec);
    PredictionSpec ps = cfg.prediction;
    if (auto* n = std::get_if<SmoothNoiseDistortion>(&ps.distortion)) {
      n->seed = derive_seed(cfg.prediction_seed_explicit ? n->seed : cfg.seed, "prediction/" + tag);
    }
    RelativePrediction pred = derive_prediction(gt, ps);
    return SceneData{std::move(gt), std::move(pred), std::nullopt, spec.seed};
  }
  if (!cfg.inputs || !cfg.inputs->gt) {
    throw Error(Errc::ConfigError, "need either 'scene' or 'inputs.gt'");
  }
  SceneData d{read_depth_file(*cfg.inputs->gt, cfg.png_scale_mm), std::nullopt, std::nullopt, 0};
  if (cfg.inputs->prediction) {
    d.pred = RelativePrediction(read_pfm(read_file(*cfg.inputs->prediction)));
    require_same_shape(d.gt, *d.pred, "inputs.prediction");
  }
  if (cfg.inputs->confidence) {
    d.confidence = read_pfm(read_file(*cfg.inputs->confidence));
    require_same_shape(d.gt, *d.confidence, "inputs.confidence");
  }
  return d;
}

struct PriorData {
  std::string name;
  DepthMap clean;
  std::optional<DepthMap> noisy;

  const DepthMap& used() const { return noisy ? *noisy : clean; }
};

PriorData build_prior(const PipelineConfig& cfg, const PriorRecipe& rec, const SceneData& scene,
                      int index) {
  const std::string tag = "/scene/" + std::to_string(index);
  DepthMap current = scene.gt;
  if (rec.confidence_top_fraction) {
    if (!scene.confidence) {
      throw Error(Errc::ConfigError, "prior '" + rec.name + "' needs inputs.confidence");
    }
    current = prior_from_confidence(current, *scene.confidence, *rec.confidence_top_fraction);
  }
  for (std::size_t j = 0; j < rec.patterns.size(); ++j) {
    const auto& pe = rec.patterns[j];
    const std::uint64_t seed =
        pe.seed ? *pe.seed : derive_seed(cfg.seed, "prior/" + rec.name + "/" + std::to_string(j) + tag);
    current = apply_prior(current, PriorSpec{pe.pattern, seed});
  }
  PriorData out{rec.name, current, std::nullopt};
  if (rec.noise) {
    NoiseSpec n = *rec.noise;
    if (!rec.noise_range_explicit) {
      float lo = 0.0f, hi = 0.0f;
      bool any = false;
      for (std::size_t i = 0; i < scene.gt.size(); ++i) {
        if (!scene.gt.valid(i)) continue;
        lo = any ? std::min(lo, scene.gt[i]) : scene.gt[i];
        hi = any ? std::max(hi, scene.gt[i]) : scene.gt[i];
        any = true;
      }
      n.outlier_min_m = lo;
      n.outlier_max_m = hi;
    }
    if (!rec.noise_seed_explicit) n.seed = derive_seed(cfg.seed, "noise/" + rec.name + tag);
    out.noisy = perturb(current, n);
  }
  return out;
}

std::vector<PriorData> build_priors(const PipelineConfig& cfg, const SceneData& scene, int index) {
  std::vector<PriorData> out;
  if (cfg.inputs && cfg.inputs->prior) {
    out.push_back({"input", read_depth_file(*cfg.inputs->prior, cfg.png_scale_mm), std::nullopt});
    require_same_shape(out.back().clean, scene.gt, "inputs.prior");
  }
  for (const auto& rec : cfg.priors) out.push_back(build_prior(cfg, rec, scene, index));
  if (out.empty()) throw Error(Errc::ConfigError, "no prior: give 'priors' or 'inputs.prior'");
  return out;
}

struct MethodRun {
  DepthMap map;
  FillReport fill;
};

MethodRun run_method(Method m, const PipelineConfig& cfg, const DepthMap& prior,
                     const std::optional<RelativePrediction>& pred, unsigned threads,
                     StageTimings& t) {
  if ((m != Method::interpolation) && !pred) {
    throw Error(Errc::ConfigError,
                std::string(method_name(m)) + " needs a prediction (scene or inputs.prediction)");
  }
  switch (m) {
    case Method::prefill:
    case Method::prefill_uniform: {
      FillConfig fc = cfg.fill;
      if (m == Method::prefill_uniform) fc.weighting = Weighting::uniform;
      require_same_shape(prior, *pred, "prefill");
      auto t0 = Clock::now();
      const SpatialIndex index(prior);
      t.index += ms_since(t0);
      t0 = Clock::now();
      FillResult r = prefill(prior, index, *pred, fc, threads);
      t.prefill += ms_since(t0);
      return {std::move(r.map), r.report};
    }
    case Method::interpolation: {
      const auto t0 = Clock::now();
      DepthMap map = prefill_interpolation(prior, cfg.fill.k, threads);
      t.prefill += ms_since(t0);
      FillReport rep;
      rep.filled = prior.size() - count_valid(prior);
      return {std::move(map), rep};
    }
    case Method::global_align: {
      const auto t0 = Clock::now();
      GlobalAlignResult g = global_align(prior, *pred);
      t.prefill += ms_since(t0);
      FillReport rep;
      rep.filled = prior.size();
      rep.clamped = g.clamped;
      rep.degenerate = g.fit.degenerate ? prior.size() : 0;
      return {std::move(g.map), rep};
    }
  }
  throw Error(Errc::ConfigError, "unhandled method");
}

json fill_json(const FillReport& r) {
  return {{"filled", r.filled},
          {"clamped", r.clamped},
          {"degenerate", r.degenerate},
          {"expanded", r.expanded}};
}

std::string file_stem(const std::string& prior, Method m) {
  return prior + "_" + std::string(method_name(m));
}

fs::path prepare_output(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + cfg.output_dir.string() + "': " + ec.message());
  return cfg.output_dir;
}

ValidityMask region_for(const PipelineConfig& cfg, const DepthMap& prior) {
  return cfg.regions == RegionMode::holes ? holes_of(prior)
                                          : ValidityMask::filled(prior.width(), prior.height(), true);
}

// Every method on every prior of one scene, with metrics.
struct SceneOutcome {
  std::vector<json> rows;
  std::vector<double> absrel;  // prior-major, method-minor
  std::uint64_t clamped = 0;
  StageTimings timings;
};

SceneOutcome evaluate_scene(const PipelineConfig& cfg, int index, unsigned threads,
                            const fs::path* error_map_dir) {
  SceneOutcome out;
  auto t0 = Clock::now();
  const SceneData scene = load_scene(cfg, index);
  const auto priors = build_priors(cfg, scene, index);
  out.timings.synth += ms_since(t0);
  for (const auto& p : priors) {
    const DepthMap& prior = p.used();
    const ValidityMask region = region_for(cfg, prior);
    for (Method m : cfg.methods) {
      MethodRun run = run_method(m, cfg, prior, scene.pred, threads, out.timings);
      out.clamped += run.fill.clamped;
      t0 = Clock::now();
      const MetricsReport mr = evaluate(run.map, scene.gt, &region, cfg.silog_lambda);
      out.timings.metrics += ms_since(t0);
      out.absrel.push_back(mr.absrel);
      out.rows.push_back({{"scene", index},
                          {"prior", p.name},
                          {"method", method_name(m)},
                          {"prior_valid_pixels", count_valid(prior)},
                          {"metrics", to_json(mr)},
                          {"fill", fill_json(run.fill)}});
      if (error_map_dir) {
        const ErrorMap em = error_map(run.map, scene.gt);
        const std::string stem = "errormap_" + file_stem(p.name, m);
        write_file(*error_map_dir / (stem + ".pfm"), write_pfm(em.relative_error));
        write_file(*error_map_dir / (stem + ".png"), visualize_png(em.relative_error, 0.25));
      }
    }
  }
  return out;
}

}  // namespace

void cmd_scene(const PipelineConfig& cfg, const RunOptions& opt) {
  if (!cfg.scene) throw Error(Errc::ConfigError, "scene command needs a 'scene' section");
  const Logger log(opt.verbosity);
  const fs::path dir = prepare_output(cfg);
  const SceneData scene = load_scene(cfg, 0);
  write_file(dir / "gt.pfm", write_pfm(scene.gt.depth()));
  write_file(dir / "pred.pfm", write_pfm(scene.pred->grid()));
  log.info("wrote gt.pfm and pred.pfm (" + std::to_string(scene.gt.width()) + "x" +
           std::to_string(scene.gt.height()) + ", seed " + std::to_string(scene.seed) + ")");
}

void cmd_synth(const PipelineConfig& cfg, const RunOptions& opt) {
  const Logger log(opt.verbosity);
  const SceneData scene = load_scene(cfg, 0);
  if (cfg.priors.empty()) throw Error(Errc::ConfigError, "synth command needs 'priors'");
  const fs::path dir = prepare_output(cfg);
  for (const auto& rec : cfg.priors) {
    const PriorData p = build_prior(cfg, rec, scene, 0);
    const auto emit = [&](const std::string& stem, const DepthMap& m) {
      write_file(dir / (stem + ".pfm"), write_pfm(m.depth()));
      const Png16Encoding png = write_depth_png16(m, cfg.png_scale_mm);
      write_file(dir / (stem + ".png"), png.bytes);
      log.info("wrote " + stem + " (" + std::to_string(count_valid(m)) + " valid, " +
               std::to_string(png.clamped) + " png-clamped)");
    };
    emit("prior_" + p.name, p.clean);
    if (p.noisy) emit("prior_" + p.name + "_noisy", *p.noisy);
  }
}

Bytes cmd_prefill(const PipelineConfig& cfg, const RunOptions& opt) {
  const Logger log(opt.verbosity);
  StageTimings t;
  auto t0 = Clock::now();
  const SceneData scene = load_scene(cfg, 0);
  const auto priors = build_priors(cfg, scene, 0);
  t.synth += ms_since(t0);
  const fs::path dir = prepare_output(cfg);

  ReportDocument doc;
  doc.version = kToolVersion;
  doc.config = cfg.echo;
  for (const auto& p : priors) {
    for (Method m : cfg.methods) {
      MethodRun run = run_method(m, cfg, p.used(), scene.pred, opt.threads, t);
      doc.clamped_fill_count += run.fill.clamped;
      const std::string stem = "filled_" + file_stem(p.name, m);
      write_file(dir / (stem + ".pfm"), write_pfm(run.map.depth()));
      doc.results.push_back({{"prior", p.name},
                             {"method", method_name(m)},
                             {"prior_valid_pixels", count_valid(p.used())},
                             {"output", stem + ".pfm"},
                             {"fill", fill_json(run.fill)}});
      log.info(stem + ": filled " + std::to_string(run.fill.filled) + ", clamped " +
               std::to_string(run.fill.clamped));
    }
  }
  doc.timings = t;
  const Bytes report = write_report(doc);
  write_file(dir / "report.json", report);
  return report;
}

Bytes cmd_eval(const PipelineConfig& cfg, const RunOptions& opt) {
  const Logger log(opt.verbosity);
  const fs::path dir = prepare_output(cfg);
  ReportDocument doc;
  doc.version = kToolVersion;
  doc.config = cfg.echo;
  StageTimings t;

  if (cfg.inputs && cfg.inputs->estimate) {
    auto t0 = Clock::now();
    const SceneData scene = load_scene(cfg, 0);
    const DepthMap estimate = read_depth_file(*cfg.inputs->estimate, cfg.png_scale_mm);
    require_same_shape(estimate, scene.gt, "inputs.estimate");
    std::optional<ValidityMask> region;
    if (cfg.regions == RegionMode::holes) {
      if (!cfg.inputs->prior) {
        throw Error(Errc::ConfigError, "regions 'holes' needs inputs.prior to know the holes");
      }
      const DepthMap prior = read_depth_file(*cfg.inputs->prior, cfg.png_scale_mm);
      require_same_shape(prior, scene.gt, "inputs.prior");
      region = holes_of(prior);
    }
    t.synth += ms_since(t0);
    t0 = Clock::now();
    const MetricsReport mr =
        evaluate(estimate, scene.gt, region ? &*region : nullptr, cfg.silog_lambda);
    t.metrics += ms_since(t0);
    doc.results.push_back({{"prior", "input"}, {"method", "estimate"}, {"metrics", to_json(mr)}});
    if (cfg.error_maps) {
      const ErrorMap em = error_map(estimate, scene.gt);
      write_file(dir / "errormap_estimate.pfm", write_pfm(em.relative_error));
      write_file(dir / "errormap_estimate.png", visualize_png(em.relative_error, 0.25));
    }
  } else {
    SceneOutcome o = evaluate_scene(cfg, 0, opt.threads, cfg.error_maps ? &dir : nullptr);
    doc.results = std::move(o.rows);
    doc.clamped_fill_count = o.clamped;
    t = o.timings;
  }
  if (opt.timings) doc.timings = t;
  const Bytes report = write_report(doc);
  write_file(dir / "report.json", report);
  log.info("wrote report.json with " + std::to_string(doc.results.size()) + " results");
  return report;
}

Bytes cmd_bench(const PipelineConfig& cfg, const RunOptions& opt) {
  const Logger log(opt.verbosity);
  const fs::path dir = prepare_output(cfg);
  const int scenes = cfg.scene ? cfg.bench_scenes : 1;

  // Scenes run in parallel with single-threaded fills; results land in
  // per-scene slots and are reduced in index order.
  std::vector<SceneOutcome> outcomes(static_cast<std::size_t>(scenes));
  parallel_for(static_cast<std::size_t>(scenes), opt.threads, [&](std::size_t i) {
    outcomes[i] = evaluate_scene(cfg, static_cast<int>(i), 1, nullptr);
  });

  ReportDocument doc;
  doc.version = kToolVersion;
  doc.config = cfg.echo;
  StageTimings t;
  for (const auto& o : outcomes) {
    doc.clamped_fill_count += o.clamped;
    t.synth += o.timings.synth;
    t.index += o.timings.index;
    t.prefill += o.timings.prefill;
    t.metrics += o.timings.metrics;
  }

  const std::size_t cells = outcomes.front().absrel.size();
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> values;
    double rmse_sum = 0.0, silog_sum = 0.0;
    for (const auto& o : outcomes) {
      values.push_back(o.absrel[c]);
      rmse_sum += o.rows[c]["metrics"]["rmse"].get<double>();
      silog_sum += o.rows[c]["metrics"]["silog"].get<double>();
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double stddev =
        values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    const json& first = outcomes.front().rows[c];
    doc.results.push_back({{"prior", first["prior"]},
                           {"method", first["method"]},
                           {"scenes", values.size()},
                           {"absrel_mean", mean},
                           {"absrel_std", stddev},
                           {"rmse_mean", rmse_sum / static_cast<double>(values.size())},
                           {"silog_mean", silog_sum / static_cast<double>(values.size())},
                           {"absrel_per_scene", values}});
    log.info(first["prior"].get<std::string>() + " / " + first["method"].get<std::string>() +
             ": AbsRel " + std::to_string(mean) + " +- " + std::to_string(stddev));
  }
  if (opt.timings) doc.timings = t;
  const Bytes report = write_report(doc);
  write_file(dir / "report.json", report);
  return report;
}

}  // namespace priorfill
