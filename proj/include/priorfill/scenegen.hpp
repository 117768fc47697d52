#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "priorfill/core.hpp"

namespace priorfill {

enum class SceneKind { planes, steps, spheres, fractal };

std::string_view scene_kind_name(SceneKind kind) noexcept;
SceneKind parse_scene_kind(std::string_view name);

struct SceneSpec {
  SceneKind kind = SceneKind::fractal;
  int width = 64;
  int height = 64;
  double min_depth_m = 1.0;
  double max_depth_m = 10.0;
  std::uint64_t seed = 0;
  /// Number of depth levels for the steps kind.
  int steps = 5;
};

struct NoDistortion {};

/// d -> d_min * (d / d_min)^gamma, d_min the smallest affine value.
struct GammaDistortion {
  double gamma = 1.0;
};

/// Additive value noise on a bilinear lattice.
struct SmoothNoiseDistortion {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  int cell_px = 16;
};

using Distortion = std::variant<NoDistortion, GammaDistortion, SmoothNoiseDistortion>;

/// pred = distort(a * gt + b).
struct PredictionSpec {
  double a = 1.0;
  double b = 0.0;
  Distortion distortion = NoDistortion{};
};

/// Fully valid ground-truth map, depths within [min_depth_m, max_depth_m].
DepthMap generate_scene(const SceneSpec& spec);

RelativePrediction derive_prediction(const DepthMap& gt, const PredictionSpec& spec);

}  // namespace priorfill
