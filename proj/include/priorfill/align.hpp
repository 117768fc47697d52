#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "priorfill/core.hpp"
#include "priorfill/spatial_index.hpp"

namespace priorfill {

enum class Weighting { uniform, inverse_distance };

std::string_view weighting_name(Weighting w) noexcept;
Weighting parse_weighting(std::string_view name);

inline constexpr double kDefaultMinScaleVariance = 1e-12;
inline constexpr double kDefaultMaxLeverage = 32.0;
/// Floor applied to filled depths; every application is counted.
inline constexpr float kFillFloorM = 1e-4f;

struct FillConfig {
  std::size_t k = 5;
  Weighting weighting = Weighting::inverse_distance;
  /// Weighted prediction variance (sum of w * (p - mean)^2) below which a fit
  /// falls back to shift-only.
  double min_scale_variance = kDefaultMinScaleVariance;
  /// When the k supports carry no prediction variance, grow the support set
  /// to the smallest nearest-neighbor prefix that does.
  bool expand_degenerate = true;
  /// A fit must not extrapolate further than this many weighted standard
  /// deviations of its supports' predictions; otherwise it is treated like a
  /// degenerate one and the support set grows. 0 disables the check.
  double max_leverage = kDefaultMaxLeverage;
};

struct FitSample {
  double pred = 0.0;
  double prior = 0.0;
  double weight = 1.0;
};

/// Closed-form weighted least squares prior ~ scale * pred + shift.
/// Degenerate prediction variance yields scale = 1, shift = weighted mean of
/// (prior - pred). Throws NoSamples on empty input, BadSpec on non-finite
/// values or non-positive weights.
AffineFit fit_affine(std::span<const FitSample> samples,
                     double min_scale_variance = kDefaultMinScaleVariance);

struct FillReport {
  std::size_t filled = 0;
  std::size_t clamped = 0;
  /// Pixels whose final fit was shift-only.
  std::size_t degenerate = 0;
  /// Pixels whose support set was grown beyond k.
  std::size_t expanded = 0;
};

struct FillResult {
  DepthMap map;
  FillReport report;
};

/// Pixel-level metric alignment. Valid prior pixels are copied bit for bit;
/// every other pixel gets s * pred + t from a weighted fit over its nearest
/// valid prior pixels. Output is fully valid. Rows are split across
/// `threads` workers; the result does not depend on the split.
FillResult prefill(const DepthMap& prior, const RelativePrediction& pred, const FillConfig& cfg,
                   unsigned threads = 1);

/// Same, reusing a prebuilt index over `prior`.
FillResult prefill(const DepthMap& prior, const SpatialIndex& index,
                   const RelativePrediction& pred, const FillConfig& cfg, unsigned threads = 1);

/// Baseline: inverse-distance-weighted mean of the k nearest prior values.
DepthMap prefill_interpolation(const DepthMap& prior, std::size_t k, unsigned threads = 1);

struct GlobalAlignResult {
  DepthMap map;
  AffineFit fit;
  std::size_t clamped = 0;
};

/// Baseline: one unweighted fit over all valid pixels, applied everywhere
/// (valid pixels included).
GlobalAlignResult global_align(const DepthMap& prior, const RelativePrediction& pred);

struct Normalized {
  Grid values;
  double min = 0.0;
  double max = 0.0;
};

/// Maps valid values to [0, 1]; invalid pixels become 0. Throws Empty with no
/// valid values and Degenerate when they are all equal.
Normalized normalize(const DepthMap& map);
Normalized normalize(const RelativePrediction& pred);

/// v * (max - min) + min. Throws BadRange unless max > min.
Grid denormalize(const Grid& grid, double min, double max);

}  // namespace priorfill
