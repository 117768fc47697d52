#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "priorfill/core.hpp"

namespace priorfill {

// Prior pattern taxonomy. Sampling patterns draw from the current valid set;
// masking patterns intersect with it.
struct SparseRandom {
  std::size_t n = 100;
};
/// Gradient-weighted sampling, a detector-free stand-in for SfM keypoints.
struct SparseKeypoint {
  std::size_t n = 100;
};
struct LidarLines {
  int lines = 8;
};
struct LowRes {
  int factor = 8;
};
struct RangeMask {
  double threshold_m = 3.0;
};
struct SquareMask {
  int side_px = 160;
  std::optional<Coord> center;
};
/// True entries of the mask mark the hole.
struct MaskFile {
  ValidityMask mask;
};

using PriorPattern =
    std::variant<SparseRandom, SparseKeypoint, LidarLines, LowRes, RangeMask, SquareMask, MaskFile>;

struct PriorSpec {
  PriorPattern pattern;
  std::uint64_t seed = 0;
};

/// Outliers and boundary noise. Defaults are placeholders, not measured values.
struct NoiseSpec {
  double outlier_fraction = 0.01;
  double outlier_min_m = 1.0;
  double outlier_max_m = 10.0;
  double boundary_noise_sigma = 0.05;
  int boundary_band_px = 2;
  std::uint64_t seed = 0;
};

/// Relative jump (fraction of local depth) that marks a depth discontinuity.
inline constexpr double kDiscontinuityRatio = 0.05;
/// Lower bound applied to any value pushed non-positive by noise.
inline constexpr float kMinDepthM = 1e-4f;

DepthMap sample_sparse_random(const DepthMap& gt, std::size_t n, std::uint64_t seed);
DepthMap sample_keypoints(const DepthMap& gt, std::size_t n, std::uint64_t seed);
DepthMap sample_lidar_lines(const DepthMap& gt, int lines, std::uint64_t seed);
DepthMap downsample_prior(const DepthMap& gt, int factor);
DepthMap mask_range(const DepthMap& gt, double threshold_m);
DepthMap mask_square(const DepthMap& gt, int side_px, std::optional<Coord> center,
                     std::uint64_t seed);
DepthMap mask_from_file(const DepthMap& gt, const ValidityMask& hole);

DepthMap apply_prior(const DepthMap& gt, const PriorSpec& spec);
/// Applies specs left to right; an empty list returns the input.
DepthMap mix(const DepthMap& gt, const std::vector<PriorSpec>& specs);

DepthMap perturb(const DepthMap& prior, const NoiseSpec& noise);

/// Keeps the round(top_fraction * N) valid pixels with the highest
/// confidence; ties go to the earlier pixel in row-major order.
DepthMap prior_from_confidence(const DepthMap& depth, const Grid& confidence, double top_fraction);

std::string describe(const PriorPattern& pattern);

}  // namespace priorfill
