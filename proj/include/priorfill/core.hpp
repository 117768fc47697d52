#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorfill/error.hpp"

namespace priorfill {

/// Pixel coordinate: x is the column, y the row, origin top-left.
struct Coord {
  int x = 0;
  int y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Row-major ordering (y first, then x). Every tie-break in the library uses it.
inline bool row_major_less(const Coord& a, const Coord& b) noexcept {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

/// Dense row-major scalar field with finite 32-bit values. Immutable once built.
class Grid {
 public:
  Grid(int width, int height, std::vector<float> values);
  static Grid filled(int width, int height, float value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  float at(int x, int y) const noexcept { return values_[index(x, y)]; }
  float operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const float> values() const noexcept { return values_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

 private:
  int width_;
  int height_;
  std::vector<float> values_;
};

class ValidityMask {
 public:
  ValidityMask(int width, int height, std::vector<std::uint8_t> bits);
  static ValidityMask filled(int width, int height, bool value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)] != 0;
  }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t count() const noexcept;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Metric depth (meters) plus validity. Valid pixels hold depth > 0; invalid
/// pixels are stored as 0.
class DepthMap {
 public:
  /// Values at invalid pixels are discarded (stored as 0).
  DepthMap(Grid depth, ValidityMask mask);
  DepthMap(int width, int height, std::vector<float> depth, std::vector<std::uint8_t> mask);

  /// Every pixel valid; all values must be > 0.
  static DepthMap dense(Grid depth);
  /// Valid exactly where the stored value is > 0 (file convention, 0 = missing).
  static DepthMap from_sentinel(const Grid& depth);

  int width() const noexcept { return depth_.width(); }
  int height() const noexcept { return depth_.height(); }
  std::size_t size() const noexcept { return depth_.size(); }

  const Grid& depth() const noexcept { return depth_; }
  const ValidityMask& mask() const noexcept { return mask_; }
  bool valid(int x, int y) const noexcept { return mask_.at(x, y); }
  bool valid(std::size_t i) const noexcept { return mask_[i]; }
  float at(int x, int y) const noexcept { return depth_.at(x, y); }
  float operator[](std::size_t i) const noexcept { return depth_[i]; }

 private:
  Grid depth_;
  ValidityMask mask_;
};

/// Dense unitless relative depth; no validity mask.
class RelativePrediction {
 public:
  explicit RelativePrediction(Grid pred) : pred_(std::move(pred)) {}

  int width() const noexcept { return pred_.width(); }
  int height() const noexcept { return pred_.height(); }
  const Grid& grid() const noexcept { return pred_; }
  float at(int x, int y) const noexcept { return pred_.at(x, y); }
  float operator[](std::size_t i) const noexcept { return pred_[i]; }

 private:
  Grid pred_;
};

/// Scale/shift mapping prediction units to meters. `degenerate` marks the
/// shift-only fallback, in which case scale == 1.
struct AffineFit {
  double scale = 1.0;
  double shift = 0.0;
  bool degenerate = false;
};

struct DepthEntry {
  int x = 0;
  int y = 0;
  float depth_m = 0.0f;
};

DepthMap new_depth_map(int width, int height, std::span<const DepthEntry> entries);

/// Valid coordinates in row-major order.
std::vector<Coord> valid_coords(const DepthMap& map);

std::size_t count_valid(const DepthMap& map);

/// Throws DimensionMismatch unless the two shapes agree.
void require_same_shape(int w0, int h0, int w1, int h1, const char* what);

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(), what);
}

}  // namespace priorfill
