#include "priorfill/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace priorfill {

namespace {

std::size_t checked_area(int width, int height, const char* what) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::BadSpec, std::string(what) + " dimensions must be positive, got " +
                                   std::to_string(width) + "x" + std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

Grid::Grid(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != checked_area(width, height, "grid")) {
    throw Error(Errc::DimensionMismatch,
                "grid has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(Errc::NonFinite, "grid value at index " + std::to_string(i) + " is not finite");
    }
  }
}

Grid Grid::filled(int width, int height, float value) {
  return Grid(width, height, std::vector<float>(checked_area(width, height, "grid"), value));
}

ValidityMask::ValidityMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (bits_.size() != checked_area(width, height, "mask")) {
    throw Error(Errc::DimensionMismatch,
                "mask has " + std::to_string(bits_.size()) + " entries for " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

ValidityMask ValidityMask::filled(int width, int height, bool value) {
  return ValidityMask(width, height,
                      std::vector<std::uint8_t>(checked_area(width, height, "mask"), value ? 1 : 0));
}

std::size_t ValidityMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

DepthMap::DepthMap(int width, int height, std::vector<float> depth, std::vector<std::uint8_t> mask)
    : DepthMap(Grid(width, height, std::move(depth)), ValidityMask(width, height, std::move(mask))) {}

DepthMap::DepthMap(Grid depth, ValidityMask mask) : depth_(std::move(depth)), mask_(std::move(mask)) {
  require_same_shape(depth_, mask_, "depth map");
  bool canonical = true;
  for (std::size_t i = 0; i < depth_.size(); ++i) {
    if (mask_[i]) {
      if (!(depth_[i] > 0.0f)) {
        throw Error(Errc::NonPositiveDepth,
                    "valid pixel at index " + std::to_string(i) + " has depth " +
                        std::to_string(depth_[i]));
      }
    } else if (depth_[i] != 0.0f) {
      canonical = false;
    }
  }
  if (!canonical) {
    std::vector<float> v(depth_.values().begin(), depth_.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!mask_[i]) v[i] = 0.0f;
    }
    depth_ = Grid(depth_.width(), depth_.height(), std::move(v));
  }
}

DepthMap DepthMap::dense(Grid depth) {
  auto mask = ValidityMask::filled(depth.width(), depth.height(), true);
  return DepthMap(std::move(depth), std::move(mask));
}

DepthMap DepthMap::from_sentinel(const Grid& depth) {
  std::vector<std::uint8_t> bits(depth.size());
  for (std::size_t i = 0; i < depth.size(); ++i) bits[i] = depth[i] > 0.0f ? 1 : 0;
  return DepthMap(depth, ValidityMask(depth.width(), depth.height(), std::move(bits)));
}

DepthMap new_depth_map(int width, int height, std::span<const DepthEntry> entries) {
  const std::size_t area = checked_area(width, height, "depth map");
  std::vector<float> depth(area, 0.0f);
  std::vector<std::uint8_t> mask(area, 0);
  for (const auto& e : entries) {
    if (e.x < 0 || e.y < 0 || e.x >= width || e.y >= height) {
      throw Error(Errc::OutOfBounds, "entry (" + std::to_string(e.x) + ", " +
                                         std::to_string(e.y) + ") outside " +
                                         std::to_string(width) + "x" + std::to_string(height));
    }
    if (!std::isfinite(e.depth_m) || !(e.depth_m > 0.0f)) {
      throw Error(Errc::NonPositiveDepth, "entry (" + std::to_string(e.x) + ", " +
                                              std::to_string(e.y) + ") has depth " +
                                              std::to_string(e.depth_m));
    }
    const std::size_t i = static_cast<std::size_t>(e.y) * static_cast<std::size_t>(width) +
                          static_cast<std::size_t>(e.x);
    if (mask[i]) {
      throw Error(Errc::DuplicateCoordinate,
                  "(" + std::to_string(e.x) + ", " + std::to_string(e.y) + ") listed twice");
    }
    mask[i] = 1;
    depth[i] = e.depth_m;
  }
  return DepthMap(width, height, std::move(depth), std::move(mask));
}

std::vector<Coord> valid_coords(const DepthMap& map) {
  std::vector<Coord> out;
  out.reserve(map.mask().count());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (map.valid(x, y)) out.push_back({x, y});
    }
  }
  return out;
}

std::size_t count_valid(const DepthMap& map) { return map.mask().count(); }

void require_same_shape(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw Error(Errc::DimensionMismatch, std::string(what) + ": " + std::to_string(w0) + "x" +
                                             std::to_string(h0) + " vs " + std::to_string(w1) +
                                             "x" + std::to_string(h1));
  }
}

}  // namespace priorfill
