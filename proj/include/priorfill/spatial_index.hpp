#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorfill/core.hpp"

namespace priorfill {

struct Neighbor {
  Coord coord;
  std::int64_t dist2 = 0;
  double distance = 0.0;
};

/// Ordering used by every kNN query: squared distance, then row-major.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) noexcept {
  return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : row_major_less(a.coord, b.coord);
}

/// Exact k-nearest-neighbor index over the valid pixels of a prior
/// (Euclidean pixel distance, ties broken in row-major order). Implemented as
/// a k-d tree with small leaf buckets over integer coordinates, so distance
/// comparisons are exact. Immutable after construction.
class SpatialIndex {
 public:
  /// Throws EmptyPrior when the prior has no valid pixel.
  explicit SpatialIndex(const DepthMap& prior);

  std::size_t size() const noexcept { return points_.size(); }

  /// min(k, size()) entries in ascending neighbor_less order.
  std::vector<Neighbor> knn(Coord query, std::size_t k) const;

  /// Allocation-free variant for hot loops; `out` is overwritten.
  void knn_into(Coord query, std::size_t k, std::vector<Neighbor>& out) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  };

  int build(int begin, int end);
  void search(int node, Coord q, std::size_t k, std::vector<Neighbor>& best) const;

  std::vector<Coord> points_;
  std::vector<Node> nodes_;
};

SpatialIndex build_index(const DepthMap& prior);

}  // namespace priorfill
