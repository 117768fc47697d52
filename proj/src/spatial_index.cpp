#include "priorfill/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace priorfill {

namespace {

constexpr int kLeafSize = 8;

std::int64_t squared_distance(Coord a, Coord b) noexcept {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// `best` is a max-heap under neighbor_less capped at k entries; front() is
// the current worst candidate.
void offer(std::vector<Neighbor>& best, std::size_t k, const Neighbor& cand) {
  if (best.size() == k) {
    if (!neighbor_less(cand, best.front())) return;
    std::pop_heap(best.begin(), best.end(), neighbor_less);
    best.back() = cand;
  } else {
    best.push_back(cand);
  }
  std::push_heap(best.begin(), best.end(), neighbor_less);
}

}  // namespace

SpatialIndex::SpatialIndex(const DepthMap& prior) : points_(valid_coords(prior)) {
  if (points_.empty()) throw Error(Errc::EmptyPrior, "prior has no valid pixels");
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, static_cast<int>(points_.size()));
}

int SpatialIndex::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.min_x = node.max_x = points_[static_cast<std::size_t>(begin)].x;
  node.min_y = node.max_y = points_[static_cast<std::size_t>(begin)].y;
  for (int i = begin; i < end; ++i) {
    const auto& p = points_[static_cast<std::size_t>(i)];
    node.min_x = std::min(node.min_x, p.x);
    node.max_x = std::max(node.max_x, p.x);
    node.min_y = std::min(node.min_y, p.y);
    node.max_y = std::max(node.max_y, p.y);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  const bool split_x = (node.max_x - node.min_x) >= (node.max_y - node.min_y);
  const int mid = begin + (end - begin) / 2;
  auto first = points_.begin() + begin;
  std::nth_element(first, points_.begin() + mid, points_.begin() + end,
                   [split_x](const Coord& a, const Coord& b) {
                     if (split_x) return a.x != b.x ? a.x < b.x : a.y < b.y;
                     return a.y != b.y ? a.y < b.y : a.x < b.x;
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void SpatialIndex::search(int id, Coord q, std::size_t k, std::vector<Neighbor>& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const Coord c = points_[static_cast<std::size_t>(i)];
      offer(best, k, Neighbor{c, squared_distance(c, q), 0.0});
    }
    return;
  }
  const auto box_d2 = [&](const Node& m) {
    const std::int64_t dx = q.x < m.min_x ? m.min_x - q.x : (q.x > m.max_x ? q.x - m.max_x : 0);
    const std::int64_t dy = q.y < m.min_y ? m.min_y - q.y : (q.y > m.max_y ? q.y - m.max_y : 0);
    return dx * dx + dy * dy;
  };
  const Node& l = nodes_[static_cast<std::size_t>(n.left)];
  const Node& r = nodes_[static_cast<std::size_t>(n.right)];
  std::int64_t dl = box_d2(l), dr = box_d2(r);
  int first = n.left, second = n.right;
  if (dr < dl) {
    std::swap(first, second);
    std::swap(dl, dr);
  }
  // A box at exactly the current worst distance may still hold a row-major
  // tie winner, so only strictly farther boxes are pruned.
  if (best.size() < k || dl <= best.front().dist2) search(first, q, k, best);
  if (best.size() < k || dr <= best.front().dist2) search(second, q, k, best);
}

void SpatialIndex::knn_into(Coord query, std::size_t k, std::vector<Neighbor>& out) const {
  out.clear();
  if (k == 0) return;
  k = std::min(k, points_.size());
  search(0, query, k, out);
  std::sort_heap(out.begin(), out.end(), neighbor_less);
  for (auto& nb : out) nb.distance = std::sqrt(static_cast<double>(nb.dist2));
}

std::vector<Neighbor> SpatialIndex::knn(Coord query, std::size_t k) const {
  std::vector<Neighbor> out;
  out.reserve(std::min(k, points_.size()) + 1);
  knn_into(query, k, out);
  return out;
}

SpatialIndex build_index(const DepthMap& prior) { return SpatialIndex(prior); }

}  // namespace priorfill
