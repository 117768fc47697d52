#include "priorfill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "priorfill/random.hpp"

namespace priorfill {

namespace {

// Restricts `in` to pixels where keep[i] is set; values are carried over.
DepthMap restrict_to(const DepthMap& in, const std::vector<std::uint8_t>& keep) {
  std::vector<float> depth(in.size(), 0.0f);
  std::vector<std::uint8_t> mask(in.size(), 0);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in.valid(i) && keep[i]) {
      mask[i] = 1;
      depth[i] = in[i];
    }
  }
  return DepthMap(in.width(), in.height(), std::move(depth), std::move(mask));
}

std::vector<std::size_t> valid_indices(const DepthMap& map) {
  std::vector<std::size_t> idx;
  idx.reserve(count_valid(map));
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.valid(i)) idx.push_back(i);
  }
  return idx;
}

// Partial Fisher-Yates: the first n entries become a uniform sample.
void shuffle_prefix(std::vector<std::size_t>& v, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n && i + 1 < v.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, v.size() - i));
    std::swap(v[i], v[j]);
  }
}

void require_pixels(std::size_t available, std::size_t n) {
  if (n > available) {
    throw Error(Errc::NotEnoughPixels, "requested " + std::to_string(n) + " of " +
                                           std::to_string(available) + " valid pixels");
  }
}

// Central-difference gradient magnitude over valid neighbors (one-sided at
// borders and next to holes). Invalid pixels get 0.
std::vector<double> gradient_magnitude(const DepthMap& map) {
  std::vector<double> g(map.size(), 0.0);
  const auto diff = [&](int x0, int y0, int x1, int y1, double span) -> double {
    if (!map.depth().contains(x0, y0) || !map.depth().contains(x1, y1)) return 0.0;
    if (!map.valid(x0, y0) || !map.valid(x1, y1)) return 0.0;
    return (static_cast<double>(map.at(x1, y1)) - map.at(x0, y0)) / span;
  };
  const auto axis = [&](int x, int y, int dx, int dy) -> double {
    const bool prev = map.depth().contains(x - dx, y - dy) && map.valid(x - dx, y - dy);
    const bool next = map.depth().contains(x + dx, y + dy) && map.valid(x + dx, y + dy);
    if (prev && next) return diff(x - dx, y - dy, x + dx, y + dy, 2.0);
    if (next) return diff(x, y, x + dx, y + dy, 1.0);
    if (prev) return diff(x - dx, y - dy, x, y, 1.0);
    return 0.0;
  };
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.valid(x, y)) continue;
      const double gx = axis(x, y, 1, 0);
      const double gy = axis(x, y, 0, 1);
      g[map.depth().index(x, y)] = std::hypot(gx, gy);
    }
  }
  return g;
}

}  // namespace

DepthMap sample_sparse_random(const DepthMap& gt, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::BadSpec, "sparse sample count must be >= 1");
  auto idx = valid_indices(gt);
  require_pixels(idx.size(), n);
  Rng rng(seed);
  shuffle_prefix(idx, n, rng);
  std::vector<std::uint8_t> keep(gt.size(), 0);
  for (std::size_t i = 0; i < n; ++i) keep[idx[i]] = 1;
  return restrict_to(gt, keep);
}

DepthMap sample_keypoints(const DepthMap& gt, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::BadSpec, "keypoint count must be >= 1");
  const auto idx = valid_indices(gt);
  require_pixels(idx.size(), n);
  const auto grad = gradient_magnitude(gt);

  // Weighted sampling without replacement (Efraimidis-Spirakis): keep the n
  // largest log(u)/w. Zero-weight pixels rank after every positive-weight
  // pixel and among themselves by a uniform key, which degrades to uniform
  // sampling on flat input.
  struct Key {
    bool weighted;
    double key;
    std::size_t index;
  };
  Rng rng(seed);
  std::vector<Key> keys;
  keys.reserve(idx.size());
  for (std::size_t i : idx) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    const double w = grad[i];
    keys.push_back(w > 0.0 ? Key{true, std::log(u) / w, i} : Key{false, u, i});
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end(),
                    [](const Key& a, const Key& b) {
                      if (a.weighted != b.weighted) return a.weighted;
                      if (a.key != b.key) return a.key > b.key;
                      return a.index < b.index;
                    });
  std::vector<std::uint8_t> keep(gt.size(), 0);
  for (std::size_t i = 0; i < n; ++i) keep[keys[i].index] = 1;
  return restrict_to(gt, keep);
}

DepthMap sample_lidar_lines(const DepthMap& gt, int lines, std::uint64_t seed) {
  const int h = gt.height();
  if (lines < 1 || lines > h) {
    throw Error(Errc::BadSpec, "lidar lines must be in [1, " + std::to_string(h) + "]");
  }
  // Rows floor(i*H/lines) + phase; phase keeps the last row inside the grid.
  const long long last = static_cast<long long>(lines - 1) * h / lines;
  const auto max_phase = static_cast<std::uint64_t>(h - 1 - last);
  Rng rng(seed);
  const auto phase = static_cast<long long>(uniform_index(rng, max_phase + 1));
  std::vector<std::uint8_t> keep(gt.size(), 0);
  for (int i = 0; i < lines; ++i) {
    const auto row = static_cast<int>(static_cast<long long>(i) * h / lines + phase);
    for (int x = 0; x < gt.width(); ++x) keep[gt.depth().index(x, row)] = 1;
  }
  return restrict_to(gt, keep);
}

DepthMap downsample_prior(const DepthMap& gt, int factor) {
  if (factor < 2) throw Error(Errc::BadSpec, "downsample factor must be >= 2");
  std::vector<std::uint8_t> keep(gt.size(), 0);
  for (int ty = 0; ty * factor < gt.height(); ++ty) {
    const int y = std::min(ty * factor + factor / 2, gt.height() - 1);
    for (int tx = 0; tx * factor < gt.width(); ++tx) {
      const int x = std::min(tx * factor + factor / 2, gt.width() - 1);
      keep[gt.depth().index(x, y)] = 1;
    }
  }
  return restrict_to(gt, keep);
}

DepthMap mask_range(const DepthMap& gt, double threshold_m) {
  if (!(threshold_m > 0.0)) throw Error(Errc::BadSpec, "range threshold must be > 0");
  std::vector<std::uint8_t> keep(gt.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) keep[i] = gt[i] <= threshold_m ? 1 : 0;
  return restrict_to(gt, keep);
}

DepthMap mask_square(const DepthMap& gt, int side_px, std::optional<Coord> center,
                     std::uint64_t seed) {
  if (side_px < 1 || side_px > std::min(gt.width(), gt.height())) {
    throw Error(Errc::BadSpec, "square side must be in [1, min(width, height)]");
  }
  int x0 = 0, y0 = 0;
  if (center) {
    x0 = center->x - side_px / 2;
    y0 = center->y - side_px / 2;
  } else {
    // Random placement keeps the whole square inside the image.
    Rng rng(seed);
    x0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(gt.width() - side_px + 1)));
    y0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(gt.height() - side_px + 1)));
  }
  std::vector<std::uint8_t> keep(gt.size(), 1);
  for (int y = std::max(0, y0); y < std::min(gt.height(), y0 + side_px); ++y) {
    for (int x = std::max(0, x0); x < std::min(gt.width(), x0 + side_px); ++x) {
      keep[gt.depth().index(x, y)] = 0;
    }
  }
  return restrict_to(gt, keep);
}

DepthMap mask_from_file(const DepthMap& gt, const ValidityMask& hole) {
  require_same_shape(gt, hole, "mask_from_file");
  std::vector<std::uint8_t> keep(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) keep[i] = hole[i] ? 0 : 1;
  return restrict_to(gt, keep);
}

DepthMap apply_prior(const DepthMap& gt, const PriorSpec& spec) {
  return std::visit(
      [&](const auto& p) -> DepthMap {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SparseRandom>) {
          return sample_sparse_random(gt, p.n, spec.seed);
        } else if constexpr (std::is_same_v<T, SparseKeypoint>) {
          return sample_keypoints(gt, p.n, spec.seed);
        } else if constexpr (std::is_same_v<T, LidarLines>) {
          return sample_lidar_lines(gt, p.lines, spec.seed);
        } else if constexpr (std::is_same_v<T, LowRes>) {
          return downsample_prior(gt, p.factor);
        } else if constexpr (std::is_same_v<T, RangeMask>) {
          return mask_range(gt, p.threshold_m);
        } else if constexpr (std::is_same_v<T, SquareMask>) {
          return mask_square(gt, p.side_px, p.center, spec.seed);
        } else {
          return mask_from_file(gt, p.mask);
        }
      },
      spec.pattern);
}

DepthMap mix(const DepthMap& gt, const std::vector<PriorSpec>& specs) {
  DepthMap current = gt;
  for (const auto& s : specs) current = apply_prior(current, s);
  return current;
}

DepthMap perturb(const DepthMap& prior, const NoiseSpec& noise) {
  if (!(noise.outlier_fraction >= 0.0 && noise.outlier_fraction <= 1.0)) {
    throw Error(Errc::BadSpec, "outlier fraction must be in [0, 1]");
  }
  if (!(noise.outlier_min_m > 0.0) || !(noise.outlier_max_m >= noise.outlier_min_m) ||
      !std::isfinite(noise.outlier_max_m)) {
    throw Error(Errc::BadSpec, "outlier range must satisfy 0 < min <= max");
  }
  if (!(noise.boundary_noise_sigma >= 0.0) || noise.boundary_band_px < 0) {
    throw Error(Errc::BadSpec, "boundary noise needs sigma >= 0 and band >= 0");
  }

  const int w = prior.width(), h = prior.height();
  std::vector<float> out(prior.depth().values().begin(), prior.depth().values().end());
  Rng rng(noise.seed);

  if (noise.boundary_noise_sigma > 0.0) {
    // Discontinuities are detected on the input, before any perturbation.
    std::vector<std::uint8_t> edge(prior.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!prior.valid(x, y)) continue;
        const double d = prior.at(x, y);
        double jump = 0.0;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !prior.valid(nx, ny)) continue;
          jump = std::max(jump, std::abs(prior.at(nx, ny) - d));
        }
        if (jump > kDiscontinuityRatio * d) edge[prior.depth().index(x, y)] = 1;
      }
    }
    // Chebyshev dilation by the band width: separable running max.
    const int r = noise.boundary_band_px;
    std::vector<std::uint8_t> rows(edge.size(), 0), band(edge.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t v = 0;
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r) && !v; ++xx) {
          v = edge[static_cast<std::size_t>(y) * w + xx];
        }
        rows[static_cast<std::size_t>(y) * w + x] = v;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t v = 0;
        for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r) && !v; ++yy) {
          v = rows[static_cast<std::size_t>(yy) * w + x];
        }
        band[static_cast<std::size_t>(y) * w + x] = v;
      }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!prior.valid(i) || !band[i]) continue;
      const double v = out[i] + noise.boundary_noise_sigma * standard_normal(rng);
      out[i] = std::max(static_cast<float>(v), kMinDepthM);
    }
  }

  auto idx = valid_indices(prior);
  const auto n_out = static_cast<std::size_t>(
      round_half_even(noise.outlier_fraction * static_cast<double>(idx.size())));
  shuffle_prefix(idx, n_out, rng);
  for (std::size_t i = 0; i < n_out; ++i) {
    out[idx[i]] = static_cast<float>(
        noise.outlier_min_m == noise.outlier_max_m
            ? noise.outlier_min_m
            : uniform(rng, noise.outlier_min_m, noise.outlier_max_m));
  }
  return DepthMap(Grid(w, h, std::move(out)), prior.mask());
}

DepthMap prior_from_confidence(const DepthMap& depth, const Grid& confidence, double top_fraction) {
  require_same_shape(depth, confidence, "prior_from_confidence");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw Error(Errc::BadSpec, "top fraction must be in (0, 1]");
  }
  auto idx = valid_indices(depth);
  const auto keep_n = static_cast<std::size_t>(
      round_half_even(top_fraction * static_cast<double>(idx.size())));
  // Stable sort on row-major input keeps the row-major tie-break.
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return confidence[a] > confidence[b]; });
  std::vector<std::uint8_t> keep(depth.size(), 0);
  for (std::size_t i = 0; i < keep_n; ++i) keep[idx[i]] = 1;
  return restrict_to(depth, keep);
}

std::string describe(const PriorPattern& pattern) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SparseRandom>) {
          return "sparse_random(" + std::to_string(p.n) + ")";
        } else if constexpr (std::is_same_v<T, SparseKeypoint>) {
          return "sparse_keypoint(" + std::to_string(p.n) + ")";
        } else if constexpr (std::is_same_v<T, LidarLines>) {
          return "lidar_lines(" + std::to_string(p.lines) + ")";
        } else if constexpr (std::is_same_v<T, LowRes>) {
          return "low_res(" + std::to_string(p.factor) + ")";
        } else if constexpr (std::is_same_v<T, RangeMask>) {
          return "range_mask(" + std::to_string(p.threshold_m) + ")";
        } else if constexpr (std::is_same_v<T, SquareMask>) {
          return "square_mask(" + std::to_string(p.side_px) + ")";
        } else {
          return "mask_file";
        }
      },
      pattern);
}

}  // namespace priorfill
