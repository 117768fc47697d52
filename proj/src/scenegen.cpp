#include "priorfill/scenegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "priorfill/random.hpp"

namespace priorfill {

std::string_view scene_kind_name(SceneKind kind) noexcept {
  switch (kind) {
    case SceneKind::planes: return "planes";
    case SceneKind::steps: return "steps";
    case SceneKind::spheres: return "spheres";
    case SceneKind::fractal: return "fractal";
  }
  return "unknown";
}

SceneKind parse_scene_kind(std::string_view name) {
  for (auto k : {SceneKind::planes, SceneKind::steps, SceneKind::spheres, SceneKind::fractal}) {
    if (scene_kind_name(k) == name) return k;
  }
  throw Error(Errc::BadSpec, "unknown scene kind '" + std::string(name) + "'");
}

namespace {

using Field = std::vector<double>;

// Lattice of uniform [0,1) values sampled with smoothstep-weighted bilinear
// interpolation.
class ValueNoise {
 public:
  ValueNoise(Rng& rng, int width, int height, double cell)
      : cell_(cell),
        nx_(static_cast<int>(std::ceil(width / cell)) + 2),
        ny_(static_cast<int>(std::ceil(height / cell)) + 2),
        lattice_(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_)) {
    for (auto& v : lattice_) v = uniform01(rng);
  }

  double operator()(double x, double y, bool smooth) const {
    const double gx = x / cell_;
    const double gy = y / cell_;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    double fx = gx - ix;
    double fy = gy - iy;
    if (smooth) {
      fx = fx * fx * (3.0 - 2.0 * fx);
      fy = fy * fy * (3.0 - 2.0 * fy);
    }
    const double v00 = node(ix, iy), v10 = node(ix + 1, iy);
    const double v01 = node(ix, iy + 1), v11 = node(ix + 1, iy + 1);
    return (v00 * (1 - fx) + v10 * fx) * (1 - fy) + (v01 * (1 - fx) + v11 * fx) * fy;
  }

 private:
  double node(int ix, int iy) const {
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    return lattice_[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) +
                    static_cast<std::size_t>(ix)];
  }

  double cell_;
  int nx_;
  int ny_;
  std::vector<double> lattice_;
};

// Voronoi partition into a few regions, each an independent tilted plane.
Field planes_field(const SceneSpec& spec, Rng& rng) {
  const int regions = 3 + static_cast<int>(uniform_index(rng, 3));
  struct Plane {
    double cx, cy, base, gx, gy;
  };
  std::vector<Plane> planes;
  for (int r = 0; r < regions; ++r) {
    planes.push_back({uniform(rng, 0, spec.width), uniform(rng, 0, spec.height), uniform01(rng),
                      uniform(rng, -1.0, 1.0) / spec.width, uniform(rng, -1.0, 1.0) / spec.height});
  }
  Field f(static_cast<std::size_t>(spec.width) * spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < planes.size(); ++r) {
        const double dx = x - planes[r].cx, dy = y - planes[r].cy;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = r;
        }
      }
      const auto& p = planes[best];
      f[static_cast<std::size_t>(y) * spec.width + x] = p.base + p.gx * x + p.gy * y;
    }
  }
  return f;
}

// Bands along a random direction, one constant level per band.
Field steps_field(const SceneSpec& spec, Rng& rng) {
  if (spec.steps < 1) throw Error(Errc::BadSpec, "steps must be >= 1");
  const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<double> levels(static_cast<std::size_t>(spec.steps));
  for (auto& l : levels) l = uniform01(rng);
  std::sort(levels.begin(), levels.end());

  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  for (int y : {0, spec.height - 1}) {
    for (int x : {0, spec.width - 1}) {
      umin = std::min(umin, x * c + y * s);
      umax = std::max(umax, x * c + y * s);
    }
  }
  Field f(static_cast<std::size_t>(spec.width) * spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double u = (x * c + y * s - umin) / (umax - umin);
      const int band = std::clamp(static_cast<int>(u * spec.steps), 0, spec.steps - 1);
      f[static_cast<std::size_t>(y) * spec.width + x] = levels[static_cast<std::size_t>(band)];
    }
  }
  return f;
}

// Tilted background plane with spheres in front; the nearest surface wins.
Field spheres_field(const SceneSpec& spec, Rng& rng) {
  const double scale = std::max(spec.width, spec.height);
  const double gx = uniform(rng, -0.3, 0.3) / spec.width;
  const double gy = uniform(rng, 0.2, 0.6) / spec.height;
  const int count = 2 + static_cast<int>(uniform_index(rng, 4));
  struct Sphere {
    double cx, cy, r, depth;
  };
  std::vector<Sphere> spheres;
  for (int i = 0; i < count; ++i) {
    const double r = uniform(rng, 0.1, 0.3) * scale;
    spheres.push_back({uniform(rng, 0, spec.width), uniform(rng, 0, spec.height), r,
                       uniform(rng, 0.3, 0.7)});
  }
  Field f(static_cast<std::size_t>(spec.width) * spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double d = 1.0 + gx * x + gy * y;
      for (const auto& sp : spheres) {
        const double dx = x - sp.cx, dy = y - sp.cy;
        const double rr = sp.r * sp.r - dx * dx - dy * dy;
        if (rr > 0.0) d = std::min(d, sp.depth - 0.5 * std::sqrt(rr) / scale);
      }
      f[static_cast<std::size_t>(y) * spec.width + x] = d;
    }
  }
  return f;
}

// Fractional Brownian motion over value noise: five octaves, base cell a
// quarter of the larger side.
Field fractal_field(const SceneSpec& spec, Rng& rng) {
  constexpr int kOctaves = 5;
  const double base_cell = std::max(spec.width, spec.height) / 4.0;
  std::vector<ValueNoise> octaves;
  for (int o = 0; o < kOctaves; ++o) {
    octaves.emplace_back(rng, spec.width, spec.height, std::max(2.0, base_cell / (1 << o)));
  }
  Field f(static_cast<std::size_t>(spec.width) * spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = 0.0, amp = 1.0;
      for (const auto& n : octaves) {
        v += amp * n(x, y, true);
        amp *= 0.5;
      }
      f[static_cast<std::size_t>(y) * spec.width + x] = v;
    }
  }
  return f;
}

}  // namespace

DepthMap generate_scene(const SceneSpec& spec) {
  if (spec.width < 8 || spec.height < 8) {
    throw Error(Errc::BadSpec, "scene must be at least 8x8");
  }
  if (!(spec.min_depth_m > 0.0) || !(spec.max_depth_m > spec.min_depth_m) ||
      !std::isfinite(spec.max_depth_m)) {
    throw Error(Errc::BadSpec, "depth range must satisfy 0 < min < max");
  }
  Rng rng(spec.seed);
  Field f;
  switch (spec.kind) {
    case SceneKind::planes: f = planes_field(spec, rng); break;
    case SceneKind::steps: f = steps_field(spec, rng); break;
    case SceneKind::spheres: f = spheres_field(spec, rng); break;
    case SceneKind::fractal: f = fractal_field(spec, rng); break;
  }

  // Global affine rescale into the requested range; per-region structure
  // (affinity, constancy) is preserved.
  const auto [lo_it, hi_it] = std::minmax_element(f.begin(), f.end());
  const double lo = *lo_it, hi = *hi_it;
  const auto lo_f = static_cast<float>(spec.min_depth_m);
  const auto hi_f = static_cast<float>(spec.max_depth_m);
  std::vector<float> depth(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = hi > lo ? (f[i] - lo) / (hi - lo) : 0.5;
    const double d = spec.min_depth_m + u * (spec.max_depth_m - spec.min_depth_m);
    depth[i] = std::clamp(static_cast<float>(d), lo_f, hi_f);
  }
  return DepthMap::dense(Grid(spec.width, spec.height, std::move(depth)));
}

RelativePrediction derive_prediction(const DepthMap& gt, const PredictionSpec& spec) {
  if (count_valid(gt) != gt.size()) throw Error(Errc::BadSpec, "ground truth must be fully valid");
  if (!(spec.a > 0.0) || !std::isfinite(spec.a) || !std::isfinite(spec.b)) {
    throw Error(Errc::BadSpec, "prediction affine needs finite a > 0 and finite b");
  }
  std::vector<double> v(gt.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = spec.a * gt[i] + spec.b;

  if (const auto* g = std::get_if<GammaDistortion>(&spec.distortion)) {
    if (!(g->gamma > 0.0)) throw Error(Errc::BadSpec, "gamma must be > 0");
    const double dmin = *std::min_element(v.begin(), v.end());
    if (!(dmin > 0.0)) {
      throw Error(Errc::BadSpec, "gamma distortion needs positive affine values");
    }
    if (g->gamma != 1.0) {
      for (auto& d : v) d = dmin * std::pow(d / dmin, g->gamma);
    }
  } else if (const auto* n = std::get_if<SmoothNoiseDistortion>(&spec.distortion)) {
    if (!(n->amplitude >= 0.0) || n->cell_px < 1) {
      throw Error(Errc::BadSpec, "smooth noise needs amplitude >= 0 and cell_px >= 1");
    }
    Rng rng(n->seed);
    const ValueNoise noise(rng, gt.width(), gt.height(), n->cell_px);
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        v[gt.depth().index(x, y)] += n->amplitude * (2.0 * noise(x, y, false) - 1.0);
      }
    }
  }

  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i]);
    if (!std::isfinite(out[i])) throw Error(Errc::BadSpec, "prediction value is not finite");
  }
  return RelativePrediction(Grid(gt.width(), gt.height(), std::move(out)));
}

}  // namespace priorfill
