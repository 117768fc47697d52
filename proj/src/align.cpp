#include "priorfill/align.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "priorfill/parallel.hpp"

namespace priorfill {

std::string_view weighting_name(Weighting w) noexcept {
  return w == Weighting::uniform ? "uniform" : "inverse_distance";
}

Weighting parse_weighting(std::string_view name) {
  if (name == "uniform") return Weighting::uniform;
  if (name == "inverse_distance") return Weighting::inverse_distance;
  throw Error(Errc::BadSpec, "unknown weighting '" + std::string(name) + "'");
}

AffineFit fit_affine(std::span<const FitSample> samples, double min_scale_variance) {
  if (samples.empty()) throw Error(Errc::NoSamples, "affine fit needs at least one sample");
  double sw = 0.0, sp = 0.0, sq = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.pred) || !std::isfinite(s.prior) || !std::isfinite(s.weight) ||
        !(s.weight > 0.0)) {
      throw Error(Errc::BadSpec, "fit samples need finite values and positive weights");
    }
    sw += s.weight;
    sp += s.weight * s.pred;
    sq += s.weight * s.prior;
  }
  const double mp = sp / sw;
  const double mq = sq / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double dp = s.pred - mp;
    sxx += s.weight * dp * dp;
    sxy += s.weight * dp * (s.prior - mq);
  }
  if (!(sxx >= min_scale_variance) || sxx == 0.0) {
    return AffineFit{1.0, mq - mp, true};
  }
  const double scale = sxy / sxx;
  return AffineFit{scale, mq - scale * mp, false};
}

namespace {

struct PixelFit {
  AffineFit fit;
  bool expanded = false;
};

class PixelFitter {
 public:
  PixelFitter(const DepthMap& prior, const SpatialIndex& index, const RelativePrediction& pred,
              const FillConfig& cfg)
      : prior_(prior), index_(index), pred_(pred), cfg_(cfg) {}

  PixelFit fit_at(Coord q) {
    const double target = pred_.at(q.x, q.y);
    index_.knn_into(q, cfg_.k, neighbors_);
    collect(neighbors_.size());
    const AffineFit fit = fit_affine(samples_, cfg_.min_scale_variance);
    if ((!fit.degenerate && conditioned(samples_, target)) || !cfg_.expand_degenerate ||
        neighbors_.size() >= index_.size()) {
      return {fit, false};
    }

    // Grow geometrically until some prefix is usable, then take the shortest
    // such prefix. Weighted variance never decreases as points are appended.
    std::size_t want = cfg_.k;
    while (want < index_.size()) {
      want = std::min(index_.size(), want * 2);
      index_.knn_into(q, want, neighbors_);
      collect(neighbors_.size());
      double w_sum = 0.0, mean = 0.0, m2 = 0.0;
      for (std::size_t m = 0; m < samples_.size(); ++m) {
        const auto& s = samples_[m];
        w_sum += s.weight;
        const double delta = s.pred - mean;
        mean += s.weight * delta / w_sum;
        m2 += s.weight * delta * (s.pred - mean);
        if (m + 1 < cfg_.k || !(m2 >= cfg_.min_scale_variance) || m2 == 0.0) continue;
        const double d = target - mean;
        if (cfg_.max_leverage > 0.0 && d * d * w_sum > cfg_.max_leverage * cfg_.max_leverage * m2) {
          continue;
        }
        AffineFit wide = fit_affine(std::span(samples_).first(m + 1), cfg_.min_scale_variance);
        if (!wide.degenerate) return {wide, true};
      }
    }
    // Nothing qualified: the whole prior is the best-conditioned choice left.
    AffineFit all = fit_affine(samples_, cfg_.min_scale_variance);
    if (!all.degenerate) return {all, true};
    return {fit, false};
  }

 private:
  bool conditioned(std::span<const FitSample> s, double target) const {
    if (cfg_.max_leverage <= 0.0) return true;
    double w_sum = 0.0, sp = 0.0;
    for (const auto& x : s) {
      w_sum += x.weight;
      sp += x.weight * x.pred;
    }
    const double mean = sp / w_sum;
    double sxx = 0.0;
    for (const auto& x : s) sxx += x.weight * (x.pred - mean) * (x.pred - mean);
    const double d = target - mean;
    return d * d * w_sum <= cfg_.max_leverage * cfg_.max_leverage * sxx;
  }

  void collect(std::size_t n) {
    samples_.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nb = neighbors_[i];
      const double w = cfg_.weighting == Weighting::inverse_distance ? 1.0 / nb.distance : 1.0;
      samples_.push_back({pred_.at(nb.coord.x, nb.coord.y), prior_.at(nb.coord.x, nb.coord.y), w});
    }
  }

  const DepthMap& prior_;
  const SpatialIndex& index_;
  const RelativePrediction& pred_;
  const FillConfig& cfg_;
  std::vector<Neighbor> neighbors_;
  std::vector<FitSample> samples_;
};

struct RowStats {
  std::size_t filled = 0, clamped = 0, degenerate = 0, expanded = 0;
};

}  // namespace

FillResult prefill(const DepthMap& prior, const RelativePrediction& pred, const FillConfig& cfg,
                   unsigned threads) {
  require_same_shape(prior, pred, "prefill");
  const SpatialIndex index(prior);
  return prefill(prior, index, pred, cfg, threads);
}

FillResult prefill(const DepthMap& prior, const SpatialIndex& index,
                   const RelativePrediction& pred, const FillConfig& cfg, unsigned threads) {
  require_same_shape(prior, pred, "prefill");
  if (cfg.k < 1) throw Error(Errc::BadSpec, "k must be >= 1");
  const int w = prior.width(), h = prior.height();
  std::vector<float> out(prior.depth().values().begin(), prior.depth().values().end());
  std::vector<RowStats> rows(static_cast<std::size_t>(h));

  parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    PixelFitter fitter(prior, index, pred, cfg);
    RowStats& st = rows[row];
    for (int x = 0; x < w; ++x) {
      if (prior.valid(x, y)) continue;
      const PixelFit pf = fitter.fit_at({x, y});
      const double v = pf.fit.scale * static_cast<double>(pred.at(x, y)) + pf.fit.shift;
      float f = static_cast<float>(v);
      if (!(f >= kFillFloorM)) {
        f = kFillFloorM;
        ++st.clamped;
      }
      out[prior.depth().index(x, y)] = f;
      ++st.filled;
      st.degenerate += pf.fit.degenerate ? 1 : 0;
      st.expanded += pf.expanded ? 1 : 0;
    }
  });

  FillReport report;
  for (const auto& st : rows) {
    report.filled += st.filled;
    report.clamped += st.clamped;
    report.degenerate += st.degenerate;
    report.expanded += st.expanded;
  }
  return FillResult{DepthMap::dense(Grid(w, h, std::move(out))), report};
}

DepthMap prefill_interpolation(const DepthMap& prior, std::size_t k, unsigned threads) {
  if (k < 1) throw Error(Errc::BadSpec, "k must be >= 1");
  const SpatialIndex index(prior);
  const int w = prior.width(), h = prior.height();
  std::vector<float> out(prior.depth().values().begin(), prior.depth().values().end());
  parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::vector<Neighbor> nbs;
    for (int x = 0; x < w; ++x) {
      if (prior.valid(x, y)) continue;
      index.knn_into({x, y}, k, nbs);
      double num = 0.0, den = 0.0;
      for (const auto& nb : nbs) {
        const double wt = 1.0 / nb.distance;
        num += wt * prior.at(nb.coord.x, nb.coord.y);
        den += wt;
      }
      out[prior.depth().index(x, y)] = static_cast<float>(num / den);
    }
  });
  return DepthMap::dense(Grid(w, h, std::move(out)));
}

GlobalAlignResult global_align(const DepthMap& prior, const RelativePrediction& pred) {
  require_same_shape(prior, pred, "global_align");
  std::vector<FitSample> samples;
  samples.reserve(count_valid(prior));
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.valid(i)) samples.push_back({pred[i], prior[i], 1.0});
  }
  if (samples.empty()) throw Error(Errc::EmptyPrior, "prior has no valid pixels");
  const AffineFit fit = fit_affine(samples);
  std::vector<float> out(prior.size());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    float f = static_cast<float>(fit.scale * static_cast<double>(pred[i]) + fit.shift);
    if (!(f >= kFillFloorM)) {
      f = kFillFloorM;
      ++clamped;
    }
    out[i] = f;
  }
  return {DepthMap::dense(Grid(prior.width(), prior.height(), std::move(out))), fit, clamped};
}

namespace {

Normalized normalize_values(const Grid& g, const ValidityMask* mask) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const double v = g[i];
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any) throw Error(Errc::Empty, "nothing to normalize");
  if (!(hi > lo)) throw Error(Errc::Degenerate, "constant input cannot be normalized");
  std::vector<float> out(g.size(), 0.0f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    out[i] = static_cast<float>((g[i] - lo) / (hi - lo));
  }
  return {Grid(g.width(), g.height(), std::move(out)), lo, hi};
}

}  // namespace

Normalized normalize(const DepthMap& map) { return normalize_values(map.depth(), &map.mask()); }

Normalized normalize(const RelativePrediction& pred) { return normalize_values(pred.grid(), nullptr); }

Grid denormalize(const Grid& grid, double min, double max) {
  if (!(max > min) || !std::isfinite(min) || !std::isfinite(max)) {
    throw Error(Errc::BadRange, "denormalize needs finite max > min");
  }
  std::vector<float> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(grid[i]) * (max - min) + min);
  }
  return Grid(grid.width(), grid.height(), std::move(out));
}

}  // namespace priorfill
