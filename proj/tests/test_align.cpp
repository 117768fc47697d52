#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracle.hpp"
#include "priorfill/align.hpp"
#include "priorfill/random.hpp"
#include "priorfill/scenegen.hpp"
#include "priorfill/synth.hpp"

using namespace priorfill;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;
}

// 1x5 strip: prior 2.0 m at x=0 and 10.0 m at x=4, prediction 1..5.
DepthMap strip_prior() {
  const DepthEntry e[] = {{0, 0, 2.0f}, {4, 0, 10.0f}};
  return new_depth_map(5, 1, e);
}

RelativePrediction strip_pred() { return RelativePrediction(Grid(5, 1, {1, 2, 3, 4, 5})); }

// Sum of squared weighted residuals; used to confirm a fit is a minimum.
double weighted_sse(const std::vector<FitSample>& s, double a, double b) {
  double e = 0;
  for (const auto& x : s) e += x.weight * (a * x.pred + b - x.prior) * (a * x.pred + b - x.prior);
  return e;
}

DepthMap scene(SceneKind kind, int w, int h, std::uint64_t seed) {
  SceneSpec s;
  s.kind = kind;
  s.width = w;
  s.height = h;
  s.min_depth_m = 1.0;
  s.max_depth_m = 8.0;
  s.seed = seed;
  return generate_scene(s);
}

}  // namespace

TEST_CASE("fit_affine worked examples") {
  const std::vector<FitSample> two = {{1, 2, 1}, {2, 4, 1}};
  auto f = fit_affine(two);
  CHECK(f.scale == doctest::Approx(2.0));
  CHECK(f.shift == doctest::Approx(0.0));
  CHECK(!f.degenerate);

  // Normal-equation values, confirmed below as the SSE minimum.
  const std::vector<FitSample> three = {{1, 2, 1}, {2, 3, 1}, {3, 7, 1}};
  f = fit_affine(three);
  CHECK(f.scale == doctest::Approx(2.5));
  CHECK(f.shift == doctest::Approx(-1.0));

  const std::vector<FitSample> weighted = {{1, 2, 2}, {2, 3, 1}, {3, 7, 1}};
  f = fit_affine(weighted);
  CHECK(f.scale == doctest::Approx(2.3636).epsilon(1e-4));
  CHECK(f.shift == doctest::Approx(-0.6364).epsilon(1e-4));

  for (const auto* s : {&three, &weighted}) {
    const auto g = fit_affine(*s);
    const double best = weighted_sse(*s, g.scale, g.shift);
    for (double da : {-1e-3, 0.0, 1e-3}) {
      for (double db : {-1e-3, 0.0, 1e-3}) {
        CHECK(weighted_sse(*s, g.scale + da, g.shift + db) >= best - 1e-12);
      }
    }
  }
}

TEST_CASE("fit_affine degenerate fallback") {
  const std::vector<FitSample> one = {{5, 3, 1}};
  auto f = fit_affine(one);
  CHECK(f.degenerate);
  CHECK(f.scale == 1.0);
  CHECK(f.shift == doctest::Approx(-2.0));

  const std::vector<FitSample> flat = {{5, 3, 1}, {5, 9, 1}};
  f = fit_affine(flat);
  CHECK(f.degenerate);
  CHECK(f.scale == 1.0);
  CHECK(f.shift == doctest::Approx(1.0));

  const std::vector<FitSample> flat_w = {{5, 3, 3}, {5, 9, 1}};
  CHECK(fit_affine(flat_w).shift == doctest::Approx((3 * -2.0 + 4.0) / 4.0));

  // A threshold above the actual variance forces the fallback.
  const std::vector<FitSample> small = {{1.0, 2.0, 1}, {1.001, 2.002, 1}};
  CHECK(!fit_affine(small).degenerate);
  CHECK(fit_affine(small, 1e-3).degenerate);

  CHECK(code_of([] { fit_affine(std::vector<FitSample>{}); }) == Errc::NoSamples);
  CHECK(code_of([] { fit_affine(std::vector<FitSample>{{1, 1, 0}}); }) == Errc::BadSpec);
  CHECK(code_of([] { fit_affine(std::vector<FitSample>{{NAN, 1, 1}}); }) == Errc::BadSpec);
}

TEST_CASE("fit_affine: duplicating a sample equals doubling its weight") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FitSample> s;
    const std::size_t n = 2 + uniform_index(rng, 6);
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back({uniform(rng, 0, 5), uniform(rng, 1, 9), uniform(rng, 0.1, 2.0)});
    }
    const std::size_t j = uniform_index(rng, n);
    auto dup = s;
    dup.push_back(s[j]);
    auto dbl = s;
    dbl[j].weight *= 2.0;
    const auto a = fit_affine(dup), b = fit_affine(dbl);
    CHECK(a.scale == doctest::Approx(b.scale).epsilon(1e-9));
    CHECK(a.shift == doctest::Approx(b.shift).epsilon(1e-9));
  }
}

TEST_CASE("prefill: strip fixture") {
  FillConfig cfg;
  cfg.k = 2;
  cfg.weighting = Weighting::inverse_distance;
  const auto r = prefill(strip_prior(), strip_pred(), cfg);
  const float expect[] = {2, 4, 6, 8, 10};
  for (int x = 0; x < 5; ++x) CHECK(r.map.at(x, 0) == doctest::Approx(expect[x]).epsilon(1e-6));
  CHECK(r.report.filled == 3);
  CHECK(r.report.clamped == 0);
  CHECK(count_valid(r.map) == 5);
}

TEST_CASE("prefill: fully valid prior is the identity") {
  const auto gt = scene(SceneKind::fractal, 24, 16, 1);
  const auto pred = RelativePrediction(Grid::filled(24, 16, 1.0f));
  const auto r = prefill(gt, pred, FillConfig{});
  CHECK(std::equal(r.map.depth().values().begin(), r.map.depth().values().end(),
                   gt.depth().values().begin()));
  CHECK(r.report.filled == 0);
}

TEST_CASE("prefill: errors") {
  const auto pred = RelativePrediction(Grid::filled(4, 4, 1.0f));
  CHECK(code_of([&] { prefill(new_depth_map(4, 4, {}), pred, FillConfig{}); }) == Errc::EmptyPrior);
  CHECK(code_of([&] { prefill(strip_prior(), pred, FillConfig{}); }) == Errc::DimensionMismatch);
  FillConfig zero;
  zero.k = 0;
  CHECK(code_of([&] { prefill(strip_prior(), strip_pred(), zero); }) == Errc::BadSpec);
}

TEST_CASE("prefill: negative extrapolation is clamped and counted") {
  // Support fit q = 10 p - 9 from (1,1) and (1.1,2); pred 0 at x=0 -> -9.
  const DepthEntry e[] = {{1, 0, 1.0f}, {2, 0, 2.0f}};
  const auto prior = new_depth_map(3, 1, e);
  const RelativePrediction pred(Grid(3, 1, {0.0f, 1.0f, 1.1f}));
  FillConfig cfg;
  cfg.k = 2;
  const auto r = prefill(prior, pred, cfg);
  CHECK(r.map.at(0, 0) == kFillFloorM);
  CHECK(r.report.clamped == 1);
}

TEST_CASE("prefill matches the brute-force oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 2 + static_cast<int>(uniform_index(rng, 31));
    const int h = 2 + static_cast<int>(uniform_index(rng, 31));
    const std::size_t n = 1 + uniform_index(rng, std::min<std::uint64_t>(200, w * h - 1));
    const bool quantized = trial % 4 == 0;
    std::vector<float> pv(static_cast<std::size_t>(w * h));
    for (auto& v : pv) {
      v = static_cast<float>(uniform(rng, 0.5, 3.0));
      if (quantized) v = std::round(v);
    }
    const RelativePrediction pred(Grid(w, h, pv));
    std::vector<std::size_t> order(pv.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<DepthEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, order.size() - i)]);
      const double q = 2.0 * pv[order[i]] + 1.0 + uniform(rng, -1e-3, 1e-3);
      entries.push_back({static_cast<int>(order[i] % w), static_cast<int>(order[i] / w),
                         static_cast<float>(q)});
    }
    const auto prior = new_depth_map(w, h, entries);
    for (std::size_t k : {1u, 3u, 5u, 10u}) {
      for (auto weighting : {Weighting::uniform, Weighting::inverse_distance}) {
        FillConfig cfg;
        cfg.k = k;
        cfg.weighting = weighting;
        const auto got = prefill(prior, pred, cfg).map;
        const auto want =
            oracle::prefill(prior, pred, {k, weighting == Weighting::inverse_distance, 1e-12, true});
        double worst = 0;
        for (std::size_t i = 0; i < want.size(); ++i) {
          worst = std::max(worst, std::abs(static_cast<double>(got[i]) - want[i]));
        }
        CHECK(worst <= 1e-6);
      }
    }
  }
}

TEST_CASE("prefill without support expansion keeps the literal shift-only fallback") {
  // Supports of x=2 (k=2) are x=0,1 with equal prediction.
  const DepthEntry e[] = {{0, 0, 2.0f}, {1, 0, 4.0f}, {5, 0, 9.0f}};
  const auto prior = new_depth_map(6, 1, e);
  const RelativePrediction pred(Grid(6, 1, {1, 1, 3, 4, 5, 6}));
  FillConfig cfg;
  cfg.k = 2;
  cfg.weighting = Weighting::uniform;
  cfg.expand_degenerate = false;
  const auto lit = prefill(prior, pred, cfg);
  // shift = mean(q - p) = (1 + 3) / 2 = 2 -> 3 + 2.
  CHECK(lit.map.at(2, 0) == doctest::Approx(5.0));
  CHECK(lit.report.degenerate >= 1);
  CHECK(lit.report.expanded == 0);

  cfg.expand_degenerate = true;
  const auto wide = prefill(prior, pred, cfg);
  CHECK(wide.report.expanded >= 1);
  const auto want = oracle::prefill(prior, pred, {2, false, 1e-12, true});
  for (int x = 0; x < 6; ++x) CHECK(wide.map.at(x, 0) == doctest::Approx(want[static_cast<std::size_t>(x)]));
}

TEST_CASE("prefill: exact recovery, affine absorption and inheritance on scenes") {
  for (auto kind : {SceneKind::planes, SceneKind::steps, SceneKind::spheres, SceneKind::fractal}) {
    const auto gt = scene(kind, 48, 40, 3);
    const auto pred = derive_prediction(gt, PredictionSpec{0.5, 2.0, NoDistortion{}});
    const auto pred2 = derive_prediction(gt, PredictionSpec{5.0, -1.0, NoDistortion{}});
    for (const auto& prior :
         {sample_sparse_random(gt, 60, 1), downsample_prior(gt, 8), mask_square(gt, 16, std::nullopt, 4)}) {
      const auto r = prefill(prior, pred, FillConfig{});
      const auto r2 = prefill(prior, pred2, FillConfig{});
      for (std::size_t i = 0; i < gt.size(); ++i) {
        CHECK(std::abs(r.map[i] - gt[i]) <= 1e-5 * gt[i] + 1e-6);
        CHECK(std::abs(r.map[i] - r2.map[i]) <= 1e-4 * std::abs(r.map[i]));
        if (prior.valid(i)) CHECK(r.map[i] == prior[i]);
      }
    }
  }
}

TEST_CASE("prefill: output does not depend on thread count") {
  const auto gt = scene(SceneKind::fractal, 96, 64, 8);
  const auto pred = derive_prediction(gt, PredictionSpec{1.0, 0.0, GammaDistortion{1.3}});
  const auto prior = sample_sparse_random(gt, 100, 2);
  const auto one = prefill(prior, pred, FillConfig{}, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const auto many = prefill(prior, pred, FillConfig{}, t);
    CHECK(std::equal(one.map.depth().values().begin(), one.map.depth().values().end(),
                     many.map.depth().values().begin()));
  }
}

TEST_CASE("prefill_interpolation") {
  const auto r = prefill_interpolation(strip_prior(), 2);
  CHECK(r.at(1, 0) == doctest::Approx(4.0));
  CHECK(r.at(0, 0) == 2.0f);
  CHECK(r.at(4, 0) == 10.0f);

  const auto gt = scene(SceneKind::planes, 16, 16, 2);
  const auto id = prefill_interpolation(gt, 5);
  CHECK(std::equal(id.depth().values().begin(), id.depth().values().end(), gt.depth().values().begin()));

  const DepthEntry c[] = {{1, 1, 3.25f}, {7, 5, 3.25f}, {4, 9, 3.25f}};
  const auto constant = prefill_interpolation(new_depth_map(10, 10, c), 3);
  for (std::size_t i = 0; i < constant.size(); ++i) CHECK(constant[i] == doctest::Approx(3.25f));

  CHECK(code_of([] { prefill_interpolation(new_depth_map(3, 3, {}), 2); }) == Errc::EmptyPrior);
}

TEST_CASE("prefill_interpolation: oracle match and convex-combination bound") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto gt = scene(SceneKind::fractal, 24, 20, static_cast<std::uint64_t>(trial));
    const auto prior = sample_sparse_random(gt, 1 + uniform_index(rng, 40), static_cast<std::uint64_t>(trial));
    const std::size_t k = 1 + uniform_index(rng, 8);
    const auto got = prefill_interpolation(prior, k);
    const auto want = oracle::interpolate(prior, k);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 24; ++x) {
        const std::size_t i = prior.depth().index(x, y);
        CHECK(std::abs(got[i] - want[i]) <= 1e-6);
        if (prior.valid(i)) continue;
        const auto sup = oracle::sorted_supports(prior, x, y);
        float lo = 1e30f, hi = -1e30f;
        for (std::size_t j = 0; j < std::min(k, sup.size()); ++j) {
          lo = std::min(lo, prior.at(sup[j].x, sup[j].y));
          hi = std::max(hi, prior.at(sup[j].x, sup[j].y));
        }
        CHECK(got[i] >= lo - 1e-6f);
        CHECK(got[i] <= hi + 1e-6f);
      }
    }
  }
}

TEST_CASE("global_align") {
  const auto gt = scene(SceneKind::spheres, 32, 32, 5);
  const auto prior = sample_sparse_random(gt, 50, 1);

  const auto same = global_align(prior, derive_prediction(gt, PredictionSpec{}));
  CHECK(same.fit.scale == doctest::Approx(1.0));
  CHECK(same.fit.shift == doctest::Approx(0.0).epsilon(1e-6));
  for (std::size_t i = 0; i < gt.size(); ++i) CHECK(same.map[i] == doctest::Approx(gt[i]).epsilon(1e-6));

  const auto affine = global_align(prior, derive_prediction(gt, PredictionSpec{2.0, 1.0, NoDistortion{}}));
  for (std::size_t i = 0; i < gt.size(); ++i) CHECK(std::abs(affine.map[i] - gt[i]) <= 1e-5 * gt[i]);

  // Random instance against the covariance ratio.
  Rng rng(12);
  std::vector<float> pv(gt.size());
  for (auto& v : pv) v = static_cast<float>(uniform(rng, 0, 1));
  const RelativePrediction noise(Grid(32, 32, pv));
  const auto g = global_align(prior, noise);
  double mp = 0, mq = 0, n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!prior.valid(i)) continue;
    mp += pv[i];
    mq += prior[i];
    ++n;
  }
  mp /= n;
  mq /= n;
  double cov = 0, var = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!prior.valid(i)) continue;
    cov += (pv[i] - mp) * (prior[i] - mq);
    var += (pv[i] - mp) * (pv[i] - mp);
  }
  CHECK(g.fit.scale == doctest::Approx(cov / var).epsilon(1e-9));
  CHECK(g.fit.shift == doctest::Approx(mq - cov / var * mp).epsilon(1e-9));

  CHECK(code_of([&] { global_align(new_depth_map(32, 32, {}), noise); }) == Errc::EmptyPrior);
}

TEST_CASE("normalize / denormalize") {
  const DepthMap m(3, 1, {2.0f, 4.0f, 6.0f}, {1, 1, 1});
  const auto n = normalize(m);
  CHECK(n.min == 2.0);
  CHECK(n.max == 6.0);
  CHECK(n.values[0] == 0.0f);
  CHECK(n.values[1] == 0.5f);
  CHECK(n.values[2] == 1.0f);

  const auto back = denormalize(n.values, n.min, n.max);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == m[i]);
  CHECK(denormalize(Grid(1, 1, {0.0f}), 2, 6)[0] == 2.0f);
  CHECK(denormalize(Grid(1, 1, {1.0f}), 2, 6)[0] == 6.0f);

  // Invalid pixels are ignored for the range and written as 0.
  const DepthMap partial(3, 1, {2.0f, 100.0f, 6.0f}, {1, 0, 1});
  const auto p = normalize(partial);
  CHECK(p.max == 6.0);
  CHECK(p.values[1] == 0.0f);

  CHECK(code_of([] { normalize(DepthMap::dense(Grid::filled(3, 3, 2.0f))); }) == Errc::Degenerate);
  CHECK(code_of([] { normalize(new_depth_map(3, 3, {})); }) == Errc::Empty);
  CHECK(code_of([] { denormalize(Grid::filled(1, 1, 0.5f), 2, 2); }) == Errc::BadRange);

  const auto gt = scene(SceneKind::fractal, 40, 30, 6);
  const auto pred = derive_prediction(gt, PredictionSpec{3.0, -0.5, NoDistortion{}});
  const auto ng = normalize(gt);
  const auto rg = denormalize(ng.values, ng.min, ng.max);
  for (std::size_t i = 0; i < gt.size(); ++i) CHECK(std::abs(rg[i] - gt[i]) <= 1e-6 * gt[i]);
  const auto np = normalize(pred);
  const auto rp = denormalize(np.values, np.min, np.max);
  for (std::size_t i = 0; i < gt.size(); ++i) CHECK(std::abs(rp[i] - pred[i]) <= 1e-6 * std::abs(pred[i]));
}

TEST_CASE("prefill: far extrapolation from a tight support cluster grows the support set") {
  // Five supports with nearly equal predictions on the left, one distant
  // support on the right; x=6 has a prediction far outside the cluster.
  const DepthEntry e[] = {{0, 0, 3.000f}, {1, 0, 3.001f}, {2, 0, 3.003f},
                          {3, 0, 3.002f}, {4, 0, 3.004f}, {19, 0, 11.0f}};
  const auto prior = new_depth_map(20, 1, e);
  std::vector<float> pv = {1.000f, 1.001f, 1.002f, 1.003f, 1.004f};
  pv.resize(19, 4.0f);
  pv.push_back(5.0f);
  const RelativePrediction pred(Grid(20, 1, pv));
  FillConfig guarded;
  guarded.weighting = Weighting::uniform;
  FillConfig plain = guarded;
  plain.max_leverage = 0.0;

  const auto g = prefill(prior, pred, guarded);
  const auto p = prefill(prior, pred, plain);
  CHECK(g.report.expanded >= 1);
  CHECK(p.report.expanded == 0);
  const auto want_g = oracle::prefill(prior, pred, {5, false, 1e-12, true, 32.0});
  const auto want_p = oracle::prefill(prior, pred, {5, false, 1e-12, true, 0.0});
  for (int x = 0; x < 20; ++x) {
    CHECK(g.map.at(x, 0) == doctest::Approx(want_g[static_cast<std::size_t>(x)]).epsilon(1e-6));
    CHECK(p.map.at(x, 0) == doctest::Approx(want_p[static_cast<std::size_t>(x)]).epsilon(1e-6));
  }
  // The cluster alone puts x=8 well away from the 2p+1 trend the distant
  // support confirms; the grown set lands near it.
  CHECK(std::abs(g.map.at(8, 0) - 9.0f) < 0.1f);
  CHECK(std::abs(p.map.at(8, 0) - 9.0f) > 1.0f);
}

TEST_CASE("prefill matches the oracle with the extrapolation check disabled") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gt = scene(SceneKind::spheres, 24, 20, static_cast<std::uint64_t>(trial));
    const auto pred = derive_prediction(gt, PredictionSpec{1.0, 0.0, GammaDistortion{1.4}});
    const auto prior = sample_sparse_random(gt, 1 + uniform_index(rng, 60), static_cast<std::uint64_t>(trial));
    for (double lev : {0.0, 4.0}) {
      FillConfig cfg;
      cfg.max_leverage = lev;
      const auto got = prefill(prior, pred, cfg).map;
      const auto want = oracle::prefill(prior, pred, {5, true, 1e-12, true, lev});
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(std::abs(got[i] - static_cast<float>(want[i])) <= 1e-6);
      }
    }
  }
}
