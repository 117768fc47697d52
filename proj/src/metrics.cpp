#include "priorfill/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace priorfill {

namespace {

template <class Fn>
std::size_t for_each_evaluated(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region,
                               Fn&& fn) {
  require_same_shape(pred, gt, "metric");
  if (region) require_same_shape(gt, *region, "metric region");
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i) || !pred.valid(i) || (region && !(*region)[i])) continue;
    fn(static_cast<double>(pred[i]), static_cast<double>(gt[i]));
    ++n;
  }
  if (n == 0) throw Error(Errc::EmptyEvaluationSet, "no pixel is valid in both maps and the region");
  return n;
}

}  // namespace

double absrel(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region) {
  double sum = 0.0;
  const auto n = for_each_evaluated(pred, gt, region,
                                    [&](double p, double g) { sum += std::abs(p - g) / g; });
  return kAbsRelScale * sum / static_cast<double>(n);
}

double rmse(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region) {
  double sum = 0.0;
  const auto n = for_each_evaluated(pred, gt, region, [&](double p, double g) {
    sum += (p - g) * (p - g);
  });
  return std::sqrt(sum / static_cast<double>(n));
}

double silog(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region, double lambda) {
  double s1 = 0.0, s2 = 0.0;
  const auto n = for_each_evaluated(pred, gt, region, [&](double p, double g) {
    if (!(p > 0.0) || !(g > 0.0)) {
      throw Error(Errc::NonPositiveValue, "silog needs positive depths");
    }
    const double d = std::log(p) - std::log(g);
    s1 += d;
    s2 += d * d;
  });
  const double mean = s1 / static_cast<double>(n);
  const double mean_sq = s2 / static_cast<double>(n);
  // Cancellation can leave a tiny negative radicand for lambda = 1.
  return std::sqrt(std::max(0.0, mean_sq - lambda * mean * mean));
}

MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region,
                       double lambda) {
  MetricsReport r;
  r.absrel = absrel(pred, gt, region);
  r.rmse = rmse(pred, gt, region);
  r.silog = silog(pred, gt, region, lambda);
  r.evaluated_pixels = for_each_evaluated(pred, gt, region, [](double, double) {});
  return r;
}

ErrorMap error_map(const DepthMap& pred, const DepthMap& gt) {
  require_same_shape(pred, gt, "error_map");
  std::vector<float> err(gt.size(), 0.0f);
  std::vector<std::uint8_t> mask(gt.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i) || !pred.valid(i)) continue;
    err[i] = static_cast<float>(std::abs(static_cast<double>(pred[i]) - gt[i]) / gt[i]);
    mask[i] = 1;
  }
  return {Grid(gt.width(), gt.height(), std::move(err)),
          ValidityMask(gt.width(), gt.height(), std::move(mask))};
}

ValidityMask holes_of(const DepthMap& prior) {
  std::vector<std::uint8_t> bits(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) bits[i] = prior.valid(i) ? 0 : 1;
  return ValidityMask(prior.width(), prior.height(), std::move(bits));
}

}  // namespace priorfill
