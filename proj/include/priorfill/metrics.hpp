#pragma once

#include <cstddef>
#include <optional>

#include "priorfill/core.hpp"

namespace priorfill {

/// AbsRel is stored multiplied by 100 (percent), matching how tables report it.
inline constexpr double kAbsRelScale = 100.0;

struct MetricsReport {
  double absrel = 0.0;
  double rmse = 0.0;
  double silog = 0.0;
  std::size_t evaluated_pixels = 0;
};

// Evaluation set = gt-valid AND pred-valid AND region (when given). An empty
// set throws EmptyEvaluationSet. Sums run in row-major order in double.

double absrel(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region = nullptr);
double rmse(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region = nullptr);
/// sqrt(mean(g^2) - lambda * mean(g)^2), g = ln pred - ln gt. Throws
/// NonPositiveValue if either side is <= 0 on the evaluation set.
double silog(const DepthMap& pred, const DepthMap& gt, const ValidityMask* region = nullptr,
             double lambda = 1.0);

MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt,
                       const ValidityMask* region = nullptr, double lambda = 1.0);

struct ErrorMap {
  Grid relative_error;
  ValidityMask evaluated;
};

/// |pred - gt| / gt on the joint valid set, 0 elsewhere.
ErrorMap error_map(const DepthMap& pred, const DepthMap& gt);

/// Mask of pixels invalid in `prior`: the holes a filler had to invent.
ValidityMask holes_of(const DepthMap& prior);

}  // namespace priorfill
