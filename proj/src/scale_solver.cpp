#include "symslam/scale_solver.hpp"

#include <string>

#include "symslam/errors.hpp"

namespace symslam {

namespace {
constexpr const char* kModule = "scale_solver";
constexpr double kMinDenominator = 1e-12;
}  // namespace

std::vector<double> pair_confidence_weights(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                            std::optional<double> min_confidence) {
  if (!pm_a.same_shape(pm_b) || pm_a.size() != pm_b.size() ||
      pm_a.confidence.size() != pm_a.size() || pm_b.confidence.size() != pm_b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule,
                "pointmaps are " + std::to_string(pm_a.width) + "x" + std::to_string(pm_a.height) +
                    " and " + std::to_string(pm_b.width) + "x" + std::to_string(pm_b.height));
  }
  std::vector<double> w(pm_a.size(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!pm_a.is_valid(k) || !pm_b.is_valid(k)) continue;
    const double ca = pm_a.confidence[k];
    const double cb = pm_b.confidence[k];
    if (min_confidence && (ca < *min_confidence || cb < *min_confidence)) continue;
    w[k] = ca * cb;
  }
  return w;
}

ScaleEstimate estimate_relative_scale(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                      std::optional<double> min_confidence) {
  const std::vector<double> w = pair_confidence_weights(pm_a, pm_b, min_confidence);
  ScaleEstimate est;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    num += w[k] * pm_a.points[k].dot(pm_b.points[k]);
    den += w[k] * pm_b.points[k].squaredNorm();
    est.weight_sum += w[k];
    ++est.support;
  }
  if (est.support == 0 || den < kMinDenominator) {
    throw Error(ErrorCode::kDegenerateDenominator, kModule,
                "weighted squared norm " + std::to_string(den) + " below 1e-12");
  }
  est.scale = num / den;
  if (!(est.scale > 0.0)) {
    throw Error(ErrorCode::kDegenerateDenominator, kModule, "pointmaps are anti-aligned, scale <= 0");
  }
  return est;
}

double weighted_scale_objective(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                const std::vector<double>& weights, double s) {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    sum += weights[k] * (pm_a.points[k] - s * pm_b.points[k]).squaredNorm();
  }
  return sum;
}

}  // namespace symslam
