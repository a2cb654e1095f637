#pragma once

#include <optional>
#include <vector>

#include "symslam/two_view.hpp"

namespace symslam {

// w_x = C_a(x) * C_b(x) over jointly valid pixels, 0 elsewhere. When
// `min_confidence` is set, pixels whose confidence in either map falls below
// it also get weight 0.
std::vector<double> pair_confidence_weights(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                            std::optional<double> min_confidence = std::nullopt);

struct ScaleEstimate {
  double scale = 1.0;
  double weight_sum = 0.0;   // sum of w_x
  std::size_t support = 0;   // pixels with w_x > 0
};

// Closed-form minimizer s of sum_x w_x || P_a(x) - s P_b(x) ||^2.
//
// Direction: s multiplies pm_b (the later pass) to bring it onto pm_a (the
// first-processed pass of the same view). Throws DegenerateDenominator when
// the weighted squared norm of pm_b is below 1e-12.
ScaleEstimate estimate_relative_scale(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                      std::optional<double> min_confidence = std::nullopt);

inline double relative_scale(const LocalPointmap& pm_a, const LocalPointmap& pm_b) {
  return estimate_relative_scale(pm_a, pm_b).scale;
}

// sum_x w_x || P_a(x) - s P_b(x) ||^2 for a given s.
double weighted_scale_objective(const LocalPointmap& pm_a, const LocalPointmap& pm_b,
                                const std::vector<double>& weights, double s);

}  // namespace symslam
