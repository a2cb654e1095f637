#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symslam/evaluation.hpp"
#include "symslam/scenario.hpp"

namespace symslam {

struct SeedResult {
  std::uint64_t seed = 0;
  double ate_rmse = 0.0;
  std::size_t loops_accepted = 0;
  std::size_t false_loops_accepted = 0;
  int iterations = 0;
};

struct AblationSummary {
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct AblationResult {
  Variant variant = Variant::kFull;
  std::vector<SeedResult> runs;  // in the order of the requested seeds
  AblationSummary summary;
  // Aligned estimate and per-pose ATE error of the first seed, for plotting.
  Trajectory example_trajectory;
  std::vector<double> example_errors;
};

double median(std::vector<double> values);

// Runs the pipeline once per seed with `variant` replacing the scenario's own
// variant. Seeds run on a small thread pool; results do not depend on the
// thread count.
AblationResult run_ablation(const ScenarioConfig& scenario, Variant variant, const std::vector<std::uint64_t>& seeds,
                            unsigned threads = 0);

// 20 fixed seeds used by the acceptance checks.
const std::vector<std::uint64_t>& default_seeds();

// Writes into `dir`:
//   summary.csv    variant,seeds,median_ate,mean_ate,min_ate,max_ate
//   ate_table.csv  variant,seed,ate_rmse,loops_accepted,false_loops_accepted,iterations
//   traj_<variant>.txt  trajectory lines plus a trailing ate_error column
void emit_plot_data(const std::vector<AblationResult>& results, const std::string& dir);

}  // namespace symslam
