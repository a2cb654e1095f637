#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symslam/evaluation.hpp"
#include "symslam/frontend_sim.hpp"
#include "symslam/fusion.hpp"
#include "symslam/optimizer.hpp"
#include "symslam/pose_graph.hpp"
#include "symslam/scenario.hpp"

namespace symslam {

struct LoopRecord {
  int view_i = 0;
  int view_j = 0;
  bool is_true_loop = false;
  double confidence = 0.0;
  bool accepted = false;
};

struct PipelineResult {
  Scene scene;
  PoseGraph graph;
  // Every pass that made it into the graph, in ingestion order.
  std::vector<PairMeasurement> measurements;
  std::vector<LoopRecord> loops;
  std::vector<OptimizeReport> reports;  // one per optimizer call
  Trajectory estimate;
  Trajectory ground_truth;
  AteResult ate;
  PointCloud cloud;  // world frame of the estimate
  std::optional<ReconstructionMetrics> reconstruction;

  std::size_t accepted_loops() const;
  std::size_t false_loops_accepted() const;
  int total_iterations() const;
};

// The view pose reported for view v is its first-processed node (or its only
// node in the collapsed layout).
Trajectory estimated_trajectory(const PoseGraph& graph, const Scene& scene);
Trajectory ground_truth_trajectory(const Scene& scene);

// Sequential passes: for i = 1..L-1 and j = max(0, i-N)..i-1 the pair
// (j, i). Loop candidates closing on view i are considered right after the
// sequential passes of view i.
PipelineResult run_pipeline(const ScenarioConfig& config);

// Writes traj_est.txt, traj_gt.txt, cloud.ply, report.txt, metrics.txt and
// graph.txt into `dir`, creating it if needed.
void write_run_artifacts(const PipelineResult& result, const ScenarioConfig& config, const std::string& dir);

}  // namespace symslam
