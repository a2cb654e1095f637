#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symslam/pose_graph.hpp"
#include "symslam/sim3.hpp"

namespace symslam {

struct LMConfig {
  int max_iterations = 20;
  double initial_damping = 1e-5;  // added to the diagonal as lambda * I
  double damping_up = 10.0;
  double damping_down = 0.1;
  double residual_tolerance = 1e-10;  // on the weighted squared residual
  double step_tolerance = 1e-10;      // on the max-norm of the update
  // Stop once an accepted step lowers the cost by less than this fraction.
  double cost_change_tolerance = 1e-9;
  // Systems with fewer free nodes than this use a dense factorization.
  std::size_t dense_below_nodes = 50;

  void validate() const;
};

enum class Termination {
  kResidualTolerance,
  kStepTolerance,
  kCostChangeTolerance,
  kMaxIterations,
  kDampingOverflow,  // no decreasing step found before damping blew up
  kNothingToOptimize,
};

std::string_view termination_name(Termination t);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;  // after the iteration (accepted or not)
  double damping = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
  std::size_t skipped_edges = 0;
};

struct OptimizeReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  Termination termination = Termination::kMaxIterations;
  std::vector<IterationRecord> trace;
  // Edges skipped because their composed rotation reached pi, with the
  // number of iterations each was skipped for.
  std::vector<std::pair<std::size_t, int>> skipped_edges;
};

// log(e * v_from^-1 * v_to). Throws RotationNearPi.
Tangent7 edge_residual(const Edge& edge, const Sim3& v_from, const Sim3& v_to);

// Jacobians of edge_residual under right perturbations v <- v * exp(delta).
struct EdgeJacobians {
  Mat7 d_from;
  Mat7 d_to;
};
EdgeJacobians edge_jacobians(const Edge& edge, const Sim3& v_from, const Sim3& v_to);

// Sum over edges of r^T Omega r at the graph's current node poses. Edges at
// the rotation singularity are left out.
double weighted_cost(const PoseGraph& graph);

// Levenberg-Marquardt over every node but the anchor. Throws
// DisconnectedGraph when a node has no edge path to the anchor and
// SingularNormalEquations when the damped system cannot be factorized.
OptimizeReport optimize(PoseGraph& graph, const LMConfig& config = {});

// One line per iteration, then a summary line.
void write_report(const OptimizeReport& report, std::ostream& out);

}  // namespace symslam
