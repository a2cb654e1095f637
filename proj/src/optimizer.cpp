#include "symslam/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "optimizer";
constexpr int kMaxFactorizationRetries = 12;
constexpr double kMaxDamping = 1e16;

struct Linearization {
  double cost = 0.0;
  Eigen::VectorXd gradient;  // J^T Omega r
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::size_t> skipped;
};

struct EvaluatedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
};

double cost_of(const std::vector<Edge>& edges, const std::vector<EvaluatedEdge>& ends,
               const std::vector<Sim3>& poses, std::vector<std::size_t>* skipped) {
  double cost = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    try {
      const Tangent7 r = edge_residual(edges[k], poses[ends[k].from], poses[ends[k].to]);
      cost += r.dot(edges[k].omega * r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRotationNearPi) throw;
      if (skipped) skipped->push_back(k);
    }
  }
  return cost;
}

Linearization linearize(const std::vector<Edge>& edges, const std::vector<EvaluatedEdge>& ends,
                        const std::vector<Sim3>& poses, const std::vector<long>& free_index,
                        long num_free) {
  Linearization lin;
  lin.gradient = Eigen::VectorXd::Zero(7 * num_free);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const Sim3& a = poses[ends[k].from];
    const Sim3& b = poses[ends[k].to];
    Tangent7 r;
    EdgeJacobians j;
    try {
      r = edge_residual(e, a, b);
      j = edge_jacobians(e, a, b);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kRotationNearPi) throw;
      lin.skipped.push_back(k);
      continue;
    }
    lin.cost += r.dot(e.omega * r);
    const long idx[2] = {free_index[ends[k].from], free_index[ends[k].to]};
    const Mat7* jac[2] = {&j.d_from, &j.d_to};
    for (int p = 0; p < 2; ++p) {
      if (idx[p] < 0) continue;
      lin.gradient.segment<7>(7 * idx[p]) += jac[p]->transpose() * (e.omega * r);
      for (int q = 0; q < 2; ++q) {
        if (idx[q] < 0) continue;
        const Mat7 block = jac[p]->transpose() * e.omega * (*jac[q]);
        for (int u = 0; u < 7; ++u) {
          for (int v = 0; v < 7; ++v) {
            if (block(u, v) != 0.0) lin.triplets.emplace_back(7 * idx[p] + u, 7 * idx[q] + v, block(u, v));
          }
        }
      }
    }
  }
  return lin;
}

// Solves (H + lambda I) dx = -g. Scaling by diag(H) over-damps the soft chain
// modes next to the stiff scale edges. Returns false when factorization fails.
bool solve_damped(const Eigen::SparseMatrix<double>& h, const Eigen::VectorXd& g, double lambda, bool dense,
                  Eigen::VectorXd& dx) {
  Eigen::SparseMatrix<double> a = h;
  for (int k = 0; k < a.rows(); ++k) {
    const double d = h.coeff(k, k);
    a.coeffRef(k, k) = d + lambda;
  }
  if (dense) {
    const Eigen::MatrixXd ad(a);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ad);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    dx = ldlt.solve(-g);
  } else {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) return false;
    if ((ldlt.vectorD().array() <= 0.0).any()) return false;
    dx = ldlt.solve(-g);
  }
  return dx.allFinite();
}

void check_connected(const PoseGraph& graph, std::size_t anchor, const std::vector<EvaluatedEdge>& ends) {
  const std::size_t n = graph.nodes().size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const EvaluatedEdge& e : ends) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<std::uint8_t> seen(n, 0);
  std::deque<std::size_t> queue{anchor};
  seen[anchor] = 1;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t nb : adj[cur]) {
      if (!seen[nb]) {
        seen[nb] = 1;
        queue.push_back(nb);
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!seen[k]) {
      throw Error(ErrorCode::kDisconnectedGraph, kModule,
                  "node " + to_string(graph.node(k).key) + " has no edge path to the anchor " +
                      to_string(graph.node(anchor).key));
    }
  }
}

}  // namespace

void LMConfig::validate() const {
  if (max_iterations < 0 || !(initial_damping > 0.0) || !(damping_up > 1.0) || !(damping_down > 0.0) ||
      !(damping_down < 1.0) || !(residual_tolerance > 0.0) || !(step_tolerance > 0.0) ||
      !(cost_change_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "LM settings must be positive with up > 1 > down");
  }
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::kResidualTolerance: return "residual_tolerance";
    case Termination::kStepTolerance: return "step_tolerance";
    case Termination::kCostChangeTolerance: return "cost_change_tolerance";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kDampingOverflow: return "damping_overflow";
    case Termination::kNothingToOptimize: return "nothing_to_optimize";
  }
  return "unknown";
}

Tangent7 edge_residual(const Edge& edge, const Sim3& v_from, const Sim3& v_to) {
  return log_sim3(edge.measurement * v_from.inverse() * v_to);
}

EdgeJacobians edge_jacobians(const Edge& edge, const Sim3& v_from, const Sim3& v_to) {
  const Tangent7 r = edge_residual(edge, v_from, v_to);
  const Mat7 jr_inv = right_jacobian_inverse(r);
  EdgeJacobians j;
  j.d_to = jr_inv;
  j.d_from = -jr_inv * adjoint(v_to.inverse() * v_from);
  return j;
}

double weighted_cost(const PoseGraph& graph) {
  std::vector<EvaluatedEdge> ends;
  ends.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) ends.push_back({graph.index_of(e.from), graph.index_of(e.to)});
  std::vector<Sim3> poses;
  poses.reserve(graph.nodes().size());
  for (const Node& n : graph.nodes()) poses.push_back(n.pose);
  return cost_of(graph.edges(), ends, poses, nullptr);
}

OptimizeReport optimize(PoseGraph& graph, const LMConfig& config) {
  config.validate();
  OptimizeReport report;
  const auto anchor = graph.anchor();
  const std::size_t n = graph.nodes().size();
  if (!anchor || n < 2) {
    report.termination = Termination::kNothingToOptimize;
    report.initial_cost = report.final_cost = anchor ? weighted_cost(graph) : 0.0;
    return report;
  }

  const std::vector<Edge>& edges = graph.edges();
  std::vector<EvaluatedEdge> ends;
  ends.reserve(edges.size());
  for (const Edge& e : edges) ends.push_back({graph.index_of(e.from), graph.index_of(e.to)});
  check_connected(graph, *anchor, ends);

  std::vector<long> free_index(n, -1);
  long num_free = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != *anchor) free_index[k] = num_free++;
  }
  const bool dense = static_cast<std::size_t>(num_free) < config.dense_below_nodes;

  std::vector<Sim3> poses;
  poses.reserve(n);
  for (const Node& node : graph.nodes()) poses.push_back(node.pose);

  std::map<std::size_t, int> skip_counts;
  double lambda = config.initial_damping;
  double cost = cost_of(edges, ends, poses, nullptr);
  report.initial_cost = cost;
  report.termination = Termination::kMaxIterations;

  if (cost < config.residual_tolerance) {
    report.termination = Termination::kResidualTolerance;
  }

  while (report.termination == Termination::kMaxIterations && report.iterations < config.max_iterations) {
    Linearization lin = linearize(edges, ends, poses, free_index, num_free);
    for (std::size_t k : lin.skipped) ++skip_counts[k];
    cost = lin.cost;

    Eigen::SparseMatrix<double> h(7 * num_free, 7 * num_free);
    h.setFromTriplets(lin.triplets.begin(), lin.triplets.end());

    Eigen::VectorXd dx;
    std::ostringstream history;
    int retries = 0;
    while (!solve_damped(h, lin.gradient, lambda, dense, dx)) {
      history << (retries ? ", " : "") << lambda;
      lambda *= config.damping_up;
      if (++retries > kMaxFactorizationRetries) {
        throw Error(ErrorCode::kSingularNormalEquations, kModule,
                    "damped normal equations not positive definite; damping tried: " + history.str());
      }
    }

    std::vector<Sim3> trial = poses;
    for (std::size_t k = 0; k < n; ++k) {
      if (free_index[k] >= 0) trial[k] = trial[k] * exp_sim3(dx.segment<7>(7 * free_index[k]));
    }
    const double trial_cost = cost_of(edges, ends, trial, nullptr);
    const double step = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;

    IterationRecord rec;
    rec.iteration = ++report.iterations;
    rec.damping = lambda;
    rec.step_norm = step;
    rec.skipped_edges = lin.skipped.size();
    rec.accepted = trial_cost <= cost;
    const double decrease = cost - trial_cost;
    if (rec.accepted) {
      poses = std::move(trial);
      cost = trial_cost;
      lambda = std::max(lambda * config.damping_down, 1e-15);
    } else {
      lambda *= config.damping_up;
    }
    rec.cost = cost;
    report.trace.push_back(rec);

    if (cost < config.residual_tolerance) {
      report.termination = Termination::kResidualTolerance;
    } else if (rec.accepted && step < config.step_tolerance) {
      report.termination = Termination::kStepTolerance;
    } else if (rec.accepted && decrease <= config.cost_change_tolerance * (cost + decrease)) {
      report.termination = Termination::kCostChangeTolerance;
    } else if (lambda > kMaxDamping) {
      report.termination = Termination::kDampingOverflow;
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (free_index[k] >= 0) graph.set_pose(k, poses[k]);
  }
  report.final_cost = cost;
  report.skipped_edges.assign(skip_counts.begin(), skip_counts.end());
  return report;
}

void write_report(const OptimizeReport& report, std::ostream& out) {
  const auto old_precision = out.precision(10);
  for (const IterationRecord& r : report.trace) {
    out << "iter=" << r.iteration << " cost=" << r.cost << " damping=" << r.damping << " step=" << r.step_norm
        << " accepted=" << (r.accepted ? 1 : 0) << " skipped=" << r.skipped_edges << '\n';
  }
  out << "iterations=" << report.iterations << " initial_cost=" << report.initial_cost
      << " final_cost=" << report.final_cost << " termination=" << termination_name(report.termination)
      << '\n';
  for (const auto& [edge, count] : report.skipped_edges) {
    out << "skipped_edge=" << edge << " iterations=" << count << '\n';
  }
  out.precision(old_precision);
}

}  // namespace symslam
