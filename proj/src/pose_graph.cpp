#include "symslam/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "symslam/errors.hpp"
#include "symslam/scale_solver.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "pose_graph";

double mean_valid_confidence(const LocalPointmap& pm) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < pm.size(); ++k) {
    if (!pm.is_valid(k)) continue;
    sum += pm.confidence[k];
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

// Pose that zeroes the residual of `edge` given the pose of its other end.
Sim3 propagate_to(const Edge& edge, const Sim3& from_pose) { return from_pose * edge.measurement.inverse(); }
Sim3 propagate_from(const Edge& edge, const Sim3& to_pose) { return to_pose * edge.measurement; }

}  // namespace

std::string to_string(const NodeKey& key) {
  std::ostringstream os;
  os << "v" << key.view << "^";
  if (key.paired_with == NodeKey::kCollapsed) {
    os << "*";
  } else {
    os << key.paired_with;
  }
  return os.str();
}

Mat7 OmegaModel::pose_information(double confidence) const {
  Mat7 o = Mat7::Zero();
  for (int k = 0; k < 3; ++k) {
    o(k, k) = confidence * kappa_rho;
    o(k + 3, k + 3) = confidence * kappa_phi;
  }
  o(6, 6) = confidence * kappa_sigma;
  return o;
}

Mat7 OmegaModel::scale_information(double mass) const {
  Mat7 o = Mat7::Zero();
  for (int k = 0; k < 6; ++k) o(k, k) = scale_edge_stiffness;
  o(6, 6) = kappa_sigma * mass;
  return o;
}

void GraphConfig::validate() const {
  if (neighbor_radius < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "N must be >= 1");
  }
  if (!(tau_p > 0.0 && tau_p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "tau_p must lie in (0, 1)");
  }
  if (!(omega.kappa_rho > 0.0 && omega.kappa_phi > 0.0 && omega.kappa_sigma > 0.0 &&
        omega.scale_edge_stiffness > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "information constants must be positive");
  }
}

PoseGraph::PoseGraph(GraphConfig config) : config_(std::move(config)) { config_.validate(); }

std::optional<std::size_t> PoseGraph::find(const NodeKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PoseGraph::index_of(const NodeKey& key) const {
  auto idx = find(key);
  if (!idx) throw Error(ErrorCode::kMissingNode, kModule, "no node " + to_string(key));
  return *idx;
}

std::optional<std::size_t> PoseGraph::first_processed(int view) const {
  auto it = first_.find(view);
  if (it == first_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> PoseGraph::anchor() const {
  if (first_.empty()) return std::nullopt;
  return first_.begin()->second;
}

std::vector<int> PoseGraph::views() const {
  std::set<int> v;
  for (const Node& n : nodes_) v.insert(n.key.view);
  return {v.begin(), v.end()};
}

std::vector<std::size_t> PoseGraph::nodes_of_view(int view) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].key.view == view) out.push_back(k);
  }
  return out;
}

std::size_t PoseGraph::count_edges(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [kind](const Edge& e) { return e.kind == kind; }));
}

std::size_t PoseGraph::count_loop_edges() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.is_loop; }));
}

std::size_t PoseGraph::add_node(Node node) {
  if (index_.count(node.key) != 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "node " + to_string(node.key) + " already exists");
  }
  const std::size_t idx = nodes_.size();
  if (node.is_first_processed) {
    if (first_.count(node.key.view) != 0) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "view " + std::to_string(node.key.view) + " already has a first-processed node");
    }
    first_[node.key.view] = idx;
  }
  index_[node.key] = idx;
  nodes_.push_back(std::move(node));
  return idx;
}

void PoseGraph::add_edge(Edge edge) {
  index_of(edge.from);
  index_of(edge.to);
  edges_.push_back(std::move(edge));
}

void PoseGraph::set_pose(std::size_t index, const Sim3& pose) {
  nodes_.at(index).pose = pose;
  nodes_.at(index).initialized = true;
}

void ingest_pair(PoseGraph& graph, const PairMeasurement& m, bool is_loop) {
  if (graph.has_pass(m.pass_id)) {
    throw Error(ErrorCode::kDuplicatePass, kModule, "pass " + std::to_string(m.pass_id) + " already ingested");
  }
  if (m.view_i == m.view_j) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "pair must join two distinct views");
  }
  if (std::abs(m.relative_pose.transform.scale() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "relative pose must have unit scale");
  }
  const bool graph_was_empty = graph.nodes().empty();
  const GraphConfig& cfg = graph.config();

  struct Endpoint {
    NodeKey key;
    const LocalPointmap* pointmap;
    std::size_t index = 0;
    bool is_new = false;
    bool placed = false;
  };
  Endpoint ends[2] = {{{m.view_i, m.view_j}, &m.pointmap_i}, {{m.view_j, m.view_i}, &m.pointmap_j}};

  for (Endpoint& e : ends) {
    if (auto idx = graph.find(e.key)) {
      e.index = *idx;
      e.placed = graph.node(*idx).initialized;
      continue;
    }
    Node node;
    node.key = e.key;
    node.is_first_processed = !graph.first_processed(e.key.view).has_value();
    node.pointmap_confidence = mean_valid_confidence(*e.pointmap);
    node.pass_id = m.pass_id;
    node.initialized = false;
    node.pointmap = std::make_shared<const LocalPointmap>(*e.pointmap);
    e.index = graph.add_node(std::move(node));
    e.is_new = true;
  }

  // Scale edges tie every later node of a view to its first-processed node.
  for (Endpoint& e : ends) {
    if (!e.is_new || graph.node(e.index).is_first_processed) continue;
    const std::size_t first_idx = *graph.first_processed(e.key.view);
    const Node& first = graph.node(first_idx);
    if (!first.pointmap) {
      throw Error(ErrorCode::kMissingNode, kModule,
                  "first-processed node " + to_string(first.key) + " has no pointmap");
    }
    const ScaleEstimate est = estimate_relative_scale(*first.pointmap, *e.pointmap, cfg.scale_min_confidence);
    Edge edge;
    edge.kind = EdgeKind::kScale;
    edge.from = first.key;
    edge.to = e.key;
    edge.measurement = Sim3(Mat3::Identity(), Vec3::Zero(), 1.0 / est.scale);
    edge.omega = cfg.omega.scale_information(est.weight_sum);
    edge.pass_id = m.pass_id;
    edge.is_loop = is_loop;
    if (first.initialized) {
      graph.set_pose(e.index, propagate_to(edge, first.pose));
      e.placed = true;
    }
    graph.add_edge(std::move(edge));
  }

  Edge pose_edge;
  pose_edge.kind = EdgeKind::kPose;
  pose_edge.from = ends[0].key;
  pose_edge.to = ends[1].key;
  pose_edge.measurement = m.relative_pose.transform;
  pose_edge.omega = cfg.omega.pose_information(m.relative_pose.confidence);
  pose_edge.pass_id = m.pass_id;
  pose_edge.is_loop = is_loop;

  if (!ends[0].placed && !ends[1].placed && graph_was_empty) {
    graph.set_pose(ends[0].index, Sim3::identity());
    ends[0].placed = true;
  }
  if (ends[0].placed && !ends[1].placed) {
    graph.set_pose(ends[1].index, propagate_to(pose_edge, graph.node(ends[0].index).pose));
  } else if (ends[1].placed && !ends[0].placed) {
    graph.set_pose(ends[0].index, propagate_from(pose_edge, graph.node(ends[1].index).pose));
  }
  graph.add_edge(std::move(pose_edge));
  graph.mark_pass(m.pass_id);
}

void ingest_pair_collapsed(PoseGraph& graph, const PairMeasurement& m, bool is_loop) {
  if (graph.has_pass(m.pass_id)) {
    throw Error(ErrorCode::kDuplicatePass, kModule, "pass " + std::to_string(m.pass_id) + " already ingested");
  }
  if (m.view_i == m.view_j) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "pair must join two distinct views");
  }
  const bool graph_was_empty = graph.nodes().empty();
  const NodeKey keys[2] = {{m.view_i, NodeKey::kCollapsed}, {m.view_j, NodeKey::kCollapsed}};
  const LocalPointmap* maps[2] = {&m.pointmap_i, &m.pointmap_j};
  std::size_t idx[2];
  bool placed[2];
  for (int s = 0; s < 2; ++s) {
    if (auto found = graph.find(keys[s])) {
      idx[s] = *found;
      placed[s] = graph.node(*found).initialized;
      continue;
    }
    Node node;
    node.key = keys[s];
    node.is_first_processed = true;
    node.pointmap_confidence = mean_valid_confidence(*maps[s]);
    node.pass_id = m.pass_id;
    node.initialized = false;
    node.pointmap = std::make_shared<const LocalPointmap>(*maps[s]);
    idx[s] = graph.add_node(std::move(node));
    placed[s] = false;
  }

  Edge edge;
  edge.kind = EdgeKind::kPose;
  edge.from = keys[0];
  edge.to = keys[1];
  edge.measurement = Sim3(m.relative_pose.transform.rotation(), m.relative_pose.transform.translation(), 1.0);
  edge.omega = graph.config().omega.pose_information(m.relative_pose.confidence);
  edge.pass_id = m.pass_id;
  edge.is_loop = is_loop;

  if (!placed[0] && !placed[1] && graph_was_empty) {
    graph.set_pose(idx[0], Sim3::identity());
    placed[0] = true;
  }
  if (placed[0] && !placed[1]) {
    graph.set_pose(idx[1], propagate_to(edge, graph.node(idx[0]).pose));
  } else if (placed[1] && !placed[0]) {
    graph.set_pose(idx[0], propagate_from(edge, graph.node(idx[1]).pose));
  }
  graph.add_edge(std::move(edge));
  graph.mark_pass(m.pass_id);
}

LoopDecision try_close_loop(PoseGraph& graph, const PairMeasurement& m, double tau_p) {
  if (!(m.relative_pose.confidence > tau_p)) return LoopDecision::kRejected;
  ingest_pair(graph, m, /*is_loop=*/true);
  return LoopDecision::kAccepted;
}

std::vector<std::string> validate(const PoseGraph& graph) {
  std::vector<std::string> out;
  const auto& nodes = graph.nodes();
  const auto& edges = graph.edges();
  constexpr double kTol = 1e-12;

  std::map<int, int> firsts;
  for (const Node& n : nodes) {
    if (n.key.view == n.key.paired_with) {
      out.push_back("node " + to_string(n.key) + " is paired with its own view");
    }
    firsts[n.key.view] += n.is_first_processed ? 1 : 0;
  }
  for (const auto& [view, count] : firsts) {
    if (count != 1) {
      out.push_back("view " + std::to_string(view) + " has " + std::to_string(count) +
                    " first-processed nodes (expected 1)");
    }
  }

  std::vector<int> degree(nodes.size(), 0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const std::string name = "edge " + std::to_string(k) + " (" +
                             (e.kind == EdgeKind::kPose ? "pose " : "scale ") + to_string(e.from) +
                             " -> " + to_string(e.to) + ")";
    auto from = graph.find(e.from);
    auto to = graph.find(e.to);
    if (!from || !to) {
      out.push_back(name + ": endpoint missing");
      continue;
    }
    ++degree[*from];
    ++degree[*to];
    const Sim3& meas = e.measurement;
    if (e.kind == EdgeKind::kPose) {
      if (std::abs(meas.scale() - 1.0) > kTol) out.push_back(name + ": pose edge scale is not 1");
      const bool collapsed = e.from.paired_with == NodeKey::kCollapsed ||
                             e.to.paired_with == NodeKey::kCollapsed;
      if (!collapsed && (e.from.paired_with != e.to.view || e.to.paired_with != e.from.view)) {
        out.push_back(name + ": endpoints are not from one forward pass");
      }
    } else {
      if ((meas.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff() > kTol) {
        out.push_back(name + ": scale edge rotation is not identity");
      }
      if (meas.translation().cwiseAbs().maxCoeff() > kTol) {
        out.push_back(name + ": scale edge translation is not zero");
      }
      if (e.from.view != e.to.view) out.push_back(name + ": scale edge joins different views");
      if (!nodes[*from].is_first_processed) {
        out.push_back(name + ": scale edge does not start at the first-processed node");
      }
    }
    if ((e.omega - e.omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + e.omega.cwiseAbs().maxCoeff())) {
      out.push_back(name + ": information matrix not symmetric");
    } else {
      Eigen::SelfAdjointEigenSolver<Mat7> eig(e.omega, Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > 0.0)) out.push_back(name + ": information matrix not positive definite");
    }
  }

  if (nodes.size() > 1) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (degree[k] == 0) out.push_back("node " + to_string(nodes[k].key) + " is isolated");
    }
    // Views must form one component under pose edges.
    const std::vector<int> views = graph.views();
    std::map<int, int> parent;
    for (int v : views) parent[v] = v;
    auto root = [&parent](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (const Edge& e : edges) {
      if (e.kind != EdgeKind::kPose) continue;
      if (!graph.find(e.from) || !graph.find(e.to)) continue;
      parent[root(e.from.view)] = root(e.to.view);
    }
    std::set<int> roots;
    for (int v : views) roots.insert(root(v));
    if (roots.size() > 1) {
      out.push_back("pose edges split the views into " + std::to_string(roots.size()) + " components");
    }
  }
  return out;
}

std::size_t propagate_initial_poses(PoseGraph& graph) {
  const auto anchor = graph.anchor();
  const std::size_t n = graph.nodes().size();
  if (!anchor) return n;
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t k = 0; k < graph.edges().size(); ++k) {
    const Edge& e = graph.edges()[k];
    incident[graph.index_of(e.from)].push_back(k);
    incident[graph.index_of(e.to)].push_back(k);
  }
  std::vector<std::uint8_t> seen(n, 0);
  std::deque<std::size_t> queue{*anchor};
  seen[*anchor] = 1;
  graph.set_pose(*anchor, graph.node(*anchor).pose);
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t k : incident[cur]) {
      const Edge& e = graph.edges()[k];
      const std::size_t a = graph.index_of(e.from);
      const std::size_t b = graph.index_of(e.to);
      const std::size_t other = a == cur ? b : a;
      if (seen[other]) continue;
      const Sim3 pose = a == cur ? propagate_to(e, graph.node(cur).pose) : propagate_from(e, graph.node(cur).pose);
      graph.set_pose(other, pose);
      seen[other] = 1;
      queue.push_back(other);
    }
  }
  std::size_t unreached = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (seen[k]) continue;
    ++unreached;
    graph.set_pose(k, Sim3::identity());
    graph.set_initialized(k, false);
  }
  return unreached;
}

}  // namespace symslam
