#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symslam/frontend_sim.hpp"
#include "symslam/sim3.hpp"
#include "symslam/two_view.hpp"

namespace symslam {

// Node v_i^j: view i as estimated by the forward pass whose other input was
// view j. Graphs that collapse every view to a single node use
// paired_with = kCollapsed.
struct NodeKey {
  int view = 0;
  int paired_with = 0;

  static constexpr int kCollapsed = -1;

  auto operator<=>(const NodeKey&) const = default;
};

std::string to_string(const NodeKey& key);

struct Node {
  NodeKey key;
  Sim3 pose;  // world-from-camera, with scale
  bool is_first_processed = false;
  double pointmap_confidence = 0.0;  // mean confidence of this node's pointmap
  std::int64_t pass_id = -1;
  bool initialized = true;  // false when no path to an initialized node existed
  std::shared_ptr<const LocalPointmap> pointmap;  // absent after load()
};

enum class EdgeKind { kPose, kScale };

// Residual convention: log(measurement * pose(from)^-1 * pose(to)).
// Pose edges run from v_i^j to v_j^i and carry T_ij (camera i -> camera j).
// Scale edges run from the view's first-processed node to another node of
// the same view and carry (I, 0, s) with s = 1 / relative_scale(first, other).
struct Edge {
  EdgeKind kind = EdgeKind::kPose;
  NodeKey from;
  NodeKey to;
  Sim3 measurement;
  Mat7 omega = Mat7::Identity();
  std::int64_t pass_id = -1;
  bool is_loop = false;
};

// Confidence -> information mapping.
//   pose edge:  w * diag(k_rho, k_rho, k_rho, k_phi, k_phi, k_phi, k_sigma)
//   scale edge: diag(stiff x 6, k_sigma * mass), mass = summed pixel weight
//               of the scale solve
struct OmegaModel {
  double kappa_rho = 1.0;
  double kappa_phi = 1.0;
  double kappa_sigma = 1.0;
  double scale_edge_stiffness = 1e4;

  Mat7 pose_information(double confidence) const;
  Mat7 scale_information(double mass) const;
};

struct GraphConfig {
  int neighbor_radius = 2;  // N
  double tau_p = 0.75;
  OmegaModel omega;
  std::optional<double> scale_min_confidence;

  void validate() const;
};

class PoseGraph {
 public:
  explicit PoseGraph(GraphConfig config = {});

  const GraphConfig& config() const { return config_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(std::size_t index) const { return nodes_.at(index); }

  std::optional<std::size_t> find(const NodeKey& key) const;
  std::size_t index_of(const NodeKey& key) const;  // throws MissingNode
  std::optional<std::size_t> first_processed(int view) const;
  // First-processed node of the lowest view id; held fixed as the gauge.
  std::optional<std::size_t> anchor() const;
  std::vector<int> views() const;
  std::vector<std::size_t> nodes_of_view(int view) const;

  bool has_pass(std::int64_t pass_id) const { return passes_.count(pass_id) != 0; }
  std::size_t count_edges(EdgeKind kind) const;
  std::size_t count_loop_edges() const;

  // Low-level construction; ingest_pair() and try_close_loop() are the
  // normal entry points.
  std::size_t add_node(Node node);
  void add_edge(Edge edge);
  void set_pose(std::size_t index, const Sim3& pose);
  void set_initialized(std::size_t index, bool initialized) { nodes_.at(index).initialized = initialized; }
  void mark_pass(std::int64_t pass_id) { passes_.insert(pass_id); }

  // Mutable access for validate() tests that corrupt a graph on purpose.
  Edge& mutable_edge(std::size_t index) { return edges_.at(index); }

 private:
  GraphConfig config_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<NodeKey, std::size_t> index_;
  std::map<int, std::size_t> first_;
  std::set<std::int64_t> passes_;
};

// Adds v_i^j and v_j^i (reusing them if present), one pose edge, and a scale
// edge for every new node whose view already has a first-processed node.
// New nodes are initialized from an already-placed neighbour; the very first
// node of the graph sits at identity with scale 1.
void ingest_pair(PoseGraph& graph, const PairMeasurement& m, bool is_loop = false);

// Baseline layout with one node per view, keyed {view, kCollapsed}. Every
// pass becomes a pose edge between the two view nodes; no scale edges exist,
// so disagreeing per-pass scales are averaged by the optimizer.
void ingest_pair_collapsed(PoseGraph& graph, const PairMeasurement& m, bool is_loop = false);

enum class LoopDecision { kAccepted, kRejected };

// Accepts the pair as a loop iff its pose confidence is strictly greater
// than tau_p; a rejected pair leaves the graph untouched.
LoopDecision try_close_loop(PoseGraph& graph, const PairMeasurement& m, double tau_p);

// Human-readable list of invariant violations; empty means valid.
std::vector<std::string> validate(const PoseGraph& graph);

// Breadth-first re-initialization over all edges starting from the anchor.
// Returns the number of nodes that could not be reached (left at identity
// and flagged uninitialized).
std::size_t propagate_initial_poses(PoseGraph& graph);

// Line-oriented text dump, versioned. Pointmaps are not serialized.
void dump_graph(const PoseGraph& graph, std::ostream& out);
PoseGraph load_graph(std::istream& in);
void save_graph_file(const PoseGraph& graph, const std::string& path);
PoseGraph load_graph_file(const std::string& path);

}  // namespace symslam
