#include "symslam/fusion.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "fusion";

struct Candidate {
  const LocalPointmap* pointmap = nullptr;
  std::size_t node = 0;
  double score = 0.0;
};

std::size_t node_for(const PoseGraph& graph, int view, int paired_with) {
  if (auto idx = graph.find({view, paired_with})) return *idx;
  if (auto idx = graph.find({view, NodeKey::kCollapsed})) return *idx;
  throw Error(ErrorCode::kMissingNode, kModule,
              "measurement references node " + to_string(NodeKey{view, paired_with}) + " absent from the graph");
}

}  // namespace

std::string_view reduction_name(ConfidenceReduction r) {
  switch (r) {
    case ConfidenceReduction::kMean: return "mean";
    case ConfidenceReduction::kSum: return "sum";
    case ConfidenceReduction::kMax: return "max";
  }
  return "mean";
}

ConfidenceReduction parse_reduction(std::string_view name) {
  if (name == "mean") return ConfidenceReduction::kMean;
  if (name == "sum") return ConfidenceReduction::kSum;
  if (name == "max") return ConfidenceReduction::kMax;
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown confidence reduction '" + std::string(name) + "'");
}

double summarize_confidence(const LocalPointmap& pm, ConfidenceReduction reduction) {
  double sum = 0.0;
  double best = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < pm.size(); ++k) {
    if (!pm.is_valid(k)) continue;
    sum += pm.confidence[k];
    best = n == 0 ? pm.confidence[k] : std::max(best, pm.confidence[k]);
    ++n;
  }
  if (n == 0) return 0.0;
  switch (reduction) {
    case ConfidenceReduction::kMean: return sum / static_cast<double>(n);
    case ConfidenceReduction::kSum: return sum;
    case ConfidenceReduction::kMax: return best;
  }
  return 0.0;
}

PointCloud fuse(const PoseGraph& graph, const std::vector<PairMeasurement>& measurements,
                ConfidenceReduction reduction) {
  std::map<int, Candidate> best;
  auto offer = [&](int view, int paired_with, const LocalPointmap& pm) {
    Candidate c{&pm, node_for(graph, view, paired_with), summarize_confidence(pm, reduction)};
    auto it = best.find(view);
    if (it == best.end() || c.score > it->second.score) best[view] = c;
  };
  for (const PairMeasurement& m : measurements) {
    offer(m.view_i, m.view_j, m.pointmap_i);
    offer(m.view_j, m.view_i, m.pointmap_j);
  }

  PointCloud cloud;
  for (const auto& [view, c] : best) {
    const Sim3& pose = graph.node(c.node).pose;
    for (std::size_t k = 0; k < c.pointmap->size(); ++k) {
      if (!c.pointmap->is_valid(k)) continue;
      cloud.points.push_back(pose * c.pointmap->points[k]);
      cloud.confidence.push_back(c.pointmap->confidence[k]);
      cloud.view_id.push_back(view);
    }
  }
  return cloud;
}

}  // namespace symslam
