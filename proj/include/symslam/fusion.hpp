#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "symslam/frontend_sim.hpp"
#include "symslam/pose_graph.hpp"

namespace symslam {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> confidence;
  std::vector<int> view_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// How a pass's pointmap confidence is summarized when picking the pass that
// represents a view.
enum class ConfidenceReduction { kMean, kSum, kMax };

std::string_view reduction_name(ConfidenceReduction r);
ConfidenceReduction parse_reduction(std::string_view name);

double summarize_confidence(const LocalPointmap& pm, ConfidenceReduction reduction);

// For every view, keeps the single pass whose pointmap has the largest
// summary confidence (earliest pass on ties) and maps its valid points into
// the world with the pose of the node that pass produced. Collapsed graphs
// (one node per view) use that node for every pass. Output is ordered by view
// id, then pixel index.
PointCloud fuse(const PoseGraph& graph, const std::vector<PairMeasurement>& measurements,
                ConfidenceReduction reduction = ConfidenceReduction::kMean);

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Vertex element with double x, y, z, confidence and int view_id.
void write_ply(const PointCloud& cloud, const std::string& path, PlyFormat format = PlyFormat::kBinaryLittleEndian);
PointCloud read_ply(const std::string& path);

}  // namespace symslam
