#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symslam/fusion.hpp"
#include "symslam/sim3.hpp"

namespace symslam {

struct StampedPose {
  double timestamp = 0.0;  // seconds
  Sim3 pose;               // world-from-camera; the scale is not written to files
};

// Timestamps must be strictly increasing; check_trajectory() enforces it.
using Trajectory = std::vector<StampedPose>;

void check_trajectory(const Trajectory& traj);
std::vector<Vec3> positions(const Trajectory& traj);

// Least-squares g minimizing sum_k ||ref_k - g(est_k)||^2, scale fixed to 1
// when with_scale is false. Throws DegenerateConfiguration for fewer than 3
// points or collinear/coincident sets.
Sim3 umeyama_align(const std::vector<Vec3>& est, const std::vector<Vec3>& ref, bool with_scale);

enum class AlignMode { kSim3, kSe3, kNone };
std::string_view align_name(AlignMode mode);
AlignMode parse_align(std::string_view name);

// One-to-one greedy nearest-timestamp matching within `tolerance` seconds.
// Pairs are (est index, ref index), sorted by est index.
std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& est, const Trajectory& ref,
                                                           double tolerance = 0.02);

struct AteResult {
  double rmse = 0.0;
  std::size_t matched = 0;
  Sim3 alignment;                  // applied to the estimate
  std::vector<double> errors;      // per matched pair, in association order
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Throws NoAssociations when nothing matches, DegenerateConfiguration when
// alignment is requested with fewer than 3 matches.
AteResult ate(const Trajectory& est, const Trajectory& ref, AlignMode align, double tolerance = 0.02);

inline double ate_rmse(const Trajectory& est, const Trajectory& ref, AlignMode align, double tolerance = 0.02) {
  return ate(est, ref, align, tolerance).rmse;
}

// Distance from every query point to its nearest reference point. A kd-tree
// is used for references of 2000 points or more.
std::vector<double> nearest_neighbor_distances(const std::vector<Vec3>& query, const std::vector<Vec3>& reference);

enum class DistanceStatistic { kRmse, kMean };

struct ReconstructionMetrics {
  double accuracy = 0.0;      // fused -> gt
  double completeness = 0.0;  // gt -> fused
  double chamfer = 0.0;       // mean of the two
};

// Throws EmptyCloud when either cloud is empty.
ReconstructionMetrics reconstruction_metrics(const std::vector<Vec3>& fused, const std::vector<Vec3>& gt,
                                             DistanceStatistic statistic = DistanceStatistic::kRmse);

// Line format: timestamp tx ty tz qx qy qz qw. '#' starts a comment; extra
// trailing columns are ignored. Errors name the offending line.
Trajectory parse_tum(std::istream& in, const std::string& source = "<stream>");
Trajectory read_tum(const std::string& path);
void write_tum(const Trajectory& traj, std::ostream& out);
void write_tum_file(const Trajectory& traj, const std::string& path);

}  // namespace symslam
