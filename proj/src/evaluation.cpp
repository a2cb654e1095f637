#include "symslam/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "evaluation";
constexpr std::size_t kBruteForceBelow = 2000;

Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

// Rank-2 check on the centered scatter.
bool spans_plane(const std::vector<Vec3>& pts, const Vec3& mean) {
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : pts) scatter += (p - mean) * (p - mean).transpose();
  const Vec3 sv = Eigen::JacobiSVD<Mat3>(scatter).singularValues();
  return sv[0] > 1e-24 && sv[1] > 1e-10 * sv[0];
}

// Static 3-d tree over a point set, split on the widest axis at the median.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), order_(pts.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * pts.size() / kLeafSize + 1);
    build(0, order_.size());
  }

  double nearest(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, q, best);
    return std::sqrt(best);
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;
    Vec3 lo = pts_[order_[begin]];
    Vec3 hi = lo;
    for (std::size_t k = begin; k < end; ++k) {
      lo = lo.cwiseMin(pts_[order_[k]]);
      hi = hi.cwiseMax(pts_[order_[k]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<long>(begin), order_.begin() + static_cast<long>(mid),
                     order_.begin() + static_cast<long>(end),
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    const double split = pts_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, const Vec3& q, double& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t k = n.begin; k < n.end; ++k) best = std::min(best, (pts_[order_[k]] - q).squaredNorm());
      return;
    }
    const double d = q[n.axis] - n.split;
    const std::size_t near = d < 0.0 ? n.left : n.right;
    const std::size_t far = d < 0.0 ? n.right : n.left;
    search(near, q, best);
    if (d * d < best) search(far, q, best);
  }

  const std::vector<Vec3>& pts_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace

void check_trajectory(const Trajectory& traj) {
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (!(traj[k].timestamp > traj[k - 1].timestamp)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "timestamps not strictly increasing at pose " + std::to_string(k));
    }
  }
}

std::vector<Vec3> positions(const Trajectory& traj) {
  std::vector<Vec3> out;
  out.reserve(traj.size());
  for (const StampedPose& p : traj) out.push_back(p.pose.translation());
  return out;
}

Sim3 umeyama_align(const std::vector<Vec3>& est, const std::vector<Vec3>& ref, bool with_scale) {
  if (est.size() != ref.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule,
                std::to_string(est.size()) + " estimated vs " + std::to_string(ref.size()) + " reference points");
  }
  if (est.size() < 3) {
    throw Error(ErrorCode::kDegenerateConfiguration, kModule, "alignment needs at least 3 points");
  }
  const double n = static_cast<double>(est.size());
  const Vec3 mu_x = centroid(est);
  const Vec3 mu_y = centroid(ref);
  if (!spans_plane(est, mu_x) || !spans_plane(ref, mu_y)) {
    throw Error(ErrorCode::kDegenerateConfiguration, kModule, "points are collinear or coincident");
  }
  // Equal point sets: the identity attains zero exactly, the SVD only to rounding.
  if (est == ref) return Sim3::identity();
  Mat3 cov = Mat3::Zero();
  double var_x = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    cov += (ref[k] - mu_y) * (est[k] - mu_x).transpose();
    var_x += (est[k] - mu_x).squaredNorm();
  }
  cov /= n;
  var_x /= n;
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s_diag(1.0, 1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s_diag[2] = -1.0;
  const Mat3 r = svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  const double scale = with_scale ? svd.singularValues().dot(s_diag) / var_x : 1.0;
  return Sim3(r, mu_y - scale * (r * mu_x), scale);
}

std::string_view align_name(AlignMode mode) {
  switch (mode) {
    case AlignMode::kSim3: return "sim3";
    case AlignMode::kSe3: return "se3";
    case AlignMode::kNone: return "none";
  }
  return "sim3";
}

AlignMode parse_align(std::string_view name) {
  if (name == "sim3") return AlignMode::kSim3;
  if (name == "se3") return AlignMode::kSe3;
  if (name == "none") return AlignMode::kNone;
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown alignment '" + std::string(name) + "'");
}

std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& est, const Trajectory& ref,
                                                           double tolerance) {
  struct Cand {
    double dt;
    std::size_t e, r;
  };
  std::vector<Cand> cands;
  for (std::size_t e = 0; e < est.size(); ++e) {
    const double t = est[e].timestamp;
    auto lo = std::lower_bound(ref.begin(), ref.end(), t - tolerance,
                               [](const StampedPose& p, double v) { return p.timestamp < v; });
    for (auto it = lo; it != ref.end() && it->timestamp <= t + tolerance; ++it) {
      cands.push_back({std::abs(it->timestamp - t), e, static_cast<std::size_t>(it - ref.begin())});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dt < b.dt; });
  std::vector<std::uint8_t> used_e(est.size(), 0), used_r(ref.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const Cand& c : cands) {
    if (used_e[c.e] || used_r[c.r]) continue;
    used_e[c.e] = used_r[c.r] = 1;
    pairs.emplace_back(c.e, c.r);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

AteResult ate(const Trajectory& est, const Trajectory& ref, AlignMode align, double tolerance) {
  AteResult res;
  res.pairs = associate(est, ref, tolerance);
  if (res.pairs.empty()) {
    throw Error(ErrorCode::kNoAssociations, kModule,
                "no timestamps within " + std::to_string(tolerance) + " s between the trajectories");
  }
  std::vector<Vec3> p_est, p_ref;
  for (const auto& [e, r] : res.pairs) {
    p_est.push_back(est[e].pose.translation());
    p_ref.push_back(ref[r].pose.translation());
  }
  if (align != AlignMode::kNone) res.alignment = umeyama_align(p_est, p_ref, align == AlignMode::kSim3);
  double sum = 0.0;
  for (std::size_t k = 0; k < p_est.size(); ++k) {
    const double err = (res.alignment * p_est[k] - p_ref[k]).norm();
    res.errors.push_back(err);
    sum += err * err;
  }
  res.matched = p_est.size();
  res.rmse = std::sqrt(sum / static_cast<double>(res.matched));
  return res;
}

std::vector<double> nearest_neighbor_distances(const std::vector<Vec3>& query, const std::vector<Vec3>& reference) {
  if (reference.empty()) throw Error(ErrorCode::kEmptyCloud, kModule, "reference cloud is empty");
  std::vector<double> out(query.size());
  if (reference.size() < kBruteForceBelow) {
    for (std::size_t q = 0; q < query.size(); ++q) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& r : reference) best = std::min(best, (r - query[q]).squaredNorm());
      out[q] = std::sqrt(best);
    }
    return out;
  }
  const KdTree tree(reference);
  for (std::size_t q = 0; q < query.size(); ++q) out[q] = tree.nearest(query[q]);
  return out;
}

ReconstructionMetrics reconstruction_metrics(const std::vector<Vec3>& fused, const std::vector<Vec3>& gt,
                                             DistanceStatistic statistic) {
  if (fused.empty() || gt.empty()) {
    throw Error(ErrorCode::kEmptyCloud, kModule, fused.empty() ? "fused cloud is empty" : "ground-truth cloud is empty");
  }
  auto reduce = [statistic](const std::vector<double>& d) {
    double sum = 0.0;
    for (double v : d) sum += statistic == DistanceStatistic::kRmse ? v * v : v;
    const double mean = sum / static_cast<double>(d.size());
    return statistic == DistanceStatistic::kRmse ? std::sqrt(mean) : mean;
  };
  ReconstructionMetrics m;
  m.accuracy = reduce(nearest_neighbor_distances(fused, gt));
  m.completeness = reduce(nearest_neighbor_distances(gt, fused));
  m.chamfer = 0.5 * (m.accuracy + m.completeness);
  return m;
}

}  // namespace symslam
