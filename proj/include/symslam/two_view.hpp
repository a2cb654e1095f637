#pragma once

#include <cstdint>
#include <vector>

#include "symslam/sim3.hpp"

namespace symslam {

// Per-view grid of 3D points in local camera coordinates with a confidence
// grid and a validity mask. Storage is row-major, index = v * width + u.
struct LocalPointmap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  std::vector<double> confidence;
  std::vector<std::uint8_t> valid;

  LocalPointmap() = default;
  LocalPointmap(int w, int h);

  std::size_t size() const { return points.size(); }
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  std::size_t valid_count() const;
  bool same_shape(const LocalPointmap& other) const {
    return width == other.width && height == other.height;
  }
};

// Relative rigid transform (scale fixed to 1) with a confidence in [0, 1].
// Convention used throughout: the transform of a pair (i, j) maps points
// from camera i's frame into camera j's frame.
struct RelativePose {
  Sim3 transform;
  double confidence = 1.0;
};

struct Pixel {
  int u = 0;
  int v = 0;
};

struct PixelMatch {
  Pixel source;
  Pixel target;
};

using Correspondence = std::vector<PixelMatch>;

// Nearest rotation in Frobenius norm: U diag(1, 1, det(U V^T)) V^T.
// Throws DegenerateMatrix when two or more singular values are below 1e-12.
Mat3 svd_orthogonalize(const Mat3& m);

// Mean distance to the origin over valid pixels.
double pointmap_norm_factor(const LocalPointmap& pm);
// Same mean taken jointly over the valid pixels of both views of a pair.
double pair_norm_factor(const LocalPointmap& pm_i, const LocalPointmap& pm_j);

// Confidence-weighted pointmap regression loss over both views of a pair.
// `pred_*.confidence` supplies W; `gt_*.valid` selects supervised pixels.
// Normalizers are the pair norm factors of the predictions and of the
// ground truth respectively.
double pointmap_loss(const LocalPointmap& pred_i, const LocalPointmap& pred_j,
                     const LocalPointmap& gt_i, const LocalPointmap& gt_j,
                     double alpha_point = 0.2);

// Geodesic angle between two rotations, radians in [0, pi].
double rotation_loss(const Mat3& r, const Mat3& r_gt);

// || t / n - t_gt / n_gt ||^2
double translation_loss(const Vec3& t, const Vec3& t_gt, double n, double n_gt);

// Cycle term pushing T_ij and T_ji to be inverses of each other. Unit
// normalizers on the translation part.
double identity_loss(const RelativePose& t_ij, const RelativePose& t_ji);

// w (L_R + L_t + L_id) - alpha log w, with w the confidence of `pred`.
double pose_loss(const RelativePose& pred, const Sim3& gt, double n, double n_gt,
                 const RelativePose& reverse_pred, double alpha_pose = 0.05);

// Sum over correspondences of ||T_ij P_i(x) - P_j(C(x))|| / n.
double geometric_consistency_loss(const LocalPointmap& pm_i, const LocalPointmap& pm_j,
                                  const RelativePose& t_ij, const Correspondence& corr,
                                  double n);

struct LossParts {
  double pointmap = 0.0;
  double pose = 0.0;
  double geometric_consistency = 0.0;
};

struct LossWeights {
  double pointmap = 1.0;
  double pose = 1.0;
  double geometric_consistency = 1.0;
};

double total_loss(const LossParts& parts, const LossWeights& lambdas = {});

}  // namespace symslam
