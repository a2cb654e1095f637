#include "symslam/two_view.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "two_view_math";

void require_positive(double n, const char* what) {
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kNonPositiveNormalizer, kModule,
                std::string(what) + " must be positive, got " + std::to_string(n));
  }
}

void check_layout(const LocalPointmap& pm) {
  if (pm.points.size() != static_cast<std::size_t>(pm.width) * pm.height ||
      pm.confidence.size() != pm.points.size() || pm.valid.size() != pm.points.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "pointmap grids disagree in size");
  }
}

}  // namespace

LocalPointmap::LocalPointmap(int w, int h)
    : width(w),
      height(h),
      points(static_cast<std::size_t>(w) * h, Vec3::Zero()),
      confidence(static_cast<std::size_t>(w) * h, 1.0),
      valid(static_cast<std::size_t>(w) * h, 0) {}

std::size_t LocalPointmap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

Mat3 svd_orthogonalize(const Mat3& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kDegenerateMatrix, kModule, "matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  const int tiny = static_cast<int>((sv.array() < 1e-12).count());
  if (tiny >= 2) {
    throw Error(ErrorCode::kDegenerateMatrix, kModule,
                "rank < 2, nearest rotation is not unique");
  }
  const Mat3& u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) v.col(2) = -v.col(2);
  return u * v.transpose();
}

double pointmap_norm_factor(const LocalPointmap& pm) {
  check_layout(pm);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    if (!pm.is_valid(i)) continue;
    sum += pm.points[i].norm();
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyPointmap, kModule, "no valid pixels");
  return sum / static_cast<double>(count);
}

double pair_norm_factor(const LocalPointmap& pm_i, const LocalPointmap& pm_j) {
  check_layout(pm_i);
  check_layout(pm_j);
  double sum = 0.0;
  std::size_t count = 0;
  for (const LocalPointmap* pm : {&pm_i, &pm_j}) {
    for (std::size_t k = 0; k < pm->size(); ++k) {
      if (!pm->is_valid(k)) continue;
      sum += pm->points[k].norm();
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kEmptyPointmap, kModule, "no valid pixels in pair");
  return sum / static_cast<double>(count);
}

double pointmap_loss(const LocalPointmap& pred_i, const LocalPointmap& pred_j,
                     const LocalPointmap& gt_i, const LocalPointmap& gt_j, double alpha_point) {
  if (!pred_i.same_shape(gt_i) || !pred_j.same_shape(gt_j)) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "prediction and ground truth differ in shape");
  }
  // Ground-truth validity decides which pixels are supervised; mirror it
  // onto the predictions so both normalizers average over the same set.
  auto masked = [](const LocalPointmap& pred, const LocalPointmap& gt) {
    LocalPointmap out = pred;
    out.valid = gt.valid;
    return out;
  };
  const LocalPointmap mi = masked(pred_i, gt_i);
  const LocalPointmap mj = masked(pred_j, gt_j);
  const double n_pred = pair_norm_factor(mi, mj);
  const double n_gt = pair_norm_factor(gt_i, gt_j);

  double loss = 0.0;
  for (const auto& [pred, gt] : {std::pair{&mi, &gt_i}, std::pair{&mj, &gt_j}}) {
    for (std::size_t k = 0; k < gt->size(); ++k) {
      if (!gt->is_valid(k)) continue;
      const double w = pred->confidence[k];
      if (!(w > 0.0)) {
        throw Error(ErrorCode::kNonPositiveConfidence, kModule,
                    "confidence must be positive at supervised pixels");
      }
      const Vec3 diff = pred->points[k] / n_pred - gt->points[k] / n_gt;
      loss += (w * diff).norm() - alpha_point * std::log(w);
    }
  }
  return loss;
}

// arccos((tr(R^T R_gt) - 1) / 2), evaluated as atan2(sin, cos) so it keeps
// full precision near 0 and pi.
double rotation_loss(const Mat3& r, const Mat3& r_gt) {
  const Mat3 m = r.transpose() * r_gt;
  const double c = 0.5 * (m.trace() - 1.0);
  const double s = 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)).norm();
  return std::atan2(s, c);
}

double translation_loss(const Vec3& t, const Vec3& t_gt, double n, double n_gt) {
  require_positive(n, "n");
  require_positive(n_gt, "n_gt");
  return (t / n - t_gt / n_gt).squaredNorm();
}

double identity_loss(const RelativePose& t_ij, const RelativePose& t_ji) {
  const Mat3& r_ij = t_ij.transform.rotation();
  const Mat3& r_ji = t_ji.transform.rotation();
  const Vec3 cycle_t = r_ij * t_ji.transform.translation() + t_ij.transform.translation();
  return rotation_loss(r_ij * r_ji, Mat3::Identity()) +
         translation_loss(cycle_t, Vec3::Zero(), 1.0, 1.0);
}

double pose_loss(const RelativePose& pred, const Sim3& gt, double n, double n_gt,
                 const RelativePose& reverse_pred, double alpha_pose) {
  const double w = pred.confidence;
  if (!(w > 0.0)) {
    throw Error(ErrorCode::kZeroConfidence, kModule, "pose confidence must be in (0, 1]");
  }
  const double l_r = rotation_loss(pred.transform.rotation(), gt.rotation());
  const double l_t = translation_loss(pred.transform.translation(), gt.translation(), n, n_gt);
  const double l_id = identity_loss(pred, reverse_pred);
  return w * (l_r + l_t + l_id) - alpha_pose * std::log(w);
}

double geometric_consistency_loss(const LocalPointmap& pm_i, const LocalPointmap& pm_j,
                                  const RelativePose& t_ij, const Correspondence& corr,
                                  double n) {
  require_positive(n, "n");
  check_layout(pm_i);
  check_layout(pm_j);
  auto in_bounds = [](const LocalPointmap& pm, const Pixel& p) {
    return p.u >= 0 && p.v >= 0 && p.u < pm.width && p.v < pm.height;
  };
  double sum = 0.0;
  for (const PixelMatch& m : corr) {
    if (!in_bounds(pm_i, m.source) || !in_bounds(pm_j, m.target)) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "correspondence out of bounds");
    }
    const Vec3& p_i = pm_i.points[pm_i.index(m.source.u, m.source.v)];
    const Vec3& p_j = pm_j.points[pm_j.index(m.target.u, m.target.v)];
    sum += (t_ij.transform * p_i - p_j).norm();
  }
  return sum / n;
}

double total_loss(const LossParts& parts, const LossWeights& lambdas) {
  return lambdas.pointmap * parts.pointmap + lambdas.pose * parts.pose +
         lambdas.geometric_consistency * parts.geometric_consistency;
}

}  // namespace symslam
