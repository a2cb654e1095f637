#include "symslam/sim3.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

// Below this rotation angle the V-matrix coefficients are evaluated from
// their Taylor series in theta (six terms keep the truncation far below
// machine precision up to the threshold).
constexpr double kSeriesAngle = 0.1;
constexpr double kSmallAngle = 1e-6;

// M_k(sigma) = int_0^1 u^k exp(sigma u) du.
double exp_moment(int k, double sigma) {
  if (std::abs(sigma) <= 2.0) {
    double sum = 0.0;
    double power = 1.0;  // sigma^m / m!
    for (int m = 0; m < 60; ++m) {
      const double term = power / static_cast<double>(m + k + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      power *= sigma / static_cast<double>(m + 1);
    }
    return sum;
  }
  // Forward recurrence is stable enough once |sigma| > 2.
  double moment = std::expm1(sigma) / sigma;
  const double e = std::exp(sigma);
  for (int j = 1; j <= k; ++j) moment = (e - j * moment) / sigma;
  return moment;
}

// Coefficients of V = c0 I + c1 Phi + c2 Phi^2 where
//   V = int_0^1 exp(sigma u) exp(u Phi) du.
struct VCoefficients {
  double c0;
  double c1;
  double c2;
};

VCoefficients v_coefficients(double theta, double sigma) {
  VCoefficients c{};
  c.c0 = std::abs(sigma) < kSmallAngle ? 1.0 + sigma / 2.0 + sigma * sigma / 6.0
                                       : std::expm1(sigma) / sigma;
  if (theta < kSeriesAngle) {
    // sin(u t)/t = sum (-1)^k t^2k u^(2k+1)/(2k+1)!
    // (1 - cos(u t))/t^2 = sum (-1)^k t^2k u^(2k+2)/(2k+2)!
    const double t2 = theta * theta;
    double power = 1.0;
    double fact_odd = 1.0;   // (2k+1)!
    double fact_even = 2.0;  // (2k+2)!
    double sign = 1.0;
    c.c1 = 0.0;
    c.c2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      c.c1 += sign * power * exp_moment(2 * k + 1, sigma) / fact_odd;
      c.c2 += sign * power * exp_moment(2 * k + 2, sigma) / fact_even;
      power *= t2;
      sign = -sign;
      fact_odd *= static_cast<double>((2 * k + 2) * (2 * k + 3));
      fact_even *= static_cast<double>((2 * k + 3) * (2 * k + 4));
    }
    return c;
  }
  const double e = std::exp(sigma);
  const double a = e * std::sin(theta);
  const double b = e * std::cos(theta);
  const double d = theta * theta + sigma * sigma;
  // int_0^1 e^{su} sin(tu) du and int_0^1 e^{su} cos(tu) du
  const double int_sin = (sigma * a - theta * b + theta) / d;
  const double int_cos = (sigma * b + theta * a - sigma) / d;
  c.c1 = int_sin / theta;
  c.c2 = (c.c0 - int_cos) / (theta * theta);
  return c;
}

}  // namespace

Sim3::Sim3(const Mat3& rotation, const Vec3& translation, double scale)
    : rotation_(rotation), translation_(translation), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "sim3",
                "scale must be finite and positive, got " + std::to_string(scale));
  }
}

Sim3 Sim3::operator*(const Sim3& other) const {
  return Sim3(rotation_ * other.rotation_,
              scale_ * (rotation_ * other.translation_) + translation_,
              scale_ * other.scale_);
}

Sim3 Sim3::inverse() const {
  const Mat3 rt = rotation_.transpose();
  const double inv_s = 1.0 / scale_;
  return Sim3(rt, -inv_s * (rt * translation_), inv_s);
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 exp_so3(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = hat(phi);
  double a;
  double b;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    const double h = std::sin(0.5 * theta);
    b = 2.0 * h * h / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

double rotation_angle(const Mat3& rotation) {
  const double sin_part = 0.5 * vee(rotation - rotation.transpose()).norm();
  const double cos_part = 0.5 * (rotation.trace() - 1.0);
  return std::atan2(sin_part, cos_part);
}

Vec3 log_so3(const Mat3& rotation) {
  const double theta = rotation_angle(rotation);
  if (theta > kMaxLogAngle) {
    throw Error(ErrorCode::kRotationNearPi, "sim3",
                "rotation angle " + std::to_string(theta) + " too close to pi for the logarithm");
  }
  const Vec3 axis2 = vee(rotation - rotation.transpose());  // 2 sin(theta) * axis
  double factor;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    factor = 0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0);
  } else {
    factor = 0.5 * theta / std::sin(theta);
  }
  return factor * axis2;
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  return orth <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 sim3_v_matrix(const Vec3& phi, double sigma) {
  const VCoefficients c = v_coefficients(phi.norm(), sigma);
  const Mat3 k = hat(phi);
  return c.c0 * Mat3::Identity() + c.c1 * k + c.c2 * k * k;
}

Sim3 exp_sim3(const Tangent7& xi) {
  const Vec3 rho = tangent_rho(xi);
  const Vec3 phi = tangent_phi(xi);
  const double sigma = tangent_sigma(xi);
  return Sim3(exp_so3(phi), sim3_v_matrix(phi, sigma) * rho, std::exp(sigma));
}

Tangent7 log_sim3(const Sim3& g) {
  const Vec3 phi = log_so3(g.rotation());
  const double sigma = std::log(g.scale());
  const Mat3 v = sim3_v_matrix(phi, sigma);
  const Vec3 rho = v.partialPivLu().solve(g.translation());
  return make_tangent(rho, phi, sigma);
}

Mat7 adjoint(const Sim3& g) {
  const Mat3& r = g.rotation();
  const Vec3& t = g.translation();
  Mat7 a = Mat7::Zero();
  a.block<3, 3>(0, 0) = g.scale() * r;
  a.block<3, 3>(0, 3) = hat(t) * r;
  a.block<3, 1>(0, 6) = -t;
  a.block<3, 3>(3, 3) = r;
  a(6, 6) = 1.0;
  return a;
}

Mat7 lie_bracket_matrix(const Tangent7& xi) {
  const Vec3 rho = tangent_rho(xi);
  const Mat3 phi_hat = hat(tangent_phi(xi));
  const double sigma = tangent_sigma(xi);
  Mat7 m = Mat7::Zero();
  m.block<3, 3>(0, 0) = phi_hat + sigma * Mat3::Identity();
  m.block<3, 3>(0, 3) = hat(rho);
  m.block<3, 1>(0, 6) = -rho;
  m.block<3, 3>(3, 3) = phi_hat;
  return m;
}

Mat7 right_jacobian(const Tangent7& xi) {
  // Jr = sum_n (-ad)^n / (n+1)!; the series is entire, so it converges for
  // every xi. Terms are accumulated until they stop contributing.
  const Mat7 neg_ad = -lie_bracket_matrix(xi);
  Mat7 sum = Mat7::Identity();
  Mat7 term = Mat7::Identity();
  for (int n = 1; n < 200; ++n) {
    term = (term * neg_ad) / static_cast<double>(n + 1);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * (1.0 + sum.cwiseAbs().maxCoeff())) break;
  }
  return sum;
}

Mat7 right_jacobian_inverse(const Tangent7& xi) {
  return right_jacobian(xi).partialPivLu().inverse();
}

double max_abs_difference(const Sim3& a, const Sim3& b) {
  const double dr = (a.rotation() - b.rotation()).cwiseAbs().maxCoeff();
  const double dt = (a.translation() - b.translation()).cwiseAbs().maxCoeff();
  const double ds = std::abs(a.scale() - b.scale());
  return std::max({dr, dt, ds});
}

}  // namespace symslam
