#pragma once

#include <Eigen/Core>

namespace symslam {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat7 = Eigen::Matrix<double, 7, 7>;

// Element of the Lie algebra sim(3), ordered (rho, phi, sigma):
//   [0..2] rho   translational part
//   [3..5] phi   rotation vector, radians
//   [6]    sigma log-scale
using Tangent7 = Eigen::Matrix<double, 7, 1>;

inline Tangent7 make_tangent(const Vec3& rho, const Vec3& phi, double sigma) {
  Tangent7 xi;
  xi << rho, phi, sigma;
  return xi;
}
inline Vec3 tangent_rho(const Tangent7& xi) { return xi.head<3>(); }
inline Vec3 tangent_phi(const Tangent7& xi) { return xi.segment<3>(3); }
inline double tangent_sigma(const Tangent7& xi) { return xi[6]; }

// Similarity transform x -> s * R * x + t.
//
// Rotation is stored as a full 3x3 matrix. Quaternions appear only at the
// trajectory file boundary. The constructor checks that the scale is finite
// and positive; the rotation is trusted (see is_rotation()).
class Sim3 {
 public:
  Sim3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()), scale_(1.0) {}
  Sim3(const Mat3& rotation, const Vec3& translation, double scale = 1.0);

  static Sim3 identity() { return Sim3(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  double scale() const { return scale_; }

  // (*this)(other(x))
  Sim3 operator*(const Sim3& other) const;
  Vec3 operator*(const Vec3& point) const { return scale_ * (rotation_ * point) + translation_; }

  Sim3 inverse() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
  double scale_;
};

inline Sim3 compose(const Sim3& a, const Sim3& b) { return a * b; }
inline Sim3 inverse(const Sim3& g) { return g.inverse(); }
inline Vec3 act(const Sim3& g, const Vec3& p) { return g * p; }

// Largest rotation angle log_sim3 accepts; beyond it the logarithm throws
// RotationNearPi.
inline constexpr double kMaxLogAngle = 3.14159265358979323846 - 1e-6;

Mat3 hat(const Vec3& v);
Vec3 vee(const Mat3& m);

Mat3 exp_so3(const Vec3& phi);
// Rotation vector of R. Throws RotationNearPi above kMaxLogAngle.
Vec3 log_so3(const Mat3& rotation);
// Geodesic angle in [0, pi].
double rotation_angle(const Mat3& rotation);
bool is_rotation(const Mat3& m, double tol = 1e-9);

Sim3 exp_sim3(const Tangent7& xi);
Tangent7 log_sim3(const Sim3& g);

// Coupling matrix V(phi, sigma) with translation = V * rho in exp_sim3.
Mat3 sim3_v_matrix(const Vec3& phi, double sigma);

// Adjoint representation: exp(Ad_g xi) = g exp(xi) g^-1.
Mat7 adjoint(const Sim3& g);
// Lie bracket matrix: ad(x) * y = [x, y].
Mat7 lie_bracket_matrix(const Tangent7& xi);
// Right Jacobian: exp(xi + d) ~= exp(xi) exp(Jr(xi) d).
Mat7 right_jacobian(const Tangent7& xi);
// log(exp(xi) exp(d)) ~= xi + Jr^-1(xi) d.
Mat7 right_jacobian_inverse(const Tangent7& xi);

// Max absolute entry-wise difference between two elements (rotation,
// translation and scale compared separately).
double max_abs_difference(const Sim3& a, const Sim3& b);

}  // namespace symslam
