#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. They are written from the defining formulas and do not
// call the functions they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "symslam/optimizer.hpp"
#include "symslam/two_view.hpp"
#include "test_util.hpp"

namespace symslam::testing {

// Naive oracles below work component by component on raw arrays and share
// no code with the library.

inline double naive_norm(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

inline double naive_pair_mean_norm(const std::vector<const LocalPointmap*>& maps, const std::vector<const LocalPointmap*>& masks) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    for (int v = 0; v < maps[m]->height; ++v) {
      for (int u = 0; u < maps[m]->width; ++u) {
        const int k = v * maps[m]->width + u;
        if (!masks[m]->valid[k]) continue;
        const Vec3& p = maps[m]->points[k];
        sum += naive_norm(p[0], p[1], p[2]);
        count += 1;
      }
    }
  }
  return sum / count;
}

inline double naive_pointmap_loss(const LocalPointmap& pi, const LocalPointmap& pj, const LocalPointmap& gi,
                           const LocalPointmap& gj, double alpha) {
  const double n = naive_pair_mean_norm({&pi, &pj}, {&gi, &gj});
  const double ng = naive_pair_mean_norm({&gi, &gj}, {&gi, &gj});
  double loss = 0.0;
  const LocalPointmap* preds[2] = {&pi, &pj};
  const LocalPointmap* gts[2] = {&gi, &gj};
  for (int m = 0; m < 2; ++m) {
    for (int v = 0; v < gts[m]->height; ++v) {
      for (int u = 0; u < gts[m]->width; ++u) {
        const int k = v * gts[m]->width + u;
        if (!gts[m]->valid[k]) continue;
        const double w = preds[m]->confidence[k];
        double d[3];
        for (int c = 0; c < 3; ++c) d[c] = w * (preds[m]->points[k][c] / n - gts[m]->points[k][c] / ng);
        loss += naive_norm(d[0], d[1], d[2]) - alpha * std::log(w);
      }
    }
  }
  return loss;
}

inline double naive_rotation_loss(const Mat3& r, const Mat3& g) {
  double tr = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) tr += r(b, a) * g(b, a);  // trace(r^T g)
  }
  double c = (tr - 1.0) / 2.0;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

inline double naive_translation_loss(const Vec3& t, const Vec3& tg, double n, double ng) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += (t[c] / n - tg[c] / ng) * (t[c] / n - tg[c] / ng);
  return s;
}

inline double naive_identity_loss(const Sim3& a, const Sim3& b) {
  Mat3 rr;
  Vec3 tt;
  for (int r = 0; r < 3; ++r) {
    tt[r] = a.translation()[r];
    for (int c = 0; c < 3; ++c) {
      rr(r, c) = 0.0;
      for (int k = 0; k < 3; ++k) rr(r, c) += a.rotation()(r, k) * b.rotation()(k, c);
      tt[r] += a.rotation()(r, c) * b.translation()[c];
    }
  }
  return naive_rotation_loss(rr, Mat3::Identity()) + naive_translation_loss(tt, Vec3::Zero(), 1.0, 1.0);
}

inline double naive_gc_loss(const LocalPointmap& pi, const LocalPointmap& pj, const Sim3& t, const Correspondence& corr,
                     double n) {
  double sum = 0.0;
  for (const PixelMatch& m : corr) {
    const Vec3& p = pi.points[m.source.v * pi.width + m.source.u];
    const Vec3& q = pj.points[m.target.v * pj.width + m.target.u];
    double d[3];
    for (int r = 0; r < 3; ++r) {
      d[r] = t.translation()[r] - q[r];
      for (int c = 0; c < 3; ++c) d[r] += t.rotation()(r, c) * p[c];
    }
    sum += naive_norm(d[0], d[1], d[2]);
  }
  return sum / n;
}

inline Correspondence random_correspondence(Rng& rng, int w, int h, int count) {
  Correspondence c;
  for (int k = 0; k < count; ++k) {
    c.push_back({{rng.integer(0, w - 1), rng.integer(0, h - 1)}, {rng.integer(0, w - 1), rng.integer(0, h - 1)}});
  }
  return c;
}

inline Sim3 random_rigid(Rng& rng) {
  const Sim3 g = rng.sim3();
  return Sim3(g.rotation(), g.translation(), 1.0);
}

inline double frobenius(const Mat3& a) { return std::sqrt((a.array() * a.array()).sum()); }

// Golden-section search on log(s) over [1e-3, 1e3]; the objective is a convex
// quadratic in s, hence unimodal in log(s).
inline double golden_section_scale(const LocalPointmap& a, const LocalPointmap& b, const std::vector<double>& w) {
  auto f = [&](double log_s) {
    const double s = std::exp(log_s);
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      for (int c = 0; c < 3; ++c) {
        const double d = a.points[k][c] - s * b.points[k][c];
        sum += w[k] * d * d;
      }
    }
    return sum;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(1e-3);
  double hi = std::log(1e3);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-11) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

inline LocalPointmap scaled_copy(const LocalPointmap& pm, double s) {
  LocalPointmap out = pm;
  for (auto& p : out.points) p *= s;
  return out;
}

// log(E * A^-1 * B) through 4x4 homogeneous products and the general matrix
// logarithm.
inline Tangent7 oracle_residual(const Edge& e, const Sim3& a, const Sim3& b) {
  const Mat4 m = to_matrix(e.measurement) * to_matrix(a).inverse() * to_matrix(b);
  return algebra_vector(m.log());
}

inline std::vector<double> brute_force_nn(const std::vector<Vec3>& query, const std::vector<Vec3>& ref) {
  std::vector<double> out;
  for (const Vec3& q : query) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& r : ref) best = std::min(best, (q - r).norm());
    out.push_back(best);
  }
  return out;
}

}  // namespace symslam::testing
