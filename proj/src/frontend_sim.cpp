#include "symslam/frontend_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "frontend_sim";
constexpr double kPi = 3.14159265358979323846;

// Pinhole frustum used for visibility.
constexpr double kHalfFov = 50.0 * kPi / 180.0;
constexpr double kNearDepth = 0.3;
constexpr double kFarDepth = 15.0;
constexpr int kMinVisible = 8;

constexpr double kCircleRadius = 4.0;
constexpr double kLandmarkBallRadius = 1.5;
constexpr double kDownwardHeight = 2.5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

Vec3 gaussian3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return Vec3(x, y, z);
}

Vec3 unit_vector(std::mt19937_64& rng) {
  Vec3 v = gaussian3(rng);
  while (v.norm() < 1e-9) v = gaussian3(rng);
  return v.normalized();
}

// Camera looking along `forward` with image-down roughly along `down_hint`.
Mat3 look_rotation(const Vec3& forward, const Vec3& down_hint) {
  const Vec3 z = forward.normalized();
  const Vec3 y = (down_hint - down_hint.dot(z) * z).normalized();
  const Vec3 x = y.cross(z);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

// Downward-looking camera whose image "up" points along the heading.
Mat3 downward_rotation(const Vec3& heading) {
  const Vec3 h = Vec3(heading.x(), heading.y(), 0.0).normalized();
  return look_rotation(Vec3(0.0, 0.0, -1.0), -h);
}

bool in_frustum(const Vec3& p_cam) {
  if (p_cam.z() < kNearDepth || p_cam.z() > kFarDepth) return false;
  const double lateral = std::hypot(p_cam.x(), p_cam.y());
  return std::atan2(lateral, p_cam.z()) < kHalfFov;
}

struct PathPoint {
  Vec3 position;
  Vec3 heading;
};

std::vector<PathPoint> downward_path(ScenePreset preset, int n, std::mt19937_64& rng) {
  std::vector<PathPoint> path;
  path.reserve(static_cast<std::size_t>(n));
  const double denom = std::max(1, n - 1);
  switch (preset) {
    case ScenePreset::kFigureEight: {
      // Gerono lemniscate, traversed once; the sweep stops just short of
      // 2 pi so the last view lands next to the first.
      const double a = 5.0;
      for (int k = 0; k < n; ++k) {
        const double u = 2.0 * kPi * 0.98 * k / denom;
        const Vec3 p(a * std::sin(u), a * std::sin(u) * std::cos(u), kDownwardHeight);
        const Vec3 d(a * std::cos(u), a * std::cos(2.0 * u), 0.0);
        path.push_back({p, d.normalized()});
      }
      break;
    }
    case ScenePreset::kCorridor: {
      const double spacing = 0.25;
      for (int k = 0; k < n; ++k) {
        const double x = spacing * k;
        const Vec3 p(x, 0.1 * std::sin(0.5 * x), kDownwardHeight);
        const Vec3 d(1.0, 0.05 * std::cos(0.5 * x), 0.0);
        path.push_back({p, d.normalized()});
      }
      break;
    }
    case ScenePreset::kRandomWalk: {
      std::normal_distribution<double> turn(0.0, 0.25);
      double heading = 0.0;
      Vec3 p(0.0, 0.0, kDownwardHeight);
      for (int k = 0; k < n; ++k) {
        const Vec3 d(std::cos(heading), std::sin(heading), 0.0);
        path.push_back({p, d});
        p += 0.3 * d;
        heading += turn(rng);
      }
      break;
    }
    case ScenePreset::kCircle:
      break;
  }
  return path;
}

void compute_visibility(Scene& scene) {
  for (SceneView& view : scene.views) {
    const Sim3 camera_from_world = view.world_from_camera.inverse();
    view.visible.clear();
    for (int k = 0; k < static_cast<int>(scene.landmarks.size()); ++k) {
      if (in_frustum(camera_from_world * scene.landmarks[static_cast<std::size_t>(k)])) {
        view.visible.push_back(k);
      }
    }
    if (static_cast<int>(view.visible.size()) < kMinVisible) {
      throw Error(ErrorCode::kInsufficientLandmarks, kModule,
                  "view " + std::to_string(view.id) + " observes only " +
                      std::to_string(view.visible.size()) + " landmarks (need 8)");
    }
  }
}

int grid_width(std::size_t n) {
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
}

Pixel pixel_of(std::size_t k, int width) {
  return Pixel{static_cast<int>(k % static_cast<std::size_t>(width)),
               static_cast<int>(k / static_cast<std::size_t>(width))};
}

LocalPointmap empty_grid_for(const SceneView& view) {
  const int w = grid_width(view.visible.size());
  const int h = static_cast<int>((view.visible.size() + static_cast<std::size_t>(w) - 1) /
                                 static_cast<std::size_t>(w));
  return LocalPointmap(w, std::max(h, 1));
}

const SceneView& view_at(const Scene& scene, int id) {
  if (id < 0 || id >= scene.num_views()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "view " + std::to_string(id) + " not in scene");
  }
  return scene.views[static_cast<std::size_t>(id)];
}

}  // namespace

std::string_view preset_name(ScenePreset preset) {
  switch (preset) {
    case ScenePreset::kCircle: return "circle";
    case ScenePreset::kFigureEight: return "figure-eight";
    case ScenePreset::kCorridor: return "corridor";
    case ScenePreset::kRandomWalk: return "random-walk";
  }
  return "circle";
}

ScenePreset parse_preset(std::string_view name) {
  if (name == "circle") return ScenePreset::kCircle;
  if (name == "figure-eight") return ScenePreset::kFigureEight;
  if (name == "corridor") return ScenePreset::kCorridor;
  if (name == "random-walk") return ScenePreset::kRandomWalk;
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown preset '" + std::string(name) + "'");
}

double ConfidenceModel::operator()(double injected_error) const {
  return std::exp(-std::max(0.0, injected_error) / beta);
}

void NoiseModel::validate() const {
  const double sigmas[] = {sigma_rot, sigma_trans, sigma_scale, sigma_point};
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "noise sigmas must be finite and >= 0");
    }
  }
  if (!(loop_false_positive_rate >= 0.0 && loop_false_positive_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "loop_false_positive_rate must be in [0, 1]");
  }
  if (!(confidence_model.beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "confidence beta must be positive");
  }
}

NoiseModel NoiseModel::scaled(double factor) const {
  NoiseModel out = *this;
  out.sigma_rot *= factor;
  out.sigma_trans *= factor;
  out.sigma_scale *= factor;
  out.sigma_point *= factor;
  return out;
}

Scene generate_scene(ScenePreset preset, int num_views, int num_landmarks, std::uint64_t seed) {
  if (num_views < 2) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "num_views must be >= 2");
  }
  if (num_landmarks < kMinVisible) {
    throw Error(ErrorCode::kInsufficientLandmarks, kModule, "num_landmarks must be >= 8");
  }
  std::mt19937_64 rng = make_rng(seed, 0x5CE7E);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scene scene;
  scene.preset = preset;
  scene.views.reserve(static_cast<std::size_t>(num_views));

  if (preset == ScenePreset::kCircle) {
    // Inward-looking ring around a ball of landmarks. The sweep covers 98%
    // of the circle so the last view sits next to the first.
    const double denom = num_views - 1;
    for (int k = 0; k < num_views; ++k) {
      const double a = 2.0 * kPi * 0.98 * k / denom;
      const double r = kCircleRadius + 0.1 * (unit(rng) - 0.5);
      const double h = 0.1 * (unit(rng) - 0.5);
      const Vec3 c(r * std::cos(a), r * std::sin(a), h);
      const Mat3 rot = look_rotation(-c, Vec3(0.0, 0.0, -1.0));
      scene.views.push_back({k, Sim3(rot, c, 1.0), 0.1 * k, {}});
    }
    scene.landmarks.reserve(static_cast<std::size_t>(num_landmarks));
    while (static_cast<int>(scene.landmarks.size()) < num_landmarks) {
      const Vec3 p(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
      if (p.norm() <= 1.0) scene.landmarks.push_back(kLandmarkBallRadius * p);
    }
  } else {
    const std::vector<PathPoint> path = downward_path(preset, num_views, rng);
    Vec3 lo = path.front().position;
    Vec3 hi = lo;
    for (int k = 0; k < num_views; ++k) {
      const PathPoint& pp = path[static_cast<std::size_t>(k)];
      lo = lo.cwiseMin(pp.position);
      hi = hi.cwiseMax(pp.position);
      scene.views.push_back({k, Sim3(downward_rotation(pp.heading), pp.position, 1.0), 0.1 * k, {}});
    }
    const double margin = 3.0;
    for (int k = 0; k < num_landmarks; ++k) {
      const double x = lo.x() - margin + (hi.x() - lo.x() + 2 * margin) * unit(rng);
      const double y = lo.y() - margin + (hi.y() - lo.y() + 2 * margin) * unit(rng);
      const double z = 0.6 * (unit(rng) - 0.5);
      scene.landmarks.emplace_back(x, y, z);
    }
  }
  compute_visibility(scene);
  return scene;
}

std::vector<int> covisible_landmarks(const Scene& scene, int view_i, int view_j) {
  const SceneView& a = view_at(scene, view_i);
  const SceneView& b = view_at(scene, view_j);
  std::vector<int> out;
  std::set_intersection(a.visible.begin(), a.visible.end(), b.visible.begin(), b.visible.end(),
                        std::back_inserter(out));
  return out;
}

Correspondence pair_correspondence(const Scene& scene, int view_i, int view_j) {
  const SceneView& a = view_at(scene, view_i);
  const SceneView& b = view_at(scene, view_j);
  const int wa = grid_width(a.visible.size());
  const int wb = grid_width(b.visible.size());
  Correspondence corr;
  std::size_t ka = 0;
  std::size_t kb = 0;
  while (ka < a.visible.size() && kb < b.visible.size()) {
    if (a.visible[ka] < b.visible[kb]) {
      ++ka;
    } else if (b.visible[kb] < a.visible[ka]) {
      ++kb;
    } else {
      corr.push_back({pixel_of(ka, wa), pixel_of(kb, wb)});
      ++ka;
      ++kb;
    }
  }
  return corr;
}

Sim3 true_relative_pose(const Scene& scene, int view_i, int view_j) {
  return view_at(scene, view_j).world_from_camera.inverse() *
         view_at(scene, view_i).world_from_camera;
}

LocalPointmap ground_truth_pointmap(const Scene& scene, int view) {
  const SceneView& sv = view_at(scene, view);
  LocalPointmap pm = empty_grid_for(sv);
  const Sim3 camera_from_world = sv.world_from_camera.inverse();
  for (std::size_t k = 0; k < sv.visible.size(); ++k) {
    pm.points[k] = camera_from_world * scene.landmarks[static_cast<std::size_t>(sv.visible[k])];
    pm.confidence[k] = 1.0;
    pm.valid[k] = 1;
  }
  return pm;
}

PairMeasurement simulate_pair(const Scene& scene, int view_i, int view_j, const NoiseModel& noise,
                              std::int64_t pass_id, PairKind kind) {
  noise.validate();
  if (view_i == view_j) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "a pair needs two distinct views");
  }
  view_at(scene, view_i);
  view_at(scene, view_j);
  if (kind == PairKind::kOverlapping) {
    const std::size_t shared = covisible_landmarks(scene, view_i, view_j).size();
    if (shared < static_cast<std::size_t>(kMinVisible)) {
      throw Error(ErrorCode::kInsufficientOverlap, kModule,
                  "views " + std::to_string(view_i) + " and " + std::to_string(view_j) +
                      " share " + std::to_string(shared) + " landmarks (need 8)");
    }
  }

  std::mt19937_64 rng = make_rng(noise.seed, static_cast<std::uint64_t>(pass_id) * 2 + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PairMeasurement m;
  m.view_i = view_i;
  m.view_j = view_j;
  m.pass_id = pass_id;
  // One scale factor per pass, shared by both pointmaps and the translation.
  m.injected_scale = std::exp(noise.sigma_scale * normal(rng));
  const double c = m.injected_scale;

  auto make_pointmap = [&](int view) {
    LocalPointmap pm = ground_truth_pointmap(scene, view);
    const double quality = 0.5 + unit(rng);  // per-view noise level in this pass
    for (std::size_t k = 0; k < pm.size(); ++k) {
      if (!pm.is_valid(k)) continue;
      const Vec3 n = gaussian3(rng);
      const double jitter = 0.9 + 0.2 * unit(rng);
      pm.points[k] = c * pm.points[k] + noise.sigma_point * quality * n;
      pm.confidence[k] = jitter / quality;
    }
    return pm;
  };
  m.pointmap_i = make_pointmap(view_i);
  m.pointmap_j = make_pointmap(view_j);

  const Sim3 truth = true_relative_pose(scene, view_i, view_j);
  const double baseline = truth.translation().norm();
  Vec3 rot_err;
  Vec3 trans_err;
  if (kind == PairKind::kGrossError) {
    std::uniform_real_distribution<double> gross(0.5, 1.5);
    rot_err = gross(rng) * unit_vector(rng);
    trans_err = gross(rng) * std::max(baseline, 1.0) * unit_vector(rng);
  } else {
    rot_err = noise.sigma_rot * gaussian3(rng);
    trans_err = noise.sigma_trans * baseline * gaussian3(rng);
  }
  const Mat3 r_meas = exp_so3(rot_err) * truth.rotation();
  const Vec3 t_meas = c * (truth.translation() + trans_err);
  m.relative_pose.transform = Sim3(r_meas, t_meas, 1.0);
  m.injected_error = rot_err.norm() + trans_err.norm() / std::max(baseline, 1e-6);
  m.relative_pose.confidence = noise.confidence_model(m.injected_error);
  return m;
}

std::vector<LoopCandidate> propose_loops(const Scene& scene, const NoiseModel& noise,
                                         const LoopProximity& proximity) {
  noise.validate();
  const int n = scene.num_views();
  auto proximate = [&](int i, int j) {
    const Sim3& a = scene.views[static_cast<std::size_t>(i)].world_from_camera;
    const Sim3& b = scene.views[static_cast<std::size_t>(j)].world_from_camera;
    const double dist = (a.translation() - b.translation()).norm();
    const double angle = rotation_angle(a.rotation().transpose() * b.rotation());
    return dist < proximity.max_distance && angle < proximity.max_angle;
  };

  std::vector<LoopCandidate> out;
  std::set<std::pair<int, int>> taken;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + proximity.min_index_gap <= j; ++i) {
      if (proximate(i, j)) {
        out.push_back({i, j, true});
        taken.insert({i, j});
      }
    }
  }

  const std::size_t true_count = out.size();
  std::mt19937_64 rng = make_rng(noise.seed, 0x100F);
  std::bernoulli_distribution inject(noise.loop_false_positive_rate);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (std::size_t k = 0; k < true_count; ++k) {
    if (!inject(rng)) continue;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      int i = pick(rng);
      int j = pick(rng);
      if (i > j) std::swap(i, j);
      if (j - i < std::max(1, proximity.min_index_gap)) continue;
      if (proximate(i, j) || taken.count({i, j}) != 0) continue;
      out.push_back({i, j, false});
      taken.insert({i, j});
      break;
    }
  }
  // Candidates surface when the later view of the pair is processed.
  std::sort(out.begin(), out.end(), [](const LoopCandidate& a, const LoopCandidate& b) {
    return std::pair(a.view_j, a.view_i) < std::pair(b.view_j, b.view_i);
  });
  return out;
}

std::vector<Vec3> observed_landmarks(const Scene& scene) {
  std::vector<std::uint8_t> seen(scene.landmarks.size(), 0);
  for (const SceneView& v : scene.views) {
    for (int k : v.visible) seen[static_cast<std::size_t>(k)] = 1;
  }
  std::vector<Vec3> out;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k] != 0) out.push_back(scene.landmarks[k]);
  }
  return out;
}

}  // namespace symslam
