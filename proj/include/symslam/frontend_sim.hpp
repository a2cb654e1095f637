#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "symslam/sim3.hpp"
#include "symslam/two_view.hpp"

namespace symslam {

enum class ScenePreset { kCircle, kFigureEight, kCorridor, kRandomWalk };

std::string_view preset_name(ScenePreset preset);
ScenePreset parse_preset(std::string_view name);

struct SceneView {
  int id = 0;
  Sim3 world_from_camera;  // scale 1
  double timestamp = 0.0;  // seconds
  // Landmarks inside this camera's frustum, ascending. The k-th entry is
  // drawn at pixel k of the view's pointmap grid.
  std::vector<int> visible;
};

struct Scene {
  ScenePreset preset = ScenePreset::kCircle;
  std::vector<Vec3> landmarks;
  std::vector<SceneView> views;

  int num_views() const { return static_cast<int>(views.size()); }
};

// Injected error -> confidence mapping: w = exp(-error / beta).
struct ConfidenceModel {
  double beta = 0.5;
  double operator()(double injected_error) const;
};

struct NoiseModel {
  double sigma_rot = 0.0;    // radians
  double sigma_trans = 0.0;  // fraction of the pair baseline
  double sigma_scale = 0.0;  // log-normal per-pass scale jitter
  double sigma_point = 0.0;  // scene units
  double loop_false_positive_rate = 0.0;
  ConfidenceModel confidence_model;
  std::uint64_t seed = 0;

  void validate() const;
  NoiseModel scaled(double factor) const;
};

struct LoopProximity {
  double max_distance = 1.0;                 // scene units
  double max_angle = 60.0 * 3.14159265358979323846 / 180.0;  // radians
  int min_index_gap = 10;
};

enum class PairKind {
  kOverlapping,  // genuine two-view pass; views must share landmarks
  kGrossError,   // spurious pair, the relative pose carries a gross error
};

// One simulated forward pass. `relative_pose` maps camera-i coordinates to
// camera-j coordinates; its translation and both pointmaps share the pass's
// unknown scale factor.
struct PairMeasurement {
  int view_i = 0;
  int view_j = 0;
  LocalPointmap pointmap_i;
  LocalPointmap pointmap_j;
  RelativePose relative_pose;
  std::int64_t pass_id = 0;

  // Ground truth kept for evaluation; the backend never reads these.
  double injected_scale = 1.0;
  double injected_error = 0.0;
};

struct LoopCandidate {
  int view_i = 0;
  int view_j = 0;
  bool is_true_loop = false;  // evaluation only
};

Scene generate_scene(ScenePreset preset, int num_views, int num_landmarks, std::uint64_t seed);

PairMeasurement simulate_pair(const Scene& scene, int view_i, int view_j, const NoiseModel& noise,
                              std::int64_t pass_id, PairKind kind = PairKind::kOverlapping);

std::vector<LoopCandidate> propose_loops(const Scene& scene, const NoiseModel& noise,
                                         const LoopProximity& proximity = {});

// Landmarks seen by both views.
std::vector<int> covisible_landmarks(const Scene& scene, int view_i, int view_j);

// Pixel correspondences i -> j for landmarks visible in both views.
Correspondence pair_correspondence(const Scene& scene, int view_i, int view_j);

// Noise-free local pointmap of a view (unit scale, unit confidence).
LocalPointmap ground_truth_pointmap(const Scene& scene, int view);

// Ground-truth camera-j-from-camera-i transform.
Sim3 true_relative_pose(const Scene& scene, int view_i, int view_j);

// Landmarks visible from at least one view.
std::vector<Vec3> observed_landmarks(const Scene& scene);

}  // namespace symslam
