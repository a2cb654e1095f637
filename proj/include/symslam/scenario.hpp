#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "symslam/frontend_sim.hpp"
#include "symslam/fusion.hpp"
#include "symslam/optimizer.hpp"
#include "symslam/pose_graph.hpp"

namespace symslam {

enum class Variant { kFull, kNoPgo, kNoLoops, kSingleNode, kNoLoopFiltering };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);  // throws UnknownVariant

// batch: one optimization after every pass and loop has been ingested.
// per-loop: views are processed in order and the graph is re-optimized after
// every accepted loop, then once more at the end.
enum class OptimizeMode { kBatch, kPerLoop };

std::string_view optimize_mode_name(OptimizeMode m);
OptimizeMode parse_optimize_mode(std::string_view name);

struct ScenarioConfig {
  ScenePreset preset = ScenePreset::kCircle;
  int num_views = 60;
  int num_landmarks = 400;
  std::uint64_t seed = 1;

  NoiseModel noise = default_noise();
  LoopProximity proximity;
  bool loop_closure = true;

  GraphConfig graph;
  bool optimize = true;
  OptimizeMode optimize_mode = OptimizeMode::kBatch;
  LMConfig lm;

  ConfidenceReduction fusion_reduction = ConfidenceReduction::kMean;
  Variant variant = Variant::kFull;

  static NoiseModel default_noise();
  void validate() const;
};

// Nested key/value document (YAML syntax):
//
//   scene:     { preset, num_views, num_landmarks }
//   seed:      integer
//   noise:     { sigma_rot_deg, sigma_trans, sigma_scale, sigma_point,
//                loop_false_positive_rate, confidence_beta }
//   loops:     { enabled, max_distance, max_angle_deg, min_index_gap }
//   graph:     { N, tau_p, kappa_rho, kappa_phi, kappa_sigma,
//                scale_edge_stiffness, scale_min_confidence }
//   optimizer: { enabled, mode, max_iterations, initial_damping,
//                damping_up, damping_down, residual_tolerance, step_tolerance,
//                cost_change_tolerance }
//   fusion:    { reduction }
//   variant:   full | no_pgo | no_loops | single_node | no_loop_filtering
//
// Every key is optional and falls back to the defaults above. Unknown keys
// and ill-typed values raise ParseError naming the key and line.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::string& path);

// Applies one dotted override such as "graph.N" = "3" with the same key set
// and parsing rules as the file.
void apply_override(ScenarioConfig& config, const std::string& key, const std::string& value);

// Serializes back to the file syntax. Parsing the text reproduces the
// config up to degree/radian rounding of the angles.
std::string scenario_to_text(const ScenarioConfig& config);

}  // namespace symslam
