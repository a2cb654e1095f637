#include "symslam/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "pipeline";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path.string() + " for writing");
  out.precision(12);
  return out;
}

}  // namespace

std::size_t PipelineResult::accepted_loops() const {
  return static_cast<std::size_t>(std::count_if(loops.begin(), loops.end(), [](const LoopRecord& l) { return l.accepted; }));
}

std::size_t PipelineResult::false_loops_accepted() const {
  return static_cast<std::size_t>(
      std::count_if(loops.begin(), loops.end(), [](const LoopRecord& l) { return l.accepted && !l.is_true_loop; }));
}

int PipelineResult::total_iterations() const {
  int n = 0;
  for (const OptimizeReport& r : reports) n += r.iterations;
  return n;
}

Trajectory estimated_trajectory(const PoseGraph& graph, const Scene& scene) {
  Trajectory traj;
  for (const SceneView& v : scene.views) {
    auto idx = graph.first_processed(v.id);
    if (!idx) continue;
    traj.push_back({v.timestamp, graph.node(*idx).pose});
  }
  return traj;
}

Trajectory ground_truth_trajectory(const Scene& scene) {
  Trajectory traj;
  for (const SceneView& v : scene.views) traj.push_back({v.timestamp, v.world_from_camera});
  return traj;
}

PipelineResult run_pipeline(const ScenarioConfig& config) {
  config.validate();
  const Variant variant = config.variant;
  const bool collapsed = variant == Variant::kSingleNode;
  const bool optimize_graph = config.optimize && variant != Variant::kNoPgo;
  const bool use_loops = config.loop_closure && variant != Variant::kNoLoops && variant != Variant::kNoPgo;
  const bool filter_loops = variant != Variant::kNoLoopFiltering;
  const int radius = variant == Variant::kNoPgo ? 1 : config.graph.neighbor_radius;

  NoiseModel noise = config.noise;
  noise.seed = config.seed;

  PipelineResult res;
  res.scene = generate_scene(config.preset, config.num_views, config.num_landmarks, config.seed);
  res.graph = PoseGraph(config.graph);
  const Scene& scene = res.scene;
  const int num_views = scene.num_views();

  // Pass ids are fixed by position in the full schedule, so every variant
  // sees the same measurement for the same pair.
  std::vector<std::vector<int>> sequential_partners(static_cast<std::size_t>(num_views));
  std::int64_t next_pass = 0;
  std::vector<std::vector<std::int64_t>> sequential_ids(static_cast<std::size_t>(num_views));
  for (int i = 1; i < num_views; ++i) {
    for (int j = std::max(0, i - config.graph.neighbor_radius); j < i; ++j) {
      sequential_partners[static_cast<std::size_t>(i)].push_back(j);
      sequential_ids[static_cast<std::size_t>(i)].push_back(next_pass++);
    }
  }

  std::vector<LoopCandidate> candidates;
  if (use_loops) {
    candidates = propose_loops(scene, noise, config.proximity);
    std::stable_sort(candidates.begin(), candidates.end(), [](const LoopCandidate& a, const LoopCandidate& b) {
      return a.view_j != b.view_j ? a.view_j < b.view_j : a.view_i < b.view_i;
    });
  }
  const std::int64_t first_loop_pass = next_pass;

  auto ingest = [&](const PairMeasurement& m, bool is_loop) {
    if (collapsed) {
      ingest_pair_collapsed(res.graph, m, is_loop);
    } else {
      ingest_pair(res.graph, m, is_loop);
    }
    res.measurements.push_back(m);
  };

  std::size_t next_candidate = 0;
  for (int i = 1; i < num_views; ++i) {
    const auto& partners = sequential_partners[static_cast<std::size_t>(i)];
    const auto& ids = sequential_ids[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < partners.size(); ++k) {
      if (i - partners[k] > radius) continue;
      ingest(simulate_pair(scene, partners[k], i, noise, ids[k]), false);
    }
    while (next_candidate < candidates.size() && candidates[next_candidate].view_j == i) {
      const LoopCandidate& c = candidates[next_candidate];
      const std::int64_t pass = first_loop_pass + static_cast<std::int64_t>(next_candidate);
      ++next_candidate;
      LoopRecord rec{c.view_i, c.view_j, c.is_true_loop, 0.0, false};
      PairMeasurement m;
      try {
        m = simulate_pair(scene, c.view_i, c.view_j, noise, pass,
                          c.is_true_loop ? PairKind::kOverlapping : PairKind::kGrossError);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientOverlap) throw;
        res.loops.push_back(rec);
        continue;
      }
      rec.confidence = m.relative_pose.confidence;
      if (!filter_loops) {
        rec.accepted = true;
        ingest(m, true);
      } else if (collapsed) {
        rec.accepted = m.relative_pose.confidence > config.graph.tau_p;
        if (rec.accepted) ingest(m, true);
      } else {
        rec.accepted = try_close_loop(res.graph, m, config.graph.tau_p) == LoopDecision::kAccepted;
        if (rec.accepted) res.measurements.push_back(m);
      }
      res.loops.push_back(rec);
      if (rec.accepted && optimize_graph && config.optimize_mode == OptimizeMode::kPerLoop) {
        res.reports.push_back(optimize(res.graph, config.lm));
      }
    }
  }
  if (optimize_graph) res.reports.push_back(optimize(res.graph, config.lm));

  res.estimate = estimated_trajectory(res.graph, scene);
  res.ground_truth = ground_truth_trajectory(scene);
  res.ate = ate(res.estimate, res.ground_truth, AlignMode::kSim3);

  res.cloud = fuse(res.graph, res.measurements, config.fusion_reduction);
  for (Vec3& p : res.cloud.points) p = res.ate.alignment * p;
  const std::vector<Vec3> gt_points = observed_landmarks(scene);
  if (!res.cloud.empty() && !gt_points.empty()) {
    res.reconstruction = reconstruction_metrics(res.cloud.points, gt_points);
  }
  for (StampedPose& p : res.estimate) p.pose = res.ate.alignment * p.pose;
  return res;
}

void write_run_artifacts(const PipelineResult& result, const ScenarioConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, kModule, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);

  write_tum_file(result.estimate, (root / "traj_est.txt").string());
  write_tum_file(result.ground_truth, (root / "traj_gt.txt").string());
  write_ply(result.cloud, (root / "cloud.ply").string());
  save_graph_file(result.graph, (root / "graph.txt").string());

  const PoseGraph& g = result.graph;
  {
    std::ofstream out = open_out(root / "report.txt");
    out << "# run report\n";
    out << "variant=" << variant_name(config.variant) << '\n';
    out << "preset=" << preset_name(config.preset) << '\n';
    out << "seed=" << config.seed << '\n';
    out << "views=" << result.scene.num_views() << '\n';
    out << "nodes=" << g.nodes().size() << '\n';
    out << "pose_edges=" << g.count_edges(EdgeKind::kPose) << '\n';
    out << "scale_edges=" << g.count_edges(EdgeKind::kScale) << '\n';
    out << "loop_edges=" << g.count_loop_edges() << '\n';
    out << "loop_candidates=" << result.loops.size() << '\n';
    for (const LoopRecord& l : result.loops) {
      out << "loop " << l.view_i << ' ' << l.view_j << " true_loop=" << (l.is_true_loop ? 1 : 0)
          << " confidence=" << l.confidence << " accepted=" << (l.accepted ? 1 : 0) << '\n';
    }
    for (std::size_t k = 0; k < result.reports.size(); ++k) {
      out << "# optimizer call " << k + 1 << '\n';
      write_report(result.reports[k], out);
    }
  }
  {
    std::ofstream out = open_out(root / "metrics.txt");
    out << "ate_rmse=" << result.ate.rmse << '\n';
    out << "ate_matched=" << result.ate.matched << '\n';
    if (result.reconstruction) {
      out << "accuracy=" << result.reconstruction->accuracy << '\n';
      out << "completeness=" << result.reconstruction->completeness << '\n';
      out << "chamfer=" << result.reconstruction->chamfer << '\n';
    }
    out << "nodes=" << g.nodes().size() << '\n';
    out << "pose_edges=" << g.count_edges(EdgeKind::kPose) << '\n';
    out << "scale_edges=" << g.count_edges(EdgeKind::kScale) << '\n';
    out << "loop_edges=" << g.count_loop_edges() << '\n';
    out << "loops_accepted=" << result.accepted_loops() << '\n';
    out << "false_loops_accepted=" << result.false_loops_accepted() << '\n';
    out << "optimizer_calls=" << result.reports.size() << '\n';
    out << "iterations=" << result.total_iterations() << '\n';
    if (!result.reports.empty()) out << "final_cost=" << result.reports.back().final_cost << '\n';
  }
}

}  // namespace symslam
