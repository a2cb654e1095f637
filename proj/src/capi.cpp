#include "symslam/symslam.h"

#include <cstring>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "symslam/errors.hpp"
#include "symslam/evaluation.hpp"
#include "symslam/experiments.hpp"
#include "symslam/optimizer.hpp"
#include "symslam/pipeline.hpp"
#include "symslam/pose_graph.hpp"
#include "symslam/scenario.hpp"

struct symslam_scenario {
  symslam::ScenarioConfig config;
};

struct symslam_graph {
  symslam::PoseGraph graph;
  std::vector<std::string> violations;
  std::string report;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SYMSLAM_OK;
  } catch (const symslam::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SYMSLAM_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SYMSLAM_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return SYMSLAM_INTERNAL_ERROR;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw symslam::Error(symslam::ErrorCode::kInvalidArgument, "capi", std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* symslam_version(void) { return "0.1.0"; }

const char* symslam_status_name(int status) {
  if (status == SYMSLAM_OK) return "Ok";
  if (status == SYMSLAM_INTERNAL_ERROR) return "InternalError";
  if (status < 1 || status > 21) return "Unknown";
  return symslam::error_code_name(static_cast<symslam::ErrorCode>(status)).data();
}

const char* symslam_last_error(void) { return g_last_error.c_str(); }

int symslam_scenario_default(symslam_scenario** out) {
  return guarded([&] {
    require(out, "out");
    *out = new symslam_scenario{};
  });
}

int symslam_scenario_load(const char* path, symslam_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new symslam_scenario{symslam::load_scenario(path)};
  });
}

int symslam_scenario_set(symslam_scenario* scenario, const char* key, const char* value) {
  return guarded([&] {
    require(scenario, "scenario");
    require(key, "key");
    require(value, "value");
    symslam::apply_override(scenario->config, key, value);
  });
}

int symslam_scenario_text(const symslam_scenario* scenario, char* buf, size_t buflen, size_t* needed) {
  return guarded([&] {
    require(scenario, "scenario");
    const std::string text = symslam::scenario_to_text(scenario->config);
    if (needed) *needed = text.size();
    if (buf && buflen > 0) {
      const size_t n = std::min(buflen - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void symslam_scenario_free(symslam_scenario* scenario) { delete scenario; }

int symslam_run(const symslam_scenario* scenario, const char* out_dir, symslam_run_summary* summary) {
  return guarded([&] {
    require(scenario, "scenario");
    const symslam::PipelineResult res = symslam::run_pipeline(scenario->config);
    if (out_dir) symslam::write_run_artifacts(res, scenario->config, out_dir);
    if (summary) {
      *summary = symslam_run_summary{};
      summary->ate_rmse = res.ate.rmse;
      summary->ate_matched = res.ate.matched;
      if (res.reconstruction) {
        summary->accuracy = res.reconstruction->accuracy;
        summary->completeness = res.reconstruction->completeness;
        summary->chamfer = res.reconstruction->chamfer;
      }
      summary->nodes = res.graph.nodes().size();
      summary->pose_edges = res.graph.count_edges(symslam::EdgeKind::kPose);
      summary->scale_edges = res.graph.count_edges(symslam::EdgeKind::kScale);
      summary->loop_edges = res.graph.count_loop_edges();
      summary->loops_accepted = res.accepted_loops();
      summary->iterations = res.total_iterations();
    }
  });
}

int symslam_eval(const char* est_path, const char* ref_path, const char* align, double tolerance, double* ate_rmse,
                 size_t* matched) {
  return guarded([&] {
    require(est_path, "est_path");
    require(ref_path, "ref_path");
    const symslam::AlignMode mode = symslam::parse_align(align ? align : "sim3");
    if (!(tolerance > 0.0)) {
      throw symslam::Error(symslam::ErrorCode::kInvalidArgument, "capi", "tolerance must be positive");
    }
    const symslam::Trajectory est = symslam::read_tum(est_path);
    const symslam::Trajectory ref = symslam::read_tum(ref_path);
    const symslam::AteResult res = symslam::ate(est, ref, mode, tolerance);
    if (ate_rmse) *ate_rmse = res.rmse;
    if (matched) *matched = res.matched;
  });
}

int symslam_ablate(const symslam_scenario* scenario, const char* variant, const uint64_t* seeds, size_t num_seeds,
                   const char* out_dir, double* median_ate) {
  return guarded([&] {
    require(scenario, "scenario");
    require(variant, "variant");
    if (num_seeds > 0) require(seeds, "seeds");
    const symslam::Variant v = symslam::parse_variant(variant);
    const std::vector<std::uint64_t> list(seeds, seeds + num_seeds);
    const symslam::AblationResult res = symslam::run_ablation(scenario->config, v, list);
    if (out_dir) symslam::emit_plot_data({res}, out_dir);
    if (median_ate) *median_ate = res.summary.median;
  });
}

int symslam_ablate_variants(const symslam_scenario* scenario, const char* const* variants, size_t num_variants,
                            const uint64_t* seeds, size_t num_seeds, const char* out_dir, double* median_ates) {
  return guarded([&] {
    require(scenario, "scenario");
    if (num_variants > 0) require(variants, "variants");
    if (num_seeds > 0) require(seeds, "seeds");
    // Parse every name before running anything.
    std::vector<symslam::Variant> vs;
    for (size_t k = 0; k < num_variants; ++k) {
      require(variants[k], "variant");
      vs.push_back(symslam::parse_variant(variants[k]));
    }
    const std::vector<std::uint64_t> list(seeds, seeds + num_seeds);
    std::vector<symslam::AblationResult> results;
    for (symslam::Variant v : vs) results.push_back(symslam::run_ablation(scenario->config, v, list));
    if (out_dir) symslam::emit_plot_data(results, out_dir);
    if (median_ates) {
      for (size_t k = 0; k < results.size(); ++k) median_ates[k] = results[k].summary.median;
    }
  });
}

int symslam_graph_load(const char* path, symslam_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new symslam_graph{symslam::load_graph_file(path), {}, {}};
  });
}

int symslam_graph_save(const symslam_graph* graph, const char* path) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    symslam::save_graph_file(graph->graph, path);
  });
}

size_t symslam_graph_num_nodes(const symslam_graph* graph) { return graph ? graph->graph.nodes().size() : 0; }

size_t symslam_graph_num_edges(const symslam_graph* graph) { return graph ? graph->graph.edges().size() : 0; }

int symslam_graph_validate(symslam_graph* graph, size_t* num_violations) {
  return guarded([&] {
    require(graph, "graph");
    graph->violations = symslam::validate(graph->graph);
    if (num_violations) *num_violations = graph->violations.size();
  });
}

const char* symslam_graph_violation(const symslam_graph* graph, size_t index) {
  if (!graph || index >= graph->violations.size()) return nullptr;
  return graph->violations[index].c_str();
}

int symslam_graph_optimize(symslam_graph* graph, int max_iterations, symslam_optimize_summary* summary) {
  return guarded([&] {
    require(graph, "graph");
    symslam::LMConfig cfg;
    if (max_iterations > 0) cfg.max_iterations = max_iterations;
    const symslam::OptimizeReport rep = symslam::optimize(graph->graph, cfg);
    std::ostringstream os;
    symslam::write_report(rep, os);
    graph->report = os.str();
    if (summary) {
      summary->iterations = rep.iterations;
      summary->initial_cost = rep.initial_cost;
      summary->final_cost = rep.final_cost;
      summary->termination = symslam::termination_name(rep.termination).data();
    }
  });
}

const char* symslam_graph_report(const symslam_graph* graph) { return graph ? graph->report.c_str() : ""; }

void symslam_graph_free(symslam_graph* graph) { delete graph; }

}  // extern "C"
