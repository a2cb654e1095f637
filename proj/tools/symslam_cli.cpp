// Command-line front end. Talks to the backend only through the C API.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symslam/symslam.h"

namespace {

// Failures detected in this file have already been printed.
int report_failure(int status) {
  if (*symslam_last_error()) std::fprintf(stderr, "error: %s\n", symslam_last_error());
  return status > 0 && status < 126 ? status : 1;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<double> tau_p;
  bool no_loop_closure = false;
  bool no_pgo = false;
  bool single_node = false;
  std::optional<std::string> variant;
  std::optional<std::string> optimize_mode;
  std::vector<std::string> sets;
};

void add_override_flags(CLI::App* cmd, Overrides& o, bool variant_flags) {
  cmd->add_option("--seed", o.seed, "Seed for every random draw (scene and measurements)");
  cmd->add_option("--N", o.n, "Neighbour radius N for sequential passes")->check(CLI::PositiveNumber);
  cmd->add_option("--tau-p", o.tau_p, "Loop acceptance threshold on pose confidence, in (0, 1)");
  cmd->add_flag("--no-loop-closure", o.no_loop_closure, "Ignore loop candidates");
  if (variant_flags) {
    auto* no_pgo = cmd->add_flag("--no-pgo", o.no_pgo, "Chain first measurements without optimization (variant no_pgo)");
    auto* single = cmd->add_flag("--single-node", o.single_node, "One node per view (variant single_node)");
    auto* variant = cmd->add_option("--variant", o.variant, "full | no_pgo | no_loops | single_node | no_loop_filtering");
    variant->excludes(no_pgo)->excludes(single);
    no_pgo->excludes(single);
  }
  cmd->add_option("--optimize-mode", o.optimize_mode, "batch | per-loop")
      ->check(CLI::IsMember({"batch", "per-loop"}));
  cmd->add_option("--set", o.sets, "Extra setting as section.key=value (repeatable)");
}

// Built-in defaults < scenario file < command-line flags.
int build_scenario(const std::string& path, const Overrides& o, bool variant_flags, symslam_scenario** out) {
  int st = path.empty() ? symslam_scenario_default(out) : symslam_scenario_load(path.c_str(), out);
  if (st != SYMSLAM_OK) return st;
  auto set = [&](const char* key, const std::string& value) {
    return st == SYMSLAM_OK ? (st = symslam_scenario_set(*out, key, value.c_str())) : st;
  };
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return SYMSLAM_INVALID_ARGUMENT;
    }
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (o.n) set("graph.N", std::to_string(*o.n));
  if (o.tau_p) {
    std::ostringstream os;
    os.precision(17);
    os << *o.tau_p;
    set("graph.tau_p", os.str());
  }
  if (o.no_loop_closure) set("loops.enabled", "false");
  if (o.optimize_mode) set("optimizer.mode", *o.optimize_mode);
  if (variant_flags) {
    if (o.variant) set("variant", *o.variant);
    if (o.no_pgo) set("variant", "no_pgo");
    if (o.single_node) set("variant", "single_node");
  }
  return st;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const std::uint64_t lo = std::stoull(item.substr(0, dash));
      const std::uint64_t hi = std::stoull(item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("descending seed range '" + item + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sim(3) pose-graph backend for two-view monocular SLAM on synthetic scenes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(symslam_version()));

  // run
  std::string run_scenario;
  std::string run_out;
  Overrides run_o;
  auto* run = app.add_subcommand("run", "Simulate, build and optimize the graph, fuse, and write artifacts");
  run->add_option("--scenario", run_scenario, "Scenario file (YAML); defaults apply when omitted")
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory")->required();
  add_override_flags(run, run_o, true);

  // eval
  std::string eval_est;
  std::string eval_ref;
  std::string eval_align = "sim3";
  double eval_tol = 0.02;
  auto* eval = app.add_subcommand("eval", "ATE RMSE between two trajectory files");
  eval->add_option("--est", eval_est, "Estimated trajectory (timestamp tx ty tz qx qy qz qw)")->required();
  eval->add_option("--ref", eval_ref, "Reference trajectory, same format")->required();
  eval->add_option("--align", eval_align, "sim3 | se3 | none")->check(CLI::IsMember({"sim3", "se3", "none"}));
  eval->add_option("--tolerance", eval_tol, "Timestamp association tolerance in seconds")
      ->check(CLI::PositiveNumber);

  // ablate
  std::string abl_scenario;
  std::string abl_out;
  std::vector<std::string> abl_variants;
  std::string abl_seeds;
  Overrides abl_o;
  auto* ablate = app.add_subcommand("ablate", "Run one or more variants over a seed list");
  ablate->add_option("--scenario", abl_scenario, "Scenario file (YAML)")->check(CLI::ExistingFile);
  ablate->add_option("--variant", abl_variants, "Variant to run (repeatable)")->required();
  ablate->add_option("--seeds", abl_seeds, "Comma-separated seeds or ranges, e.g. 1,2,5-9")->required();
  ablate->add_option("--out", abl_out, "Output directory for summary.csv, ate_table.csv, traj_*.txt");
  add_override_flags(ablate, abl_o, false);

  // optimize
  std::string opt_graph;
  std::string opt_out;
  int opt_iters = 0;
  auto* optimize = app.add_subcommand("optimize", "Optimize a saved pose graph file");
  optimize->add_option("--graph", opt_graph, "Graph file written by 'run'")->required()->check(CLI::ExistingFile);
  optimize->add_option("--out", opt_out, "Where to write the optimized graph");
  optimize->add_option("--max-iterations", opt_iters, "LM iteration cap (default 20)");

  // validate
  std::string val_graph;
  auto* validate = app.add_subcommand("validate", "Check the invariants of a saved pose graph");
  validate->add_option("--graph", val_graph, "Graph file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    symslam_scenario* sc = nullptr;
    int st = build_scenario(run_scenario, run_o, true, &sc);
    symslam_run_summary sum{};
    if (st == SYMSLAM_OK) st = symslam_run(sc, run_out.c_str(), &sum);
    symslam_scenario_free(sc);
    if (st != SYMSLAM_OK) return report_failure(st);
    std::printf("ate_rmse=%.9g\nchamfer=%.9g\nnodes=%zu\nloop_edges=%zu\niterations=%d\nout=%s\n", sum.ate_rmse,
                sum.chamfer, sum.nodes, sum.loop_edges, sum.iterations, run_out.c_str());
    return 0;
  }

  if (*eval) {
    double rmse = 0.0;
    size_t matched = 0;
    const int st = symslam_eval(eval_est.c_str(), eval_ref.c_str(), eval_align.c_str(), eval_tol, &rmse, &matched);
    if (st != SYMSLAM_OK) return report_failure(st);
    std::printf("ate_rmse=%.6f\nmatched=%zu\nalign=%s\n", rmse, matched, eval_align.c_str());
    return 0;
  }

  if (*ablate) {
    std::vector<std::uint64_t> seeds;
    try {
      seeds = parse_seeds(abl_seeds);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: --seeds: %s\n", e.what());
      return 1;
    }
    symslam_scenario* sc = nullptr;
    int st = build_scenario(abl_scenario, abl_o, false, &sc);
    if (st != SYMSLAM_OK) {
      symslam_scenario_free(sc);
      return report_failure(st);
    }
    std::vector<const char*> names;
    for (const std::string& v : abl_variants) names.push_back(v.c_str());
    std::vector<double> medians(names.size(), 0.0);
    st = symslam_ablate_variants(sc, names.data(), names.size(), seeds.data(), seeds.size(),
                                 abl_out.empty() ? nullptr : abl_out.c_str(), medians.data());
    if (st == SYMSLAM_OK) {
      std::printf("variant,median_ate\n");
      for (size_t k = 0; k < names.size(); ++k) std::printf("%s,%.9g\n", names[k], medians[k]);
    }
    symslam_scenario_free(sc);
    return st == SYMSLAM_OK ? 0 : report_failure(st);
  }

  if (*optimize) {
    symslam_graph* g = nullptr;
    int st = symslam_graph_load(opt_graph.c_str(), &g);
    symslam_optimize_summary sum{};
    if (st == SYMSLAM_OK) st = symslam_graph_optimize(g, opt_iters, &sum);
    if (st == SYMSLAM_OK) {
      std::fputs(symslam_graph_report(g), stdout);
      if (!opt_out.empty()) st = symslam_graph_save(g, opt_out.c_str());
    }
    symslam_graph_free(g);
    return st == SYMSLAM_OK ? 0 : report_failure(st);
  }

  if (*validate) {
    symslam_graph* g = nullptr;
    int st = symslam_graph_load(val_graph.c_str(), &g);
    size_t n = 0;
    if (st == SYMSLAM_OK) st = symslam_graph_validate(g, &n);
    if (st != SYMSLAM_OK) {
      symslam_graph_free(g);
      return report_failure(st);
    }
    for (size_t k = 0; k < n; ++k) std::printf("violation: %s\n", symslam_graph_violation(g, k));
    std::printf("nodes=%zu\nedges=%zu\nviolations=%zu\n", symslam_graph_num_nodes(g), symslam_graph_num_edges(g), n);
    symslam_graph_free(g);
    return n == 0 ? 0 : 2;
  }
  return 0;
}
