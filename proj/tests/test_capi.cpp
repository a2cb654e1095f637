#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "symslam/symslam.h"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("symslam_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Scenario {
  symslam_scenario* p = nullptr;
  Scenario() { EXPECT_EQ(symslam_scenario_default(&p), SYMSLAM_OK); }
  ~Scenario() { symslam_scenario_free(p); }
};

void zero_noise(symslam_scenario* s) {
  for (const char* k : {"noise.sigma_rot_deg", "noise.sigma_trans", "noise.sigma_scale", "noise.sigma_point"}) {
    ASSERT_EQ(symslam_scenario_set(s, k, "0"), SYMSLAM_OK);
  }
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(symslam_version(), "");
  EXPECT_STREQ(symslam_status_name(SYMSLAM_OK), "Ok");
  EXPECT_STREQ(symslam_status_name(SYMSLAM_PARSE_ERROR), "ParseError");
  EXPECT_STRNE(symslam_status_name(SYMSLAM_PARSE_ERROR), symslam_status_name(SYMSLAM_IO_ERROR));
  EXPECT_STRNE(symslam_status_name(12345), "");
}

TEST(CApi, ScenarioSetAndText) {
  Scenario s;
  ASSERT_EQ(symslam_scenario_set(s.p, "graph.N", "3"), SYMSLAM_OK);
  EXPECT_EQ(symslam_scenario_set(s.p, "graph.M", "3"), SYMSLAM_INVALID_ARGUMENT);
  EXPECT_NE(std::string(symslam_last_error()).find("graph.M"), std::string::npos) << symslam_last_error();
  EXPECT_EQ(symslam_scenario_set(s.p, "variant", "nonsense"), SYMSLAM_UNKNOWN_VARIANT);
  EXPECT_EQ(symslam_scenario_set(nullptr, "seed", "1"), SYMSLAM_INVALID_ARGUMENT);

  size_t needed = 0;
  ASSERT_EQ(symslam_scenario_text(s.p, nullptr, 0, &needed), SYMSLAM_OK);
  ASSERT_GT(needed, 0u);
  std::vector<char> buf(needed + 1);
  ASSERT_EQ(symslam_scenario_text(s.p, buf.data(), buf.size(), nullptr), SYMSLAM_OK);
  const std::string text(buf.data());
  EXPECT_EQ(text.size(), needed);
  EXPECT_NE(text.find("N: 3"), std::string::npos) << text;

  // Truncated copies stay NUL-terminated.
  char small[8];
  ASSERT_EQ(symslam_scenario_text(s.p, small, sizeof small, nullptr), SYMSLAM_OK);
  EXPECT_EQ(std::string(small), text.substr(0, 7));

  // The text loads back to the same configuration.
  const fs::path dir = fresh_dir("text");
  std::ofstream(dir / "sc.yaml") << text;
  symslam_scenario* back = nullptr;
  ASSERT_EQ(symslam_scenario_load((dir / "sc.yaml").c_str(), &back), SYMSLAM_OK);
  std::vector<char> buf2(needed + 1);
  symslam_scenario_text(back, buf2.data(), buf2.size(), nullptr);
  EXPECT_EQ(std::string(buf2.data()), text);
  symslam_scenario_free(back);
}

TEST(CApi, LoadErrors) {
  symslam_scenario* s = nullptr;
  EXPECT_EQ(symslam_scenario_load("/nonexistent/sc.yaml", &s), SYMSLAM_IO_ERROR);
  EXPECT_EQ(s, nullptr);
  const fs::path dir = fresh_dir("load");
  std::ofstream(dir / "bad.yaml") << "seed: 1\ncolour: red\n";
  EXPECT_EQ(symslam_scenario_load((dir / "bad.yaml").c_str(), &s), SYMSLAM_PARSE_ERROR);
  EXPECT_NE(std::string(symslam_last_error()).find("colour"), std::string::npos);
  EXPECT_EQ(symslam_scenario_load(nullptr, &s), SYMSLAM_INVALID_ARGUMENT);
}

TEST(CApi, RunZeroNoiseWritesArtifacts) {
  Scenario s;
  zero_noise(s.p);
  const fs::path dir = fresh_dir("run");
  symslam_run_summary sum{};
  ASSERT_EQ(symslam_run(s.p, dir.c_str(), &sum), SYMSLAM_OK) << symslam_last_error();
  EXPECT_LT(sum.ate_rmse, 1e-6);
  EXPECT_EQ(sum.ate_matched, 60u);
  EXPECT_LT(sum.chamfer, 1e-6);
  EXPECT_GT(sum.loop_edges, 0u);
  EXPECT_GT(sum.loops_accepted, 0u);
  EXPECT_GE(sum.loop_edges, sum.loops_accepted);
  for (const char* f : {"traj_est.txt", "traj_gt.txt", "cloud.ply", "metrics.txt", "graph.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }

  double ate = -1.0;
  size_t matched = 0;
  ASSERT_EQ(symslam_eval((dir / "traj_est.txt").c_str(), (dir / "traj_gt.txt").c_str(), "sim3", 1e-6, &ate, &matched),
            SYMSLAM_OK);
  EXPECT_NEAR(ate, sum.ate_rmse, 1e-9);
  EXPECT_EQ(matched, 60u);
  EXPECT_EQ(symslam_eval((dir / "traj_est.txt").c_str(), (dir / "traj_gt.txt").c_str(), "affine", 1e-6, &ate, &matched),
            SYMSLAM_INVALID_ARGUMENT);

  symslam_graph* g = nullptr;
  ASSERT_EQ(symslam_graph_load((dir / "graph.txt").c_str(), &g), SYMSLAM_OK);
  EXPECT_EQ(symslam_graph_num_nodes(g), sum.nodes);
  EXPECT_EQ(symslam_graph_num_edges(g), sum.pose_edges + sum.scale_edges);
  size_t violations = 99;
  EXPECT_EQ(symslam_graph_validate(g, &violations), SYMSLAM_OK);
  EXPECT_EQ(violations, 0u);
  EXPECT_EQ(symslam_graph_violation(g, 0), nullptr);
  symslam_graph_free(g);
}

TEST(CApi, RunWithoutLoopsOrOutput) {
  Scenario s;
  ASSERT_EQ(symslam_scenario_set(s.p, "loops.enabled", "false"), SYMSLAM_OK);
  ASSERT_EQ(symslam_scenario_set(s.p, "scene.num_views", "20"), SYMSLAM_OK);
  symslam_run_summary sum{};
  ASSERT_EQ(symslam_run(s.p, nullptr, &sum), SYMSLAM_OK);
  EXPECT_EQ(sum.loop_edges, 0u);
  EXPECT_EQ(sum.ate_matched, 20u);
  EXPECT_EQ(symslam_run(s.p, nullptr, nullptr), SYMSLAM_OK);
  EXPECT_EQ(symslam_run(nullptr, nullptr, &sum), SYMSLAM_INVALID_ARGUMENT);
}

TEST(CApi, GraphOptimizeRoundTrip) {
  Scenario s;
  ASSERT_EQ(symslam_scenario_set(s.p, "optimizer.enabled", "false"), SYMSLAM_OK);
  ASSERT_EQ(symslam_scenario_set(s.p, "scene.num_views", "30"), SYMSLAM_OK);
  const fs::path dir = fresh_dir("opt");
  ASSERT_EQ(symslam_run(s.p, dir.c_str(), nullptr), SYMSLAM_OK);

  symslam_graph* g = nullptr;
  ASSERT_EQ(symslam_graph_load((dir / "graph.txt").c_str(), &g), SYMSLAM_OK);
  EXPECT_STREQ(symslam_graph_report(g), "");
  symslam_optimize_summary sum{};
  ASSERT_EQ(symslam_graph_optimize(g, 0, &sum), SYMSLAM_OK) << symslam_last_error();
  EXPECT_LE(sum.final_cost, sum.initial_cost);
  EXPECT_GE(sum.iterations, 1);
  EXPECT_LE(sum.iterations, 20);
  ASSERT_NE(sum.termination, nullptr);
  EXPECT_STRNE(sum.termination, "");
  EXPECT_STRNE(symslam_graph_report(g), "");

  const fs::path out = dir / "optimized.txt";
  ASSERT_EQ(symslam_graph_save(g, out.c_str()), SYMSLAM_OK);
  symslam_graph* g2 = nullptr;
  ASSERT_EQ(symslam_graph_load(out.c_str(), &g2), SYMSLAM_OK);
  EXPECT_EQ(symslam_graph_num_nodes(g2), symslam_graph_num_nodes(g));

  // Optimizing an optimum again does not move the cost up.
  symslam_optimize_summary again{};
  ASSERT_EQ(symslam_graph_optimize(g2, 3, &again), SYMSLAM_OK);
  EXPECT_LE(again.final_cost, sum.final_cost * (1.0 + 1e-6) + 1e-12);
  EXPECT_LE(again.iterations, 3);
  symslam_graph_free(g);
  symslam_graph_free(g2);
}

TEST(CApi, GraphErrors) {
  symslam_graph* g = nullptr;
  EXPECT_EQ(symslam_graph_load("/nonexistent/graph.txt", &g), SYMSLAM_IO_ERROR);
  const fs::path dir = fresh_dir("graph_err");
  std::ofstream(dir / "bad.txt") << "NODE 0 0 first\nEDGE banana\n";
  EXPECT_EQ(symslam_graph_load((dir / "bad.txt").c_str(), &g), SYMSLAM_PARSE_ERROR);
  EXPECT_NE(std::string(symslam_last_error()), "");
  EXPECT_EQ(symslam_graph_num_nodes(nullptr), 0u);
  symslam_graph_free(nullptr);
}

TEST(CApi, EvalMalformedNamesLine) {
  const fs::path dir = fresh_dir("eval");
  std::ofstream f(dir / "traj.txt");
  for (int k = 0; k < 6; ++k) f << k << " " << k << " 0 0 0 0 0 1\n";
  f << "6 6 0 0 0 0 zero 1\n";
  f.close();
  double ate = 0.0;
  size_t matched = 0;
  EXPECT_EQ(symslam_eval((dir / "traj.txt").c_str(), (dir / "traj.txt").c_str(), "sim3", 1e-6, &ate, &matched),
            SYMSLAM_PARSE_ERROR);
  EXPECT_NE(std::string(symslam_last_error()).find(":7"), std::string::npos) << symslam_last_error();
}

TEST(CApi, AblateWritesPlotData) {
  Scenario s;
  ASSERT_EQ(symslam_scenario_set(s.p, "scene.num_views", "30"), SYMSLAM_OK);
  const uint64_t seeds[] = {1, 2, 3};
  const fs::path dir = fresh_dir("ablate");
  double med_full = -1.0, med_chain = -1.0;
  ASSERT_EQ(symslam_ablate(s.p, "full", seeds, 3, dir.c_str(), &med_full), SYMSLAM_OK) << symslam_last_error();
  ASSERT_EQ(symslam_ablate(s.p, "no_pgo", seeds, 3, nullptr, &med_chain), SYMSLAM_OK);
  EXPECT_GT(med_full, 0.0);
  EXPECT_GT(med_chain, 0.0);
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "ate_table.csv"));
  EXPECT_TRUE(fs::exists(dir / "traj_full.txt"));
  EXPECT_EQ(symslam_ablate(s.p, "wobbly", seeds, 3, nullptr, &med_full), SYMSLAM_UNKNOWN_VARIANT);
  EXPECT_EQ(symslam_ablate(s.p, "full", nullptr, 3, nullptr, &med_full), SYMSLAM_INVALID_ARGUMENT);
}

TEST(CApi, AblateSeveralVariantsIntoOneTable) {
  Scenario s;
  ASSERT_EQ(symslam_scenario_set(s.p, "scene.num_views", "24"), SYMSLAM_OK);
  const uint64_t seeds[] = {1, 2};
  const char* names[] = {"full", "no_loops"};
  const fs::path dir = fresh_dir("ablate_many");
  double med[2] = {-1.0, -1.0};
  ASSERT_EQ(symslam_ablate_variants(s.p, names, 2, seeds, 2, dir.c_str(), med), SYMSLAM_OK) << symslam_last_error();
  double single = -1.0;
  ASSERT_EQ(symslam_ablate(s.p, "no_loops", seeds, 2, nullptr, &single), SYMSLAM_OK);
  EXPECT_EQ(med[1], single);
  EXPECT_TRUE(fs::exists(dir / "traj_full.txt"));
  EXPECT_TRUE(fs::exists(dir / "traj_no_loops.txt"));
  std::ifstream table(dir / "ate_table.csv");
  int rows = 0;
  for (std::string line; std::getline(table, line);) ++rows;
  EXPECT_EQ(rows, 1 + 2 * 2);
  const char* bad[] = {"full", "wobbly"};
  EXPECT_EQ(symslam_ablate_variants(s.p, bad, 2, seeds, 2, nullptr, nullptr), SYMSLAM_UNKNOWN_VARIANT);
}

}  // namespace
