#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "symslam/errors.hpp"
#include "symslam/frontend_sim.hpp"
#include "symslam/scale_solver.hpp"
#include "symslam/scenario.hpp"
#include "test_util.hpp"

namespace symslam {
namespace {

NoiseModel zero_noise(std::uint64_t seed = 0) {
  NoiseModel n;
  n.seed = seed;
  return n;
}

bool same_bits(const Sim3& a, const Sim3& b) {
  return std::memcmp(a.rotation().data(), b.rotation().data(), 9 * sizeof(double)) == 0 &&
         std::memcmp(a.translation().data(), b.translation().data(), 3 * sizeof(double)) == 0 &&
         a.scale() == b.scale();
}

TEST(GenerateScene, DeterministicPerSeed) {
  const Scene a = generate_scene(ScenePreset::kCircle, 100, 400, 0);
  const Scene b = generate_scene(ScenePreset::kCircle, 100, 400, 0);
  ASSERT_EQ(a.landmarks.size(), b.landmarks.size());
  for (std::size_t k = 0; k < a.landmarks.size(); ++k) {
    EXPECT_EQ(std::memcmp(a.landmarks[k].data(), b.landmarks[k].data(), 3 * sizeof(double)), 0);
  }
  ASSERT_EQ(a.num_views(), b.num_views());
  for (int v = 0; v < a.num_views(); ++v) {
    EXPECT_TRUE(same_bits(a.views[v].world_from_camera, b.views[v].world_from_camera));
    EXPECT_EQ(a.views[v].visible, b.views[v].visible);
  }
  const Scene c = generate_scene(ScenePreset::kCircle, 100, 400, 1);
  EXPECT_NE(c.landmarks[0], a.landmarks[0]);
}

TEST(GenerateScene, StructuralInvariants) {
  for (ScenePreset p : {ScenePreset::kCircle, ScenePreset::kFigureEight, ScenePreset::kCorridor,
                        ScenePreset::kRandomWalk}) {
    const Scene s = generate_scene(p, 40, 1500, 3);
    ASSERT_EQ(s.num_views(), 40) << preset_name(p);
    for (int v = 0; v < s.num_views(); ++v) {
      EXPECT_EQ(s.views[v].id, v);
      EXPECT_GE(s.views[v].visible.size(), 8u);
      EXPECT_TRUE(is_rotation(s.views[v].world_from_camera.rotation()));
      if (v > 0) {
        EXPECT_GT(s.views[v].timestamp, s.views[v - 1].timestamp);
      }
    }
    EXPECT_EQ(parse_preset(preset_name(p)), p);
  }
}

TEST(GenerateScene, CircleClosesOnItself) {
  for (int n : {20, 60, 100}) {
    const Scene s = generate_scene(ScenePreset::kCircle, n, 400, 2);
    const Vec3 first = s.views.front().world_from_camera.translation();
    const Vec3 last = s.views.back().world_from_camera.translation();
    const double radius = first.head<2>().norm();
    EXPECT_LT((first - last).norm(), 0.05 * 2.0 * testing::kPi * radius);
  }
}

TEST(GenerateScene, CorridorNeverRevisits) {
  const Scene s = generate_scene(ScenePreset::kCorridor, 80, 1500, 4);
  const LoopProximity prox;
  for (int i = 0; i < s.num_views(); ++i) {
    for (int j = i + s.num_views() / 2 + 1; j < s.num_views(); ++j) {
      EXPECT_GE((s.views[i].world_from_camera.translation() - s.views[j].world_from_camera.translation()).norm(),
                prox.max_distance);
    }
  }
  EXPECT_TRUE(propose_loops(s, zero_noise()).empty());
}

TEST(GenerateScene, RejectsTooFewLandmarks) {
  try {
    generate_scene(ScenePreset::kCircle, 10, 7, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientLandmarks);
  }
}

TEST(RelativePoseConvention, MapsCameraIIntoCameraJ) {
  const Scene s = generate_scene(ScenePreset::kCircle, 30, 400, 5);
  for (int i : {0, 3, 10}) {
    const int j = i + 1;
    const Sim3 t = true_relative_pose(s, i, j);
    const Sim3 back = true_relative_pose(s, j, i);
    EXPECT_LT(max_abs_difference(t * back, Sim3::identity()), 1e-12);
    for (int lm : covisible_landmarks(s, i, j)) {
      const Vec3 world = s.landmarks[lm];
      const Vec3 in_i = s.views[i].world_from_camera.inverse() * world;
      const Vec3 in_j = s.views[j].world_from_camera.inverse() * world;
      EXPECT_LT((t * in_i - in_j).norm(), 1e-12);
    }
  }
}

TEST(SimulatePair, ZeroNoiseIsExactAndConsistent) {
  const Scene s = generate_scene(ScenePreset::kCircle, 30, 400, 6);
  const PairMeasurement m = simulate_pair(s, 4, 6, zero_noise(), 17);
  EXPECT_EQ(m.pass_id, 17);
  EXPECT_EQ(m.injected_scale, 1.0);
  EXPECT_LT(max_abs_difference(m.relative_pose.transform, true_relative_pose(s, 4, 6)), 1e-12);
  EXPECT_DOUBLE_EQ(m.relative_pose.confidence, 1.0);
  const Correspondence corr = pair_correspondence(s, 4, 6);
  ASSERT_GE(corr.size(), 8u);
  EXPECT_LT(geometric_consistency_loss(m.pointmap_i, m.pointmap_j, m.relative_pose, corr, 1.0), 1e-9);
}

TEST(SimulatePair, DeterministicPerPass) {
  const Scene s = generate_scene(ScenePreset::kCircle, 30, 400, 7);
  const NoiseModel noise = ScenarioConfig::default_noise();
  const PairMeasurement a = simulate_pair(s, 2, 3, noise, 5);
  const PairMeasurement b = simulate_pair(s, 2, 3, noise, 5);
  EXPECT_TRUE(same_bits(a.relative_pose.transform, b.relative_pose.transform));
  EXPECT_EQ(a.relative_pose.confidence, b.relative_pose.confidence);
  for (std::size_t k = 0; k < a.pointmap_i.size(); ++k) {
    EXPECT_EQ(std::memcmp(a.pointmap_i.points[k].data(), b.pointmap_i.points[k].data(), 3 * sizeof(double)), 0);
  }
  const PairMeasurement c = simulate_pair(s, 2, 3, noise, 6);
  EXPECT_NE(a.injected_scale, c.injected_scale);
}

TEST(SimulatePair, BothPointmapsShareThePassScale) {
  const Scene s = generate_scene(ScenePreset::kCircle, 30, 400, 8);
  NoiseModel noise = zero_noise(8);
  noise.sigma_scale = 0.3;
  for (std::int64_t pass = 0; pass < 20; ++pass) {
    const PairMeasurement m = simulate_pair(s, 0, 1, noise, pass);
    const LocalPointmap gi = ground_truth_pointmap(s, 0);
    const LocalPointmap gj = ground_truth_pointmap(s, 1);
    const double ri = m.pointmap_i.points[0].norm() / gi.points[0].norm();
    const double rj = m.pointmap_j.points[0].norm() / gj.points[0].norm();
    EXPECT_NEAR(ri, m.injected_scale, 1e-12);
    EXPECT_NEAR(rj, m.injected_scale, 1e-12);
    EXPECT_NEAR(m.relative_pose.transform.translation().norm(),
                m.injected_scale * true_relative_pose(s, 0, 1).translation().norm(), 1e-12);
  }
}

TEST(SimulatePair, ScaleRatioRecoveredAcrossPasses) {
  const Scene s = generate_scene(ScenePreset::kCircle, 30, 400, 9);
  NoiseModel noise = zero_noise(9);
  noise.sigma_scale = 0.02;
  for (std::int64_t pass = 0; pass < 20; ++pass) {
    const PairMeasurement first = simulate_pair(s, 5, 4, noise, 2 * pass);
    const PairMeasurement later = simulate_pair(s, 5, 6, noise, 2 * pass + 1);
    const double want = first.injected_scale / later.injected_scale;
    EXPECT_NEAR(relative_scale(first.pointmap_i, later.pointmap_i), want, 1e-6 * want);
  }
}

TEST(SimulatePair, GrossErrorsScoreBelowThreshold) {
  const Scene s = generate_scene(ScenePreset::kCircle, 60, 400, 10);
  const NoiseModel noise = ScenarioConfig::default_noise();
  for (std::int64_t pass = 0; pass < 200; ++pass) {
    const PairMeasurement m = simulate_pair(s, 3, 40, noise, pass, PairKind::kGrossError);
    EXPECT_LT(m.relative_pose.confidence, 0.75);
  }
  int above = 0;
  for (std::int64_t pass = 0; pass < 200; ++pass) {
    above += simulate_pair(s, 0, 59, noise, pass).relative_pose.confidence > 0.75 ? 1 : 0;
  }
  EXPECT_GE(above, 190);
}

TEST(SimulatePair, RequiresOverlap) {
  const Scene s = generate_scene(ScenePreset::kCorridor, 80, 1500, 11);
  try {
    simulate_pair(s, 0, 79, zero_noise(), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientOverlap);
  }
  EXPECT_NO_THROW(simulate_pair(s, 0, 79, zero_noise(), 0, PairKind::kGrossError));
  EXPECT_THROW(simulate_pair(s, 3, 3, zero_noise(), 0), Error);
}

TEST(ConfidenceModel, DecreasesWithError) {
  const ConfidenceModel c;
  EXPECT_DOUBLE_EQ(c(0.0), 1.0);
  EXPECT_GT(c(0.01), c(0.1));
  EXPECT_GT(c(0.1), c(1.0));
  EXPECT_NEAR(c(0.5), std::exp(-1.0), 1e-15);
}

TEST(ProposeLoops, CircleHasLongRangeTrueLoops) {
  const Scene s = generate_scene(ScenePreset::kCircle, 60, 400, 12);
  const auto loops = propose_loops(s, zero_noise());
  bool long_range = false;
  for (const LoopCandidate& c : loops) {
    EXPECT_TRUE(c.is_true_loop);
    EXPECT_LT(c.view_i, c.view_j);
    long_range = long_range || (c.view_j - c.view_i > s.num_views() / 2);
  }
  EXPECT_TRUE(long_range);
}

// Each true loop independently brings one false candidate with probability
// equal to the rate; check the total over 100 seeds against binomial bounds.
TEST(ProposeLoops, FalsePositiveRateIsBinomial) {
  const Scene s = generate_scene(ScenePreset::kCircle, 120, 3000, 13);
  LoopProximity prox;
  prox.max_distance = 2.0;
  NoiseModel noise = zero_noise();
  noise.loop_false_positive_rate = 0.5;
  std::size_t trues = 0;
  std::size_t falses = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    noise.seed = seed;
    for (const LoopCandidate& c : propose_loops(s, noise, prox)) (c.is_true_loop ? trues : falses) += 1;
  }
  ASSERT_GE(trues / 100, 20u);
  const double mean = 0.5 * trues;
  const double sd = std::sqrt(trues * 0.25);
  EXPECT_NEAR(static_cast<double>(falses), mean, 4.0 * sd);
}

TEST(ObservedLandmarks, SubsetSeenByAnyView) {
  const Scene s = generate_scene(ScenePreset::kCorridor, 30, 1500, 14);
  const auto seen = observed_landmarks(s);
  EXPECT_GT(seen.size(), 0u);
  EXPECT_LE(seen.size(), s.landmarks.size());
}

}  // namespace
}  // namespace symslam
