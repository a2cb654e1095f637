#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "symslam/errors.hpp"
#include "symslam/evaluation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace symslam {
namespace {

using testing::Rng;

double align_objective(const Sim3& g, const std::vector<Vec3>& est, const std::vector<Vec3>& ref) {
  double sum = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) sum += (ref[k] - g * est[k]).squaredNorm();
  return sum;
}

std::vector<Vec3> random_cloud(Rng& rng, int n, double spread) {
  std::vector<Vec3> out;
  for (int k = 0; k < n; ++k) out.push_back(rng.gaussian_vec(spread));
  return out;
}

Trajectory random_trajectory(Rng& rng, int n) {
  Trajectory t;
  for (int k = 0; k < n; ++k) t.push_back({0.1 * k, Sim3(rng.rotation(), rng.gaussian_vec(3.0), 1.0)});
  return t;
}

using testing::brute_force_nn;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;  // unreachable in passing tests
}

TEST(Umeyama, IdentityOnEqualClouds) {
  Rng rng(1);
  const auto pts = random_cloud(rng, 10, 2.0);
  EXPECT_LT(max_abs_difference(umeyama_align(pts, pts, true), Sim3::identity()), 1e-12);
  EXPECT_LT(max_abs_difference(umeyama_align(pts, pts, false), Sim3::identity()), 1e-12);
}

TEST(Umeyama, RecoversKnownTransform) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto ref = random_cloud(rng, 3 + t % 20, 2.0);
    const Sim3 g = rng.sim3(3.0, 5.0, 1.5);
    std::vector<Vec3> est;
    for (const Vec3& p : ref) est.push_back(g * p);
    EXPECT_LT(max_abs_difference(umeyama_align(est, ref, true), g.inverse()), 1e-9);
    const Sim3 rigid(g.rotation(), g.translation(), 1.0);
    est.clear();
    for (const Vec3& p : ref) est.push_back(rigid * p);
    EXPECT_LT(max_abs_difference(umeyama_align(est, ref, false), rigid.inverse()), 1e-9);
  }
}

// Lower bound by sampling: no candidate, near the answer or anywhere, does better.
TEST(Umeyama, BeatsRandomCandidates) {
  Rng rng(3);
  const auto ref = random_cloud(rng, 12, 2.0);
  std::vector<Vec3> est;
  const Sim3 g = rng.sim3(3.0, 2.0, 0.5);
  for (const Vec3& p : ref) est.push_back(g * p + rng.gaussian_vec(0.3));
  for (bool with_scale : {true, false}) {
    const Sim3 best = umeyama_align(est, ref, with_scale);
    if (!with_scale) {
      EXPECT_EQ(best.scale(), 1.0);
    }
    const double f = align_objective(best, est, ref);
    for (int k = 0; k < 50000; ++k) {
      Tangent7 d = rng.tangent(0.05, 0.05, 0.05);
      if (!with_scale) d[6] = 0.0;
      const Sim3 near = best * exp_sim3(d);
      ASSERT_GE(align_objective(near, est, ref), f) << "local sample " << k;
      const Sim3 far = with_scale ? rng.sim3(3.0, 5.0, 1.0) : Sim3(rng.rotation(), rng.gaussian_vec(3.0), 1.0);
      ASSERT_GE(align_objective(far, est, ref), f) << "global sample " << k;
    }
  }
}

TEST(Umeyama, HandlesReflectionCase) {
  // A mirrored cloud must still produce a proper rotation.
  Rng rng(4);
  const auto ref = random_cloud(rng, 8, 1.0);
  std::vector<Vec3> est;
  for (const Vec3& p : ref) est.push_back(Vec3(-p.x(), p.y(), p.z()));
  const Sim3 g = umeyama_align(est, ref, true);
  EXPECT_TRUE(is_rotation(g.rotation()));
  EXPECT_GT(g.scale(), 0.0);
}

TEST(Umeyama, DegenerateInputs) {
  const std::vector<Vec3> two{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  EXPECT_EQ(code_of([&] { umeyama_align(two, two, true); }), ErrorCode::kDegenerateConfiguration);
  const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2), Vec3(-3, -3, -3)};
  EXPECT_EQ(code_of([&] { umeyama_align(line, line, true); }), ErrorCode::kDegenerateConfiguration);
  const std::vector<Vec3> same(5, Vec3(1, 2, 3));
  EXPECT_EQ(code_of([&] { umeyama_align(same, same, false); }), ErrorCode::kDegenerateConfiguration);
  const std::vector<Vec3> three{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_EQ(code_of([&] { umeyama_align(three, two, true); }), ErrorCode::kDimensionMismatch);
}

TEST(Ate, ZeroOnIdenticalTrajectories) {
  Rng rng(5);
  const Trajectory t = random_trajectory(rng, 30);
  for (AlignMode m : {AlignMode::kSim3, AlignMode::kSe3, AlignMode::kNone}) {
    EXPECT_EQ(ate_rmse(t, t, m), 0.0) << align_name(m);
  }
}

TEST(Ate, TwoPoseHandExample) {
  Trajectory ref{{0.0, Sim3::identity()}, {1.0, Sim3(Mat3::Identity(), Vec3(1, 2, 3), 1.0)}};
  Trajectory est = ref;
  est[1].pose = Sim3(Mat3::Identity(), Vec3(1.3, 2, 3), 1.0);
  const AteResult r = ate(est, ref, AlignMode::kNone);
  EXPECT_NEAR(r.rmse, 0.3 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r.matched, 2u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0], 0.0);
  EXPECT_NEAR(r.errors[1], 0.3, 1e-12);
}

TEST(Ate, ScaledCopyIsRemovedOnlyBySim3) {
  Rng rng(6);
  const Trajectory ref = random_trajectory(rng, 25);
  Trajectory est = ref;
  for (auto& p : est) p.pose = Sim3(p.pose.rotation(), 2.5 * p.pose.translation(), 1.0);
  EXPECT_LT(ate_rmse(est, ref, AlignMode::kSim3), 1e-9);
  EXPECT_GT(ate_rmse(est, ref, AlignMode::kNone), 0.1);
  EXPECT_GT(ate_rmse(est, ref, AlignMode::kSe3), 0.1);
}

TEST(Ate, Sim3AlignmentIsGaugeInvariant) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const Trajectory ref = random_trajectory(rng, 20);
    Trajectory est = ref;
    for (auto& p : est) p.pose = Sim3(p.pose.rotation(), p.pose.translation() + rng.gaussian_vec(0.2), 1.0);
    const double base = ate_rmse(est, ref, AlignMode::kSim3);
    const Sim3 g = rng.sim3(3.0, 10.0, 1.5);
    Trajectory moved = est;
    for (auto& p : moved) p.pose = g * p.pose;
    EXPECT_NEAR(ate_rmse(moved, ref, AlignMode::kSim3), base, 1e-9);
  }
}

TEST(Ate, AlignmentModesAreNested) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const Trajectory ref = random_trajectory(rng, 15);
    Trajectory est = ref;
    const Sim3 g = rng.sim3(1.0, 2.0, 0.5);
    for (auto& p : est) p.pose = Sim3(Mat3::Identity(), g * p.pose.translation() + rng.gaussian_vec(0.3), 1.0);
    const double none = ate_rmse(est, ref, AlignMode::kNone);
    const double se3 = ate_rmse(est, ref, AlignMode::kSe3);
    const double sim3 = ate_rmse(est, ref, AlignMode::kSim3);
    EXPECT_GE(sim3, 0.0);
    EXPECT_LE(sim3, se3 + 1e-12);
    EXPECT_LE(se3, none + 1e-12);
  }
}

TEST(Ate, ErrorCases) {
  Trajectory a{{0.0, Sim3::identity()}, {1.0, Sim3::identity()}};
  Trajectory b{{5.0, Sim3::identity()}, {6.0, Sim3::identity()}};
  EXPECT_EQ(code_of([&] { ate(a, b, AlignMode::kNone); }), ErrorCode::kNoAssociations);
  EXPECT_EQ(code_of([&] { ate(a, a, AlignMode::kSim3); }), ErrorCode::kDegenerateConfiguration);
  EXPECT_NO_THROW(ate(a, a, AlignMode::kNone));
  for (AlignMode m : {AlignMode::kSim3, AlignMode::kSe3, AlignMode::kNone}) EXPECT_EQ(parse_align(align_name(m)), m);
  EXPECT_THROW(parse_align("affine"), Error);
}

TEST(Associate, GreedyOneToOneWithinTolerance) {
  auto at = [](std::initializer_list<double> ts) {
    Trajectory t;
    for (double s : ts) t.push_back({s, Sim3::identity()});
    return t;
  };
  const Trajectory est = at({0.0, 0.105, 0.2, 0.5});
  const Trajectory ref = at({0.01, 0.1, 0.11, 0.45});
  const auto pairs = associate(est, ref, 0.02);
  using P = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(pairs, (std::vector<P>{{0, 0}, {1, 1}}));
  // The closest candidate wins when two estimates want the same reference.
  const auto crowded = associate(at({0.0, 0.004}), at({0.003}), 0.02);
  EXPECT_EQ(crowded, (std::vector<P>{{1, 0}}));
  EXPECT_EQ(associate(est, ref, 0.1).size(), 4u);
}

TEST(Trajectory, ChecksOrdering) {
  Trajectory t{{1.0, Sim3::identity()}, {1.0, Sim3::identity()}};
  EXPECT_THROW(check_trajectory(t), Error);
  t[1].timestamp = 2.0;
  EXPECT_NO_THROW(check_trajectory(t));
  EXPECT_EQ(positions(t).size(), 2u);
}

TEST(NearestNeighbors, MatchesBruteForceOnSmallClouds) {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const auto ref = random_cloud(rng, 1 + rng.integer(0, 499), 2.0);
    const auto query = random_cloud(rng, 1 + rng.integer(0, 499), 2.5);
    const auto got = nearest_neighbor_distances(query, ref);
    const auto want = brute_force_nn(query, ref);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
  }
}

TEST(NearestNeighbors, TreePathMatchesBruteForce) {
  Rng rng(10);
  for (int n : {2000, 3500}) {
    auto ref = random_cloud(rng, n, 2.0);
    // Duplicates and a tight cluster stress the splits.
    for (int k = 0; k < 50; ++k) ref.push_back(ref[k]);
    for (int k = 0; k < 100; ++k) ref.push_back(Vec3(5, 5, 5) + rng.gaussian_vec(1e-6));
    auto query = random_cloud(rng, 400, 3.0);
    query.push_back(ref[7]);
    query.push_back(Vec3(5, 5, 5));
    query.push_back(Vec3(100, -40, 3));
    const auto got = nearest_neighbor_distances(query, ref);
    const auto want = brute_force_nn(query, ref);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12) << k;
  }
}

TEST(NearestNeighbors, EmptyReferenceThrows) {
  EXPECT_EQ(code_of([] { nearest_neighbor_distances({Vec3::Zero()}, {}); }), ErrorCode::kEmptyCloud);
}

TEST(Reconstruction, ZeroOnIdenticalClouds) {
  Rng rng(11);
  const auto pts = random_cloud(rng, 200, 1.0);
  const auto m = reconstruction_metrics(pts, pts);
  EXPECT_EQ(m.accuracy, 0.0);
  EXPECT_EQ(m.completeness, 0.0);
  EXPECT_EQ(m.chamfer, 0.0);
}

TEST(Reconstruction, SingleOutlierHandFormula) {
  std::vector<Vec3> gt;
  for (int k = 0; k < 9; ++k) gt.push_back(Vec3(k, 0, 0));
  std::vector<Vec3> fused = gt;
  const double d = 2.5;
  fused.push_back(Vec3(4, d, 0));
  const auto m = reconstruction_metrics(fused, gt);
  EXPECT_NEAR(m.accuracy, d / std::sqrt(10.0), 1e-12);
  EXPECT_EQ(m.completeness, 0.0);
  EXPECT_NEAR(m.chamfer, 0.5 * d / std::sqrt(10.0), 1e-12);
  const auto mean = reconstruction_metrics(fused, gt, DistanceStatistic::kMean);
  EXPECT_NEAR(mean.accuracy, d / 10.0, 1e-12);
}

TEST(Reconstruction, ChamferIsSymmetric) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_cloud(rng, 50 + t, 1.0);
    const auto b = random_cloud(rng, 80, 1.2);
    const auto ab = reconstruction_metrics(a, b);
    const auto ba = reconstruction_metrics(b, a);
    EXPECT_NEAR(ab.chamfer, ba.chamfer, 1e-14);
    EXPECT_NEAR(ab.accuracy, ba.completeness, 1e-14);
    EXPECT_GE(ab.chamfer, std::min(ab.accuracy, ab.completeness));
    EXPECT_LE(ab.chamfer, std::max(ab.accuracy, ab.completeness));
  }
}

TEST(Reconstruction, EmptyCloud) {
  const std::vector<Vec3> one{Vec3::Zero()};
  EXPECT_EQ(code_of([&] { reconstruction_metrics({}, one); }), ErrorCode::kEmptyCloud);
  EXPECT_EQ(code_of([&] { reconstruction_metrics(one, {}); }), ErrorCode::kEmptyCloud);
}

TEST(Tum, RoundTrip) {
  Rng rng(13);
  const Trajectory t = random_trajectory(rng, 40);
  std::stringstream ss;
  write_tum(t, ss);
  const Trajectory back = parse_tum(ss);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(back[k].timestamp, t[k].timestamp);
    EXPECT_EQ(back[k].pose.translation(), t[k].pose.translation());
    EXPECT_LT((back[k].pose.rotation() - t[k].pose.rotation()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Tum, CommentsBlankLinesAndExtraColumns) {
  std::istringstream in(
      "# header\n"
      "\n"
      "1.0 1 2 3 0 0 0 1  # trailing comment\n"
      "   \n"
      "2.0 4 5 6 0 0 1 0 extra 7\n");
  const Trajectory t = parse_tum(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].pose.translation(), Vec3(1, 2, 3));
  EXPECT_LT((t[1].pose.rotation() - Vec3(-1, -1, 1).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

std::string parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_tum(in, "traj.txt");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    return e.what();
  }
  return "";
}

TEST(Tum, ErrorsNameTheLine) {
  std::string good;
  for (int k = 0; k < 6; ++k) good += std::to_string(k) + " 0 0 0 0 0 0 1\n";
  const std::string quat = parse_error(good + "6 0 0 0 0.5 0 0 0.5\n");
  EXPECT_NE(quat.find("traj.txt:7:"), std::string::npos) << quat;
  EXPECT_NE(quat.find("quaternion"), std::string::npos) << quat;
  EXPECT_NE(parse_error("0 0 0 0 0 0 0 1\n1 0 0 x 0 0 0 1\n").find(":2:"), std::string::npos);
  EXPECT_NE(parse_error("# c\n0 0 0 0 0 0 1\n").find(":2:"), std::string::npos);
  EXPECT_NE(parse_error("1 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n").find(":2:"), std::string::npos);
  EXPECT_NE(parse_error("0 0 0 nan 0 0 0 1\n").find(":1:"), std::string::npos);
  EXPECT_EQ(code_of([] { read_tum("/nonexistent/dir/traj.txt"); }), ErrorCode::kIoError);
}

}  // namespace
}  // namespace symslam
