#include "symslam/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <Eigen/Geometry>

#include "symslam/errors.hpp"
#include "symslam/pipeline.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "experiments";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path.string() + " for writing");
  out.precision(17);
  return out;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const std::vector<std::uint64_t>& default_seeds() {
  static const std::vector<std::uint64_t> seeds = {101, 202, 303, 404, 505, 606, 707, 808, 909, 1010,
                                                   1111, 1212, 1313, 1414, 1515, 1616, 1717, 1818, 1919, 2020};
  return seeds;
}

AblationResult run_ablation(const ScenarioConfig& scenario, Variant variant, const std::vector<std::uint64_t>& seeds,
                            unsigned threads) {
  AblationResult result;
  result.variant = variant;
  result.runs.resize(seeds.size());
  if (seeds.empty()) return result;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  Trajectory example;
  std::vector<double> example_errors;

  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        ScenarioConfig cfg = scenario;
        cfg.variant = variant;
        cfg.seed = seeds[k];
        const PipelineResult run = run_pipeline(cfg);
        SeedResult& r = result.runs[k];
        r.seed = seeds[k];
        r.ate_rmse = run.ate.rmse;
        r.loops_accepted = run.accepted_loops();
        r.false_loops_accepted = run.false_loops_accepted();
        r.iterations = run.total_iterations();
        if (k == 0) {
          example = run.estimate;
          example_errors = run.ate.errors;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<double> ates;
  for (const SeedResult& r : result.runs) ates.push_back(r.ate_rmse);
  result.summary.median = median(ates);
  double sum = 0.0;
  for (double a : ates) sum += a;
  result.summary.mean = sum / static_cast<double>(ates.size());
  result.summary.min = *std::min_element(ates.begin(), ates.end());
  result.summary.max = *std::max_element(ates.begin(), ates.end());
  result.example_trajectory = std::move(example);
  result.example_errors = std::move(example_errors);
  return result;
}

void emit_plot_data(const std::vector<AblationResult>& results, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, kModule, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);

  std::ofstream summary = open_out(root / "summary.csv");
  summary << "variant,seeds,median_ate,mean_ate,min_ate,max_ate\n";
  std::ofstream table = open_out(root / "ate_table.csv");
  table << "variant,seed,ate_rmse,loops_accepted,false_loops_accepted,iterations\n";

  for (const AblationResult& r : results) {
    const std::string name(variant_name(r.variant));
    summary << name << ',' << r.runs.size() << ',' << r.summary.median << ',' << r.summary.mean << ','
            << r.summary.min << ',' << r.summary.max << '\n';
    for (const SeedResult& s : r.runs) {
      table << name << ',' << s.seed << ',' << s.ate_rmse << ',' << s.loops_accepted << ','
            << s.false_loops_accepted << ',' << s.iterations << '\n';
    }
    std::ofstream traj = open_out(root / ("traj_" + name + ".txt"));
    traj << "# timestamp tx ty tz qx qy qz qw ate_error\n";
    for (std::size_t k = 0; k < r.example_trajectory.size(); ++k) {
      const StampedPose& p = r.example_trajectory[k];
      const Eigen::Quaterniond q(p.pose.rotation());
      const Vec3& t = p.pose.translation();
      const double err = k < r.example_errors.size() ? r.example_errors[k] : 0.0;
      traj << p.timestamp << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' '
           << q.z() << ' ' << q.w() << ' ' << err << '\n';
    }
  }
}

}  // namespace symslam
