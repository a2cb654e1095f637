#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "symslam/errors.hpp"
#include "symslam/evaluation.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "trajectory_io";
constexpr double kQuaternionNormTolerance = 1e-2;

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw Error(ErrorCode::kParseError, kModule, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Trajectory parse_tum(std::istream& in, const std::string& source) {
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v[8];
    int got = 0;
    std::string tok;
    while (got < 8 && ls >> tok) {
      try {
        std::size_t used = 0;
        v[got] = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail(source, line_no, "'" + tok + "' is not a number");
      }
      ++got;
    }
    if (got == 0) continue;
    if (got < 8) fail(source, line_no, "expected 8 columns, found " + std::to_string(got));
    for (double x : v) {
      if (!std::isfinite(x)) fail(source, line_no, "non-finite value");
    }
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    const double norm = q.norm();
    if (std::abs(norm - 1.0) > kQuaternionNormTolerance) {
      std::ostringstream msg;
      msg << "malformed quaternion, norm " << norm;
      fail(source, line_no, msg.str());
    }
    q.normalize();
    if (!traj.empty() && !(v[0] > traj.back().timestamp)) {
      fail(source, line_no, "timestamp not strictly increasing");
    }
    traj.push_back({v[0], Sim3(q.toRotationMatrix(), Vec3(v[1], v[2], v[3]), 1.0)});
  }
  return traj;
}

Trajectory read_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);
  return parse_tum(in, path);
}

void write_tum(const Trajectory& traj, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (const StampedPose& p : traj) {
    const Eigen::Quaterniond q(p.pose.rotation());
    const Vec3& t = p.pose.translation();
    out << p.timestamp << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' '
        << q.z() << ' ' << q.w() << '\n';
  }
  out.precision(old_precision);
}

void write_tum_file(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path + " for writing");
  write_tum(traj, out);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write to " + path + " failed");
}

}  // namespace symslam
