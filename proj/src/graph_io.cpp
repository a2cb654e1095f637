#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "symslam/errors.hpp"
#include "symslam/pose_graph.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "pose_graph";
constexpr const char* kMagic = "SYMSLAM_POSE_GRAPH";
constexpr int kVersion = 1;

void write_sim3(std::ostream& out, const Sim3& g) {
  const Mat3& r = g.rotation();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out << ' ' << r(a, b);
  }
  out << ' ' << g.translation().x() << ' ' << g.translation().y() << ' ' << g.translation().z() << ' '
      << g.scale();
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::kParseError, kModule, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T read_value(std::istringstream& in, int line, const char* field) {
  T v{};
  if (!(in >> v)) parse_fail(line, std::string("expected ") + field);
  return v;
}

Sim3 read_sim3(std::istringstream& in, int line) {
  Mat3 r;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) r(a, b) = read_value<double>(in, line, "rotation entry");
  }
  Vec3 t;
  for (int a = 0; a < 3; ++a) t[a] = read_value<double>(in, line, "translation entry");
  const double s = read_value<double>(in, line, "scale");
  try {
    return Sim3(r, t, s);
  } catch (const Error& e) {
    parse_fail(line, e.what());
  }
}

NodeKey read_key(std::istringstream& in, int line) {
  NodeKey k;
  k.view = read_value<int>(in, line, "view id");
  k.paired_with = read_value<int>(in, line, "paired view id");
  return k;
}

}  // namespace

// Format, one record per line:
//   SYMSLAM_POSE_GRAPH 1
//   config N tau_p k_rho k_phi k_sigma stiffness [min_conf|-]
//   node view paired first pass_id initialized confidence R(9) t(3) s
//   edge kind from.view from.paired to.view to.paired pass_id loop meas(13) omega(28 upper)
void dump_graph(const PoseGraph& graph, std::ostream& out) {
  const auto old_precision = out.precision(17);
  const GraphConfig& c = graph.config();
  out << kMagic << ' ' << kVersion << '\n';
  out << "config " << c.neighbor_radius << ' ' << c.tau_p << ' ' << c.omega.kappa_rho << ' '
      << c.omega.kappa_phi << ' ' << c.omega.kappa_sigma << ' ' << c.omega.scale_edge_stiffness << ' ';
  if (c.scale_min_confidence) {
    out << *c.scale_min_confidence;
  } else {
    out << '-';
  }
  out << '\n';
  for (const Node& n : graph.nodes()) {
    out << "node " << n.key.view << ' ' << n.key.paired_with << ' ' << (n.is_first_processed ? 1 : 0) << ' '
        << n.pass_id << ' ' << (n.initialized ? 1 : 0) << ' ' << n.pointmap_confidence;
    write_sim3(out, n.pose);
    out << '\n';
  }
  for (const Edge& e : graph.edges()) {
    out << "edge " << (e.kind == EdgeKind::kPose ? "pose" : "scale") << ' ' << e.from.view << ' '
        << e.from.paired_with << ' ' << e.to.view << ' ' << e.to.paired_with << ' ' << e.pass_id << ' '
        << (e.is_loop ? 1 : 0);
    write_sim3(out, e.measurement);
    for (int a = 0; a < 7; ++a) {
      for (int b = a; b < 7; ++b) out << ' ' << e.omega(a, b);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

PoseGraph load_graph(std::istream& in) {
  int line_no = 0;

  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) parse_fail(line_no, "empty graph file");
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != kMagic) parse_fail(line_no, "missing " + std::string(kMagic) + " header");
    if (version != kVersion) parse_fail(line_no, "unsupported version " + std::to_string(version));
  }

  if (!next_line(line)) parse_fail(line_no, "missing config record");
  GraphConfig cfg;
  {
    std::istringstream cs(line);
    std::string tag;
    cs >> tag;
    if (tag != "config") parse_fail(line_no, "expected config record");
    cfg.neighbor_radius = read_value<int>(cs, line_no, "N");
    cfg.tau_p = read_value<double>(cs, line_no, "tau_p");
    cfg.omega.kappa_rho = read_value<double>(cs, line_no, "kappa_rho");
    cfg.omega.kappa_phi = read_value<double>(cs, line_no, "kappa_phi");
    cfg.omega.kappa_sigma = read_value<double>(cs, line_no, "kappa_sigma");
    cfg.omega.scale_edge_stiffness = read_value<double>(cs, line_no, "stiffness");
    const std::string min_conf = read_value<std::string>(cs, line_no, "min confidence");
    if (min_conf != "-") {
      try {
        cfg.scale_min_confidence = std::stod(min_conf);
      } catch (const std::exception&) {
        parse_fail(line_no, "bad min confidence '" + min_conf + "'");
      }
    }
  }
  PoseGraph graph = [&] {
    try {
      return PoseGraph(cfg);
    } catch (const Error& e) {
      parse_fail(line_no, e.what());
    }
  }();

  while (next_line(line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "node") {
      Node n;
      n.key = read_key(ls, line_no);
      n.is_first_processed = read_value<int>(ls, line_no, "first flag") != 0;
      n.pass_id = read_value<std::int64_t>(ls, line_no, "pass id");
      n.initialized = read_value<int>(ls, line_no, "initialized flag") != 0;
      n.pointmap_confidence = read_value<double>(ls, line_no, "confidence");
      n.pose = read_sim3(ls, line_no);
      try {
        graph.add_node(std::move(n));
      } catch (const Error& e) {
        parse_fail(line_no, e.what());
      }
    } else if (tag == "edge") {
      Edge e;
      const std::string kind = read_value<std::string>(ls, line_no, "edge kind");
      if (kind == "pose") {
        e.kind = EdgeKind::kPose;
      } else if (kind == "scale") {
        e.kind = EdgeKind::kScale;
      } else {
        parse_fail(line_no, "unknown edge kind '" + kind + "'");
      }
      e.from = read_key(ls, line_no);
      e.to = read_key(ls, line_no);
      e.pass_id = read_value<std::int64_t>(ls, line_no, "pass id");
      e.is_loop = read_value<int>(ls, line_no, "loop flag") != 0;
      e.measurement = read_sim3(ls, line_no);
      for (int a = 0; a < 7; ++a) {
        for (int b = a; b < 7; ++b) {
          e.omega(a, b) = read_value<double>(ls, line_no, "omega entry");
          e.omega(b, a) = e.omega(a, b);
        }
      }
      try {
        graph.add_edge(e);
      } catch (const Error& err) {
        parse_fail(line_no, err.what());
      }
      graph.mark_pass(e.pass_id);
    } else {
      parse_fail(line_no, "unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) parse_fail(line_no, "trailing data '" + extra + "'");
  }
  return graph;
}

void save_graph_file(const PoseGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path + " for writing");
  dump_graph(graph, out);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write to " + path + " failed");
}

PoseGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);
  return load_graph(in);
}

}  // namespace symslam
