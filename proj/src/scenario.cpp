#include "symslam/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "symslam/errors.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "scenario";
constexpr double kDeg = 3.14159265358979323846 / 180.0;

struct Field {
  const char* section;  // "" for top-level keys
  const char* key;
  std::function<void(ScenarioConfig&, const YAML::Node&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

std::string dotted(const Field& f) {
  return *f.section ? std::string(f.section) + "." + f.key : std::string(f.key);
}

template <typename T>
T as(const YAML::Node& n) {
  return n.as<T>();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"scene", "preset", [](ScenarioConfig& c, const YAML::Node& n) { c.preset = parse_preset(as<std::string>(n)); },
       [](const ScenarioConfig& c) { return std::string(preset_name(c.preset)); }},
      {"scene", "num_views", [](ScenarioConfig& c, const YAML::Node& n) { c.num_views = as<int>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.num_views); }},
      {"scene", "num_landmarks", [](ScenarioConfig& c, const YAML::Node& n) { c.num_landmarks = as<int>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.num_landmarks); }},
      {"", "seed", [](ScenarioConfig& c, const YAML::Node& n) { c.seed = as<std::uint64_t>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      {"noise", "sigma_rot_deg", [](ScenarioConfig& c, const YAML::Node& n) { c.noise.sigma_rot = as<double>(n) * kDeg; },
       [](const ScenarioConfig& c) { return fmt(c.noise.sigma_rot / kDeg); }},
      {"noise", "sigma_trans", [](ScenarioConfig& c, const YAML::Node& n) { c.noise.sigma_trans = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.noise.sigma_trans); }},
      {"noise", "sigma_scale", [](ScenarioConfig& c, const YAML::Node& n) { c.noise.sigma_scale = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.noise.sigma_scale); }},
      {"noise", "sigma_point", [](ScenarioConfig& c, const YAML::Node& n) { c.noise.sigma_point = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.noise.sigma_point); }},
      {"noise", "loop_false_positive_rate",
       [](ScenarioConfig& c, const YAML::Node& n) { c.noise.loop_false_positive_rate = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.noise.loop_false_positive_rate); }},
      {"noise", "confidence_beta",
       [](ScenarioConfig& c, const YAML::Node& n) { c.noise.confidence_model.beta = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.noise.confidence_model.beta); }},
      {"loops", "enabled", [](ScenarioConfig& c, const YAML::Node& n) { c.loop_closure = as<bool>(n); },
       [](const ScenarioConfig& c) { return fmt_bool(c.loop_closure); }},
      {"loops", "max_distance", [](ScenarioConfig& c, const YAML::Node& n) { c.proximity.max_distance = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.proximity.max_distance); }},
      {"loops", "max_angle_deg",
       [](ScenarioConfig& c, const YAML::Node& n) { c.proximity.max_angle = as<double>(n) * kDeg; },
       [](const ScenarioConfig& c) { return fmt(c.proximity.max_angle / kDeg); }},
      {"loops", "min_index_gap", [](ScenarioConfig& c, const YAML::Node& n) { c.proximity.min_index_gap = as<int>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.proximity.min_index_gap); }},
      {"graph", "N", [](ScenarioConfig& c, const YAML::Node& n) { c.graph.neighbor_radius = as<int>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.graph.neighbor_radius); }},
      {"graph", "tau_p", [](ScenarioConfig& c, const YAML::Node& n) { c.graph.tau_p = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.graph.tau_p); }},
      {"graph", "kappa_rho", [](ScenarioConfig& c, const YAML::Node& n) { c.graph.omega.kappa_rho = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.graph.omega.kappa_rho); }},
      {"graph", "kappa_phi", [](ScenarioConfig& c, const YAML::Node& n) { c.graph.omega.kappa_phi = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.graph.omega.kappa_phi); }},
      {"graph", "kappa_sigma", [](ScenarioConfig& c, const YAML::Node& n) { c.graph.omega.kappa_sigma = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.graph.omega.kappa_sigma); }},
      {"graph", "scale_edge_stiffness",
       [](ScenarioConfig& c, const YAML::Node& n) { c.graph.omega.scale_edge_stiffness = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.graph.omega.scale_edge_stiffness); }},
      {"graph", "scale_min_confidence",
       [](ScenarioConfig& c, const YAML::Node& n) {
         if (n.IsNull()) {
           c.graph.scale_min_confidence.reset();
         } else {
           c.graph.scale_min_confidence = as<double>(n);
         }
       },
       [](const ScenarioConfig& c) {
         return c.graph.scale_min_confidence ? fmt(*c.graph.scale_min_confidence) : std::string("null");
       }},
      {"optimizer", "enabled", [](ScenarioConfig& c, const YAML::Node& n) { c.optimize = as<bool>(n); },
       [](const ScenarioConfig& c) { return fmt_bool(c.optimize); }},
      {"optimizer", "mode",
       [](ScenarioConfig& c, const YAML::Node& n) { c.optimize_mode = parse_optimize_mode(as<std::string>(n)); },
       [](const ScenarioConfig& c) { return std::string(optimize_mode_name(c.optimize_mode)); }},
      {"optimizer", "max_iterations", [](ScenarioConfig& c, const YAML::Node& n) { c.lm.max_iterations = as<int>(n); },
       [](const ScenarioConfig& c) { return std::to_string(c.lm.max_iterations); }},
      {"optimizer", "initial_damping",
       [](ScenarioConfig& c, const YAML::Node& n) { c.lm.initial_damping = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.initial_damping); }},
      {"optimizer", "damping_up", [](ScenarioConfig& c, const YAML::Node& n) { c.lm.damping_up = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.damping_up); }},
      {"optimizer", "damping_down", [](ScenarioConfig& c, const YAML::Node& n) { c.lm.damping_down = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.damping_down); }},
      {"optimizer", "residual_tolerance",
       [](ScenarioConfig& c, const YAML::Node& n) { c.lm.residual_tolerance = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.residual_tolerance); }},
      {"optimizer", "step_tolerance",
       [](ScenarioConfig& c, const YAML::Node& n) { c.lm.step_tolerance = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.step_tolerance); }},
      {"optimizer", "cost_change_tolerance",
       [](ScenarioConfig& c, const YAML::Node& n) { c.lm.cost_change_tolerance = as<double>(n); },
       [](const ScenarioConfig& c) { return fmt(c.lm.cost_change_tolerance); }},
      {"fusion", "reduction",
       [](ScenarioConfig& c, const YAML::Node& n) { c.fusion_reduction = parse_reduction(as<std::string>(n)); },
       [](const ScenarioConfig& c) { return std::string(reduction_name(c.fusion_reduction)); }},
      {"", "variant", [](ScenarioConfig& c, const YAML::Node& n) { c.variant = parse_variant(as<std::string>(n)); },
       [](const ScenarioConfig& c) { return std::string(variant_name(c.variant)); }},
  };
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

bool is_section(const std::string& name) {
  for (const Field& f : fields()) {
    if (name == f.section) return true;
  }
  return false;
}

[[noreturn]] void fail(const std::string& source, const YAML::Mark& mark, const std::string& what) {
  std::string where = source;
  if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
  throw Error(ErrorCode::kParseError, kModule, where + ": " + what);
}

void apply_field(ScenarioConfig& config, const Field& f, const YAML::Node& value, const std::string& source) {
  try {
    f.set(config, value);
  } catch (const YAML::Exception&) {
    fail(source, value.Mark(), "bad value for '" + dotted(f) + "'");
  } catch (const Error& e) {
    fail(source, value.Mark(), "'" + dotted(f) + "': " + e.what());
  }
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoPgo: return "no_pgo";
    case Variant::kNoLoops: return "no_loops";
    case Variant::kSingleNode: return "single_node";
    case Variant::kNoLoopFiltering: return "no_loop_filtering";
  }
  return "full";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kFull, Variant::kNoPgo, Variant::kNoLoops, Variant::kSingleNode,
                    Variant::kNoLoopFiltering}) {
    if (name == variant_name(v)) return v;
  }
  throw Error(ErrorCode::kUnknownVariant, "experiments",
              "unknown variant '" + std::string(name) +
                  "' (expected full, no_pgo, no_loops, single_node or no_loop_filtering)");
}

std::string_view optimize_mode_name(OptimizeMode m) {
  return m == OptimizeMode::kBatch ? "batch" : "per-loop";
}

OptimizeMode parse_optimize_mode(std::string_view name) {
  if (name == "batch") return OptimizeMode::kBatch;
  if (name == "per-loop") return OptimizeMode::kPerLoop;
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown optimize mode '" + std::string(name) + "'");
}

NoiseModel ScenarioConfig::default_noise() {
  NoiseModel n;
  n.sigma_rot = 1.0 * kDeg;
  n.sigma_trans = 0.01;
  n.sigma_scale = 0.02;
  n.sigma_point = 0.005;
  return n;
}

void ScenarioConfig::validate() const {
  if (num_views < 2) throw Error(ErrorCode::kInvalidArgument, kModule, "scene.num_views must be >= 2");
  if (num_landmarks < 8) throw Error(ErrorCode::kInvalidArgument, kModule, "scene.num_landmarks must be >= 8");
  if (proximity.min_index_gap < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "loops.min_index_gap must be >= 1");
  }
  noise.validate();
  graph.validate();
  lm.validate();
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(source, e.mark, e.msg);
  }
  ScenarioConfig config;
  if (root.IsNull()) return config;
  if (!root.IsMap()) fail(source, root.Mark(), "top level must be a mapping");
  for (const auto& item : root) {
    const std::string name = item.first.as<std::string>();
    if (const Field* f = find_field("", name)) {
      apply_field(config, *f, item.second, source);
      continue;
    }
    if (!is_section(name)) fail(source, item.first.Mark(), "unknown key '" + name + "'");
    if (item.second.IsNull()) continue;
    if (!item.second.IsMap()) fail(source, item.second.Mark(), "'" + name + "' must be a mapping");
    for (const auto& sub : item.second) {
      const std::string key = sub.first.as<std::string>();
      const Field* f = find_field(name, key);
      if (!f) fail(source, sub.first.Mark(), "unknown key '" + name + "." + key + "'");
      apply_field(config, *f, sub.second, source);
    }
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, kModule, source + ": " + e.what());
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

void apply_override(ScenarioConfig& config, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
  const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
  const Field* f = find_field(section, name);
  if (!f) throw Error(ErrorCode::kInvalidArgument, kModule, "unknown setting '" + key + "'");
  YAML::Node node;
  try {
    node = YAML::Load(value);
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "bad value '" + value + "' for '" + key + "'");
  }
  ScenarioConfig updated = config;
  try {
    f->set(updated, node);
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "bad value '" + value + "' for '" + key + "'");
  }
  updated.validate();
  config = updated;
}

std::string scenario_to_text(const ScenarioConfig& config) {
  std::ostringstream out;
  std::string current;
  for (const Field& f : fields()) {
    if (!*f.section) {
      out << f.key << ": " << f.get(config) << '\n';
      current.clear();
      continue;
    }
    if (current != f.section) {
      out << f.section << ":\n";
      current = f.section;
    }
    out << "  " << f.key << ": " << f.get(config) << '\n';
  }
  return out.str();
}

}  // namespace symslam
