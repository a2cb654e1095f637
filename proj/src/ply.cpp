#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "symslam/errors.hpp"
#include "symslam/fusion.hpp"

namespace symslam {

namespace {

constexpr const char* kModule = "ply";

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

struct Property {
  std::string name;
  ScalarType type;
};

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

bool parse_type(const std::string& s, ScalarType& t) {
  static const std::pair<const char*, ScalarType> table[] = {
      {"char", ScalarType::kInt8},     {"int8", ScalarType::kInt8},       {"uchar", ScalarType::kUInt8},
      {"uint8", ScalarType::kUInt8},   {"short", ScalarType::kInt16},     {"int16", ScalarType::kInt16},
      {"ushort", ScalarType::kUInt16}, {"uint16", ScalarType::kUInt16},   {"int", ScalarType::kInt32},
      {"int32", ScalarType::kInt32},   {"uint", ScalarType::kUInt32},     {"uint32", ScalarType::kUInt32},
      {"float", ScalarType::kFloat32}, {"float32", ScalarType::kFloat32}, {"double", ScalarType::kFloat64},
      {"float64", ScalarType::kFloat64}};
  for (const auto& [name, type] : table) {
    if (s == name) {
      t = type;
      return true;
    }
  }
  return false;
}

double decode(const char* p, ScalarType t) {
  switch (t) {
    case ScalarType::kInt8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case ScalarType::kUInt8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case ScalarType::kInt16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::kUInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::kInt32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kUInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kFloat32: { float v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::kFloat64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParseError, kModule, path + ": " + what);
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void write_ply(const PointCloud& cloud, const std::string& path, PlyFormat format) {
  if (cloud.confidence.size() != cloud.size() || cloud.view_id.size() != cloud.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "point, confidence and view id counts differ");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path + " for writing");
  out << "ply\n"
      << "format " << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property double confidence\nproperty int view_id\n"
      << "end_header\n";
  if (format == PlyFormat::kAscii) {
    out.precision(17);
    for (std::size_t k = 0; k < cloud.size(); ++k) {
      const Vec3& p = cloud.points[k];
      out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << cloud.confidence[k] << ' ' << cloud.view_id[k] << '\n';
    }
  } else {
    for (std::size_t k = 0; k < cloud.size(); ++k) {
      const Vec3& p = cloud.points[k];
      put(out, p.x());
      put(out, p.y());
      put(out, p.z());
      put(out, cloud.confidence[k]);
      put(out, static_cast<std::int32_t>(cloud.view_id[k]));
    }
  }
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write to " + path + " failed");
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line != "ply") fail(path, "missing 'ply' magic");
  bool ascii = false;
  bool have_format = false;
  std::size_t count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  std::vector<Property> props;
  while (true) {
    if (!std::getline(in, line)) fail(path, "header not terminated by end_header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        ascii = true;
      } else if (fmt != "binary_little_endian") {
        fail(path, "unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (kw == "element") {
      std::string name;
      ls >> name;
      if (seen_vertex) fail(path, "elements after 'vertex' are not supported");
      if (name != "vertex") fail(path, "unsupported element '" + name + "' before vertex");
      if (!(ls >> count)) fail(path, "bad vertex count");
      in_vertex = seen_vertex = true;
    } else if (kw == "property") {
      if (!in_vertex) fail(path, "property outside the vertex element");
      std::string type_name;
      std::string name;
      ls >> type_name >> name;
      if (type_name == "list") fail(path, "list properties are not supported");
      Property p;
      if (!parse_type(type_name, p.type)) fail(path, "unknown property type '" + type_name + "'");
      p.name = name;
      props.push_back(p);
    } else {
      fail(path, "unexpected header line '" + line + "'");
    }
  }
  if (!have_format) fail(path, "missing format line");

  int ix = -1, iy = -1, iz = -1, ic = -1, iv = -1;
  for (int k = 0; k < static_cast<int>(props.size()); ++k) {
    const std::string& n = props[k].name;
    if (n == "x") ix = k;
    if (n == "y") iy = k;
    if (n == "z") iz = k;
    if (n == "confidence") ic = k;
    if (n == "view_id") iv = k;
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex lacks x/y/z");

  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> row(props.size());
  std::size_t stride = 0;
  for (const Property& p : props) stride += type_size(p.type);
  std::vector<char> buf(stride);
  for (std::size_t k = 0; k < count; ++k) {
    if (ascii) {
      if (!std::getline(in, line)) fail(path, "expected " + std::to_string(count) + " vertices, got " + std::to_string(k));
      std::istringstream ls(line);
      for (double& v : row) {
        if (!(ls >> v)) fail(path, "vertex " + std::to_string(k) + " is short");
      }
    } else {
      if (!in.read(buf.data(), static_cast<std::streamsize>(stride))) {
        fail(path, "expected " + std::to_string(count) + " vertices, got " + std::to_string(k));
      }
      std::size_t off = 0;
      for (std::size_t p = 0; p < props.size(); ++p) {
        row[p] = decode(buf.data() + off, props[p].type);
        off += type_size(props[p].type);
      }
    }
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    cloud.confidence.push_back(ic >= 0 ? row[ic] : 1.0);
    cloud.view_id.push_back(iv >= 0 ? static_cast<int>(row[iv]) : -1);
  }
  return cloud;
}

}  // namespace symslam
