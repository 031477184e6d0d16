#pragma once

#include "geoheat/mesh.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace geoheat {

enum class MeshFormat { OBJ, PLY };

namespace io_detail {

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

// OBJ face entries may carry texture/normal slashes; the index is the lead.
inline bool parse_obj_index(const std::string& token, long& out) {
  std::string head = token.substr(0, token.find('/'));
  if (head.empty()) return false;
  const char* begin = head.c_str();
  char* end = nullptr;
  out = std::strtol(begin, &end, 10);
  return end != begin && *end == '\0';
}

inline TriMesh load_obj(std::istream& in) {
  std::vector<Vec3> positions;
  std::vector<std::array<Index, 3>> faces;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw MeshError("OBJ parse failure at line " + std::to_string(line_no) + ": bad vertex");
      positions.push_back(Vec3(x, y, z));
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string token;
      while (ls >> token) {
        long value;
        if (!parse_obj_index(token, value))
          throw MeshError("OBJ parse failure at line " + std::to_string(line_no) + ": bad face entry '" + token + "'");
        if (value < 0) value = static_cast<long>(positions.size()) + 1 + value;
        idx.push_back(value);
      }
      if (idx.size() != 3)
        throw MeshError("OBJ parse failure at line " + std::to_string(line_no) +
                        ": non-triangle face with " + std::to_string(idx.size()) + " vertices");
      std::array<Index, 3> tri;
      for (int k = 0; k < 3; ++k) {
        if (idx[k] < 1 || idx[k] > static_cast<long>(positions.size()))
          throw MeshError("OBJ parse failure at line " + std::to_string(line_no) + ": face index out of range");
        tri[k] = static_cast<Index>(idx[k] - 1);
      }
      faces.push_back(tri);
    }
    // other tags (vn, vt, o, g, s, usemtl, ...) are ignored
  }
  return build_mesh(std::move(positions), std::move(faces));
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  throw MeshError("PLY: unsupported property type '" + name + "'");
}

inline std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

inline double read_binary_scalar(std::istream& in, PlyType t, std::size_t& offset) {
  unsigned char buf[8];
  std::size_t n = ply_type_size(t);
  if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n)))
    throw MeshError("PLY parse failure at byte offset " + std::to_string(offset) + ": unexpected end of data");
  offset += n;
  switch (t) {
    case PlyType::Int8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
    case PlyType::UInt8: return static_cast<double>(buf[0]);
    case PlyType::Int16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::Int32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::Float32: { float v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::Float64: { double v; std::memcpy(&v, buf, 8); return v; }
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
  PlyType value_type = PlyType::Float32;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
};

inline TriMesh load_ply(std::istream& in) {
  std::string line;
  long line_no = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line))
      throw MeshError(std::string("PLY parse failure: unexpected end of header while reading ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
  };

  next_line("magic");
  if (line != "ply") throw MeshError("PLY parse failure at line 1: missing 'ply' magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  while (true) {
    next_line("header");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": unsupported format '" + fmt + "'");
    } else if (tag == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count))
        throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": bad element");
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty())
        throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": property before element");
      PlyProperty prop;
      std::string type_name;
      ls >> type_name;
      if (type_name == "list") {
        std::string count_name, value_name;
        if (!(ls >> count_name >> value_name >> prop.name))
          throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": bad list property");
        prop.is_list = true;
        prop.count_type = ply_type(count_name);
        prop.value_type = ply_type(value_name);
      } else {
        if (!(ls >> prop.name))
          throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": bad property");
        prop.value_type = ply_type(type_name);
      }
      elements.back().properties.push_back(prop);
    } else if (tag == "end_header") {
      break;
    } else {
      throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": unknown header line '" + line + "'");
    }
  }
  if (elements.size() < 2 || elements[0].name != "vertex" || elements[1].name != "face")
    throw MeshError("PLY parse failure: expected elements in vertex-then-face order");

  std::vector<Vec3> positions;
  std::vector<std::array<Index, 3>> faces;
  positions.reserve(elements[0].count);
  faces.reserve(elements[1].count);
  std::size_t offset = 0;

  auto read_ascii_scalar = [&](std::istringstream& ls, const char* what) {
    double v;
    if (!(ls >> v))
      throw MeshError("PLY parse failure at line " + std::to_string(line_no) + ": bad " + what);
    return v;
  };

  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int xi = -1, yi = -1, zi = -1;
    if (is_vertex) {
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        if (el.properties[p].name == "x") xi = static_cast<int>(p);
        if (el.properties[p].name == "y") yi = static_cast<int>(p);
        if (el.properties[p].name == "z") zi = static_cast<int>(p);
      }
      if (xi < 0 || yi < 0 || zi < 0)
        throw MeshError("PLY parse failure: vertex element lacks x/y/z properties");
    }
    for (long i = 0; i < el.count; ++i) {
      std::istringstream ls;
      if (!binary) {
        next_line(el.name.c_str());
        ls.str(line);
      }
      std::vector<double> scalars;
      std::vector<long> list_values;
      for (const PlyProperty& prop : el.properties) {
        if (prop.is_list) {
          long n = binary ? static_cast<long>(read_binary_scalar(in, prop.count_type, offset))
                          : static_cast<long>(read_ascii_scalar(ls, "list count"));
          list_values.clear();
          for (long k = 0; k < n; ++k)
            list_values.push_back(binary
                                      ? static_cast<long>(read_binary_scalar(in, prop.value_type, offset))
                                      : static_cast<long>(read_ascii_scalar(ls, "list value")));
        } else {
          scalars.push_back(binary ? read_binary_scalar(in, prop.value_type, offset)
                                   : read_ascii_scalar(ls, prop.name.c_str()));
        }
      }
      if (is_vertex) {
        positions.push_back(Vec3(scalars[xi], scalars[yi], scalars[zi]));
      } else if (is_face) {
        if (list_values.size() != 3)
          throw MeshError("PLY: non-triangle face with " + std::to_string(list_values.size()) + " vertices");
        std::array<Index, 3> tri;
        for (int k = 0; k < 3; ++k) {
          if (list_values[k] < 0 || list_values[k] >= static_cast<long>(positions.size()))
            throw MeshError("PLY: face index out of range");
          tri[k] = static_cast<Index>(list_values[k]);
        }
        faces.push_back(tri);
      }
    }
  }
  return build_mesh(std::move(positions), std::move(faces));
}

}  // namespace io_detail

inline TriMesh load_mesh(std::istream& in, MeshFormat format) {
  return format == MeshFormat::OBJ ? io_detail::load_obj(in) : io_detail::load_ply(in);
}

inline MeshFormat format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "obj") return MeshFormat::OBJ;
  if (ext == "ply") return MeshFormat::PLY;
  throw MeshError("cannot infer mesh format from path '" + path + "' (expected .obj or .ply)");
}

inline TriMesh load_mesh(const std::string& path) {
  MeshFormat format = format_from_path(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return load_mesh(in, format);
}

inline void save_obj(std::ostream& os, const TriMesh& mesh) {
  char buf[128];
  for (const Vec3& p : mesh.positions) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    os << buf;
  }
  for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

/// Binary little-endian PLY; `quality` holds a per-vertex scalar when given.
inline void save_ply(std::ostream& os, const TriMesh& mesh, const VertexScalarField* quality = nullptr) {
  os << "ply\nformat binary_little_endian 1.0\n";
  os << "element vertex " << mesh.vertex_count() << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  if (quality) os << "property double quality\n";
  os << "element face " << mesh.face_count() << "\n";
  os << "property list uchar int vertex_indices\n";
  os << "end_header\n";
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    double xyz[3] = {mesh.positions[v].x(), mesh.positions[v].y(), mesh.positions[v].z()};
    os.write(reinterpret_cast<const char*>(xyz), 24);
    if (quality) {
      double q = (*quality)[v];
      os.write(reinterpret_cast<const char*>(&q), 8);
    }
  }
  for (const auto& f : mesh.faces) {
    unsigned char n = 3;
    os.write(reinterpret_cast<const char*>(&n), 1);
    std::int32_t idx[3] = {f[0], f[1], f[2]};
    os.write(reinterpret_cast<const char*>(idx), 12);
  }
}

inline void save_mesh(const std::string& path, const TriMesh& mesh) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MeshError("cannot open output file '" + path + "'");
  if (format_from_path(path) == MeshFormat::OBJ) save_obj(os, mesh);
  else save_ply(os, mesh);
}

/// One distance per line in vertex order, 17 significant digits.
inline void write_distances_txt(std::ostream& os, const VertexScalarField& d) {
  char buf[40];
  for (double v : d) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    os << buf;
  }
}

inline void write_distances_csv(std::ostream& os, const VertexScalarField& d) {
  os << "vertex_index,distance\n";
  char buf[64];
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, d[i]);
    os << buf;
  }
}

}  // namespace geoheat
