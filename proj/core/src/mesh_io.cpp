#include "sft/mesh_io.hpp"

#include "sft/config_file.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace sft {

namespace {

struct RawMesh {
  std::vector<Vec3> positions;
  std::vector<Vec2> uvs;                    // vt records, may be empty
  std::vector<std::array<int, 3>> faces;    // vertex indices, 0-based
  std::vector<std::array<int, 3>> face_uvs; // vt indices, -1 if absent
};

int parse_index(const std::string& tok, size_t count, const std::string& path, int lineno) {
  int idx = 0;
  try {
    idx = std::stoi(tok);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": bad index '" + tok + "'");
  }
  if (idx < 0) idx = static_cast<int>(count) + idx + 1;  // negative = relative
  if (idx < 1 || idx > static_cast<int>(count))
    throw ParseError(path + ":" + std::to_string(lineno) + ": index out of range");
  return idx - 1;
}

RawMesh parse_raw(const std::string& path) {
  std::istringstream in(read_file(path));
  RawMesh raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad vertex");
      raw.positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ls >> t.x() >> t.y()))
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad texture coordinate");
      raw.uvs.push_back(t);
    } else if (tag == "f") {
      std::vector<int> vi, ti;
      std::string corner;
      while (ls >> corner) {
        const auto slash = corner.find('/');
        vi.push_back(parse_index(corner.substr(0, slash), raw.positions.size(), path, lineno));
        if (slash != std::string::npos) {
          std::string rest = corner.substr(slash + 1);
          const auto slash2 = rest.find('/');
          if (slash2 != std::string::npos) rest.erase(slash2);
          ti.push_back(rest.empty() ? -1 : parse_index(rest, raw.uvs.size(), path, lineno));
        } else {
          ti.push_back(-1);
        }
      }
      if (vi.size() != 3)
        throw ParseError(path + ":" + std::to_string(lineno) + ": only triangle faces supported");
      raw.faces.push_back({vi[0], vi[1], vi[2]});
      raw.face_uvs.push_back({ti[0], ti[1], ti[2]});
    }
    // Other records (vn, o, g, s, usemtl, ...) are ignored.
  }
  if (raw.positions.empty()) throw ParseError(path + ": no vertices");
  if (raw.faces.empty()) throw ParseError(path + ": no faces");
  return raw;
}

}  // namespace

MatX2 planar_uvs(const MatX3& vertices) {
  const Vec3 lo = vertices.colwise().minCoeff();
  const Vec3 hi = vertices.colwise().maxCoeff();
  const Vec3 extent = hi - lo;
  // Drop the thinnest axis.
  int drop = 0;
  extent.minCoeff(&drop);
  const int a = drop == 0 ? 1 : 0;
  const int b = drop == 2 ? 1 : 2;
  MatX2 uvs(vertices.rows(), 2);
  const double sa = extent[a] > 0 ? extent[a] : 1.0;
  const double sb = extent[b] > 0 ? extent[b] : 1.0;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    uvs(i, 0) = (vertices(i, a) - lo[a]) / sa;
    uvs(i, 1) = (vertices(i, b) - lo[b]) / sb;
  }
  return uvs;
}

TemplateMesh load_mesh(const std::string& path) {
  const RawMesh raw = parse_raw(path);
  MatX3 vertices(raw.positions.size(), 3);
  for (size_t i = 0; i < raw.positions.size(); ++i) vertices.row(i) = raw.positions[i];

  MatX2 uvs;
  if (raw.uvs.empty()) {
    uvs = planar_uvs(vertices);
  } else {
    uvs = MatX2::Zero(vertices.rows(), 2);
    std::vector<bool> seen(raw.positions.size(), false);
    for (size_t f = 0; f < raw.faces.size(); ++f) {
      for (int k = 0; k < 3; ++k) {
        const int vi = raw.faces[f][k], ti = raw.face_uvs[f][k];
        if (ti < 0) continue;
        uvs.row(vi) = raw.uvs[ti];
        seen[vi] = true;
      }
    }
    for (size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) throw ParseError(path + ": vertex " + std::to_string(i) + " has no uv");
  }

  Eigen::MatrixX3i faces(raw.faces.size(), 3);
  for (size_t f = 0; f < raw.faces.size(); ++f)
    faces.row(f) = Vec3i(raw.faces[f][0], raw.faces[f][1], raw.faces[f][2]);
  return build_template(vertices, faces, uvs);
}

MatX3 load_mesh_positions(const std::string& path) {
  const RawMesh raw = parse_raw(path);
  MatX3 vertices(raw.positions.size(), 3);
  for (size_t i = 0; i < raw.positions.size(); ++i) vertices.row(i) = raw.positions[i];
  return vertices;
}

void save_mesh(const std::string& path, const MatX3& vertices, const Eigen::MatrixX3i& faces,
               const MatX2& uvs) {
  if (uvs.rows() != 0 && uvs.rows() != vertices.rows())
    throw ShapeMismatch("save_mesh: uv count != vertex count");
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < vertices.rows(); ++i)
    out << "v " << vertices(i, 0) << " " << vertices(i, 1) << " " << vertices(i, 2) << "\n";
  for (Eigen::Index i = 0; i < uvs.rows(); ++i)
    out << "vt " << uvs(i, 0) << " " << uvs(i, 1) << "\n";
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    out << "f";
    for (int k = 0; k < 3; ++k) {
      const int idx = faces(f, k) + 1;
      out << " " << idx;
      if (uvs.rows()) out << "/" << idx;
    }
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace sft
