#include "sft/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sft {

void Camera::validate() const {
  if (fx <= 0 || fy <= 0) throw Error("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error("camera: image size must be positive");
  if (cx < 0 || cx > width || cy < 0 || cy > height)
    throw Error("camera: principal point outside image bounds");
  if ((rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-9 ||
      std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw Error("camera: rotation not orthonormal");
}

void TextureMap::sample(double u, double v, double rgb[3]) const {
  bilinear_sample(image, u * (image.width - 1), (1.0 - v) * (image.height - 1), rgb);
}

void TextureMap::sample_grad(double u, double v, double du[3], double dv[3]) const {
  double dx[3], dy[3];
  bilinear_sample_grad(image, u * (image.width - 1), (1.0 - v) * (image.height - 1), dx, dy);
  for (int c = 0; c < 3; ++c) {
    du[c] = dx[c] * (image.width - 1);
    dv[c] = -dy[c] * (image.height - 1);
  }
}

TemplateMesh build_template(const MatX3& vertices, const Eigen::MatrixX3i& faces,
                            const MatX2& uvs) {
  if (uvs.rows() != vertices.rows())
    throw ShapeMismatch("build_template: uv count != vertex count");
  if (!vertices.allFinite()) throw NaNDetected("build_template: non-finite vertex");
  for (Eigen::Index i = 0; i < uvs.rows(); ++i)
    if (uvs(i, 0) < -1e-9 || uvs(i, 0) > 1 + 1e-9 || uvs(i, 1) < -1e-9 || uvs(i, 1) > 1 + 1e-9)
      throw Error("build_template: uv outside [0,1]^2 at vertex " + std::to_string(i));

  TemplateMesh mesh;
  mesh.vertices = vertices;
  mesh.faces = faces;
  mesh.uvs = uvs;

  const int nv = mesh.vertex_count();
  const int nf = mesh.face_count();
  mesh.rest_areas.resize(nf);
  mesh.material_frames.resize(nf);

  for (int f = 0; f < nf; ++f) {
    const Vec3i tri = faces.row(f);
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= nv)
        throw IndexOutOfRange("face " + std::to_string(f) + " references vertex " +
                              std::to_string(tri[k]));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw DegenerateFace("face " + std::to_string(f) + " repeats a vertex");

    const Vec3 e1 = vertices.row(tri[1]) - vertices.row(tri[0]);
    const Vec3 e2 = vertices.row(tri[2]) - vertices.row(tri[0]);
    const Vec3 n = e1.cross(e2);
    const double area = 0.5 * n.norm();
    if (!(area > 1e-14))
      throw DegenerateFace("face " + std::to_string(f) + " has zero rest area");
    mesh.rest_areas[f] = area;

    // Local orthonormal frame: b0 along the first rest edge, b1 = n x b0.
    const Vec3 b0 = e1.normalized();
    const Vec3 b1 = n.normalized().cross(b0);
    Mat2 dm;
    dm << e1.dot(b0), e2.dot(b0), e1.dot(b1), e2.dot(b1);
    mesh.material_frames[f] = dm.inverse();
  }

  // Unique edges with adjacent faces. Keyed on sorted endpoints so the
  // ordering is deterministic.
  std::map<std::pair<int, int>, int> edge_index;
  for (int f = 0; f < nf; ++f) {
    const Vec3i tri = faces.row(f);
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3], opp = tri[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      if (it == edge_index.end()) {
        TemplateMesh::Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.f0 = f;
        e.o0 = opp;
        edge_index.emplace(key, static_cast<int>(mesh.edges.size()));
        mesh.edges.push_back(e);
      } else {
        TemplateMesh::Edge& e = mesh.edges[it->second];
        if (e.f1 >= 0)
          throw Error("non-manifold edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        e.f1 = f;
        e.o1 = opp;
      }
    }
  }

  for (auto& e : mesh.edges) {
    if (!e.interior()) continue;
    ++mesh.interior_edge_count;
    const double len2 = (vertices.row(e.v1) - vertices.row(e.v0)).squaredNorm();
    e.bend_scale = len2 / (mesh.rest_areas[e.f0] + mesh.rest_areas[e.f1]);
    // Material orientation of the edge relative to the texture u-axis,
    // folded into the first quadrant.
    const Vec2 duv = uvs.row(e.v1) - uvs.row(e.v0);
    e.orientation = std::atan2(std::abs(duv[1]), std::abs(duv[0]));
  }
  return mesh;
}

void project(const MatX3& positions, const Camera& camera, MatX2& screen, VecX& depth) {
  const Eigen::Index n = positions.rows();
  screen.resize(n, 2);
  depth.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 p = camera.to_camera(positions.row(i));
    if (!(p.z() > 0)) throw BehindCamera("vertex " + std::to_string(i));
    screen(i, 0) = camera.fx * p.x() / p.z() + camera.cx;
    screen(i, 1) = camera.fy * p.y() / p.z() + camera.cy;
    depth[i] = p.z();
  }
}

Vec3 unproject(const Vec2& screen, double depth, const Camera& camera) {
  const Vec3 pc((screen.x() - camera.cx) * depth / camera.fx,
                (screen.y() - camera.cy) * depth / camera.fy, depth);
  return camera.to_world(pc);
}

SurfaceState initial_state(const TemplateMesh& mesh) {
  SurfaceState s;
  s.positions = mesh.vertices;
  s.velocities = MatX3::Zero(mesh.vertex_count(), 3);
  s.time_index = 1;
  return s;
}

}  // namespace sft
