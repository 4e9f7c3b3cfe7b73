#pragma once

#include "sft/geometry.hpp"
#include "sft/physics.hpp"

#include <functional>
#include <random>

namespace sft::testing {

// Regular nx x ny vertex grid in the xy-plane, centered at the origin.
inline TemplateMesh grid_mesh(int nx, int ny, double width = 0.5, double height = 0.5) {
  MatX3 vertices(nx * ny, 3);
  MatX2 uvs(nx * ny, 2);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v = j * nx + i;
      const double u = nx > 1 ? double(i) / (nx - 1) : 0.0;
      const double w = ny > 1 ? double(j) / (ny - 1) : 0.0;
      vertices.row(v) = Vec3((u - 0.5) * width, (w - 0.5) * height, 0.0);
      uvs.row(v) = Vec2(u, w);
    }
  Eigen::MatrixX3i faces(2 * (nx - 1) * (ny - 1), 3);
  int f = 0;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int v00 = j * nx + i, v10 = v00 + 1, v01 = v00 + nx, v11 = v01 + 1;
      faces.row(f++) = Vec3i(v00, v10, v11);
      faces.row(f++) = Vec3i(v00, v11, v01);
    }
  return build_template(vertices, faces, uvs);
}

// Two faces sharing the edge (0,1); the hinge used all over the physics
// tests.
inline TemplateMesh hinge_mesh() {
  MatX3 v(4, 3);
  v.row(0) = Vec3(0, 0, 0);
  v.row(1) = Vec3(0.1, 0, 0);
  v.row(2) = Vec3(0.05, 0.09, 0);
  v.row(3) = Vec3(0.05, -0.09, 0);
  Eigen::MatrixX3i f(2, 3);
  f.row(0) = Vec3i(0, 1, 2);
  f.row(1) = Vec3i(1, 0, 3);
  MatX2 uv(4, 2);
  uv.row(0) = Vec2(0, 0.5);
  uv.row(1) = Vec2(1, 0.5);
  uv.row(2) = Vec2(0.5, 1);
  uv.row(3) = Vec2(0.5, 0);
  return build_template(v, f, uv);
}

inline SurfaceState perturbed_state(const TemplateMesh& mesh, double amplitude,
                                    unsigned seed, double velocity_amplitude = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SurfaceState s = initial_state(mesh);
  for (int i = 0; i < mesh.vertex_count(); ++i)
    for (int c = 0; c < 3; ++c) {
      s.positions(i, c) += amplitude * dist(rng);
      s.velocities(i, c) += velocity_amplitude * dist(rng);
    }
  return s;
}

inline double central_diff(const std::function<double(double)>& f, double x0, double eps) {
  return (f(x0 + eps) - f(x0 - eps)) / (2 * eps);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-30, std::abs(want));
}

// Relative error with an absolute floor, the convention used by all the
// gradient checks.
inline bool grad_close(double got, double want, double rel, double abs_floor = 1e-8,
                       double small = 1e-6) {
  if (std::abs(want) < small && std::abs(got - want) < abs_floor) return true;
  return std::abs(got - want) <= rel * std::max(std::abs(want), std::abs(got));
}

inline Camera simple_camera(int w = 64, int h = 64, double f = 60.0) {
  Camera cam;
  cam.fx = cam.fy = f;
  cam.cx = w / 2.0;
  cam.cy = h / 2.0;
  cam.width = w;
  cam.height = h;
  return cam;
}

}  // namespace sft::testing
