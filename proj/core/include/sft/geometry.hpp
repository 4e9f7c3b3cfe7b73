#pragma once

#include "sft/common.hpp"
#include "sft/image.hpp"

#include <vector>

namespace sft {

// Fixed-topology triangle mesh in its rest state, plus the derived
// quantities the elastic model and renderer need. Immutable after
// build_template; safe for concurrent reads.
struct TemplateMesh {
  MatX3 vertices;            // rest positions (m)
  Eigen::MatrixX3i faces;
  MatX2 uvs;                 // per-vertex texture coordinates in [0,1]^2

  VecX rest_areas;           // per-face area (m^2)
  // Per-face inverse of the 2x2 rest-edge matrix expressed in the face's
  // local frame (first rest edge = x-axis, orthonormalized via the normal).
  std::vector<Mat2> material_frames;

  struct Edge {
    int v0 = -1, v1 = -1;    // endpoints, v0 < v1
    int f0 = -1, f1 = -1;    // adjacent faces; f1 = -1 on the boundary
    int o0 = -1, o1 = -1;    // opposite vertex in f0 / f1
    double bend_scale = 0;   // rest-geometry factor |e|^2 / (A0+A1), interior only
    double orientation = 0;  // angle of the rest edge to the u-axis, radians in [0, pi/2]
    bool interior() const { return f1 >= 0; }
  };
  std::vector<Edge> edges;
  int interior_edge_count = 0;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }
  double total_area() const { return rest_areas.sum(); }
};

// Per-vertex positions and velocities at one time step. time_index is
// 1-based; the template is frame 1.
struct SurfaceState {
  MatX3 positions;   // m
  MatX3 velocities;  // m per step
  int time_index = 1;
};

// Static pinhole camera: intrinsics in pixels, extrinsics world-to-camera.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& p) const { return rotation * p + translation; }
  Vec3 to_world(const Vec3& p) const { return rotation.transpose() * (p - translation); }
  void validate() const;
};

// Color texture addressed by uv in [0,1]^2, clamp-to-edge.
struct TextureMap {
  Image image;  // 3-channel

  // uv (0,0) = bottom-left of the image, matching mesh-file convention.
  void sample(double u, double v, double rgb[3]) const;
  void sample_grad(double u, double v, double du[3], double dv[3]) const;
  bool valid() const { return image.channels == 3 && image.width > 0; }
};

// Validates topology, computes rest areas, local material frames and the
// edge structure. Throws DegenerateFace / IndexOutOfRange / ShapeMismatch.
TemplateMesh build_template(const MatX3& vertices, const Eigen::MatrixX3i& faces,
                            const MatX2& uvs);

// Perspective projection u = fx*X/Z + cx, v = fy*Y/Z + cy of world-space
// points; also returns camera-space depth Z. Throws BehindCamera if any
// point has Z <= 0.
void project(const MatX3& positions, const Camera& camera, MatX2& screen, VecX& depth);

// Exact inverse of project for known depth.
Vec3 unproject(const Vec2& screen, double depth, const Camera& camera);

// State at frame 1: template positions, zero velocities.
SurfaceState initial_state(const TemplateMesh& mesh);

}  // namespace sft
