#pragma once

#include "sft/geometry.hpp"

#include <string>

namespace sft {

// Wavefront-style text meshes (v / vt / f records, 1-based indices).
// UVs are per-vertex; faces written as `f i/i j/j k/k`. Meshes without
// vt records get uvs from planar projection of the rest positions.
TemplateMesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const MatX3& vertices, const Eigen::MatrixX3i& faces,
               const MatX2& uvs);

// Just the vertex positions of a stored mesh (reference geometry files).
MatX3 load_mesh_positions(const std::string& path);

// Unit-square uvs by orthographic projection onto the two dominant axes
// of the vertex bounding box.
MatX2 planar_uvs(const MatX3& vertices);

}  // namespace sft
