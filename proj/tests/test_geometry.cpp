#include <doctest.h>

#include "sft/config_file.hpp"
#include "sft/geometry.hpp"
#include "sft/mesh_io.hpp"
#include "test_helpers.hpp"

#include <filesystem>

using namespace sft;

TEST_CASE("build_template: unit right triangle") {
  MatX3 v(3, 3);
  v.row(0) = Vec3(0, 0, 0);
  v.row(1) = Vec3(1, 0, 0);
  v.row(2) = Vec3(0, 1, 0);
  Eigen::MatrixX3i f(1, 3);
  f.row(0) = Vec3i(0, 1, 2);
  MatX2 uv(3, 2);
  uv << 0, 0, 1, 0, 0, 1;
  const TemplateMesh mesh = build_template(v, f, uv);
  CHECK(mesh.rest_areas[0] == doctest::Approx(0.5));
  CHECK((mesh.material_frames[0] - Mat2::Identity()).norm() < 1e-14);
  CHECK(mesh.edges.size() == 3);
  CHECK(mesh.interior_edge_count == 0);
}

TEST_CASE("build_template: two faces share an edge") {
  const TemplateMesh mesh = testing::hinge_mesh();
  CHECK(mesh.edges.size() == 5);
  CHECK(mesh.interior_edge_count == 1);
}

TEST_CASE("build_template: error cases") {
  MatX3 v(3, 3);
  v.row(0) = Vec3(0, 0, 0);
  v.row(1) = Vec3(1, 0, 0);
  v.row(2) = Vec3(0, 1, 0);
  MatX2 uv = MatX2::Zero(3, 2);
  Eigen::MatrixX3i repeated(1, 3);
  repeated.row(0) = Vec3i(0, 1, 1);
  CHECK_THROWS_AS(build_template(v, repeated, uv), DegenerateFace);
  Eigen::MatrixX3i out_of_range(1, 3);
  out_of_range.row(0) = Vec3i(0, 1, 7);
  CHECK_THROWS_AS(build_template(v, out_of_range, uv), IndexOutOfRange);
}

TEST_CASE("build_template is deterministic and rigid-invariant") {
  const TemplateMesh a = testing::grid_mesh(4, 4);
  const TemplateMesh b = testing::grid_mesh(4, 4);
  for (int f = 0; f < a.face_count(); ++f) {
    CHECK(a.rest_areas[f] == b.rest_areas[f]);
    CHECK((a.material_frames[f] - b.material_frames[f]).norm() == 0.0);
  }

  // Rigidly moved rest state keeps areas.
  const double ang = 0.83;
  Mat3 R;
  R = Eigen::AngleAxisd(ang, Vec3(1, 2, -1).normalized()).toRotationMatrix();
  MatX3 moved = (a.vertices * R.transpose()).rowwise() + Vec3(0.3, -0.2, 1.5).transpose();
  const TemplateMesh c = build_template(moved, a.faces, a.uvs);
  for (int f = 0; f < a.face_count(); ++f)
    CHECK(testing::rel_err(c.rest_areas[f], a.rest_areas[f]) < 1e-12);
}

TEST_CASE("project: pinhole examples") {
  Camera cam;
  cam.fx = cam.fy = 100;
  cam.cx = cam.cy = 50;
  cam.width = cam.height = 100;
  MatX3 p(2, 3);
  p.row(0) = Vec3(0, 0, 1);
  p.row(1) = Vec3(1, 0, 2);
  MatX2 screen;
  VecX depth;
  project(p, cam, screen, depth);
  CHECK(screen(0, 0) == doctest::Approx(50));
  CHECK(screen(0, 1) == doctest::Approx(50));
  CHECK(depth[0] == doctest::Approx(1));
  CHECK(screen(1, 0) == doctest::Approx(100));
  CHECK(depth[1] == doctest::Approx(2));

  MatX3 behind(1, 3);
  behind.row(0) = Vec3(0, 0, -1);
  CHECK_THROWS_AS(project(behind, cam, screen, depth), BehindCamera);
}

TEST_CASE("project/unproject round trip with extrinsics") {
  Camera cam = testing::simple_camera();
  cam.rotation = Eigen::AngleAxisd(0.4, Vec3(0.2, 1, 0.3).normalized()).toRotationMatrix();
  cam.translation = Vec3(0.1, -0.2, 1.4);
  cam.validate();
  MatX3 p(3, 3);
  p.row(0) = Vec3(0.05, -0.03, 0.2);
  p.row(1) = Vec3(-0.2, 0.1, 0.5);
  p.row(2) = Vec3(0.0, 0.0, 0.0);
  MatX2 screen;
  VecX depth;
  project(p, cam, screen, depth);
  for (int i = 0; i < 3; ++i) {
    const Vec3 back = unproject(screen.row(i).transpose(), depth[i], cam);
    CHECK((back - p.row(i).transpose()).norm() < 1e-12);
  }
}

TEST_CASE("initial_state copies the template exactly") {
  const TemplateMesh mesh = testing::grid_mesh(5, 3);
  const SurfaceState s = initial_state(mesh);
  CHECK(s.time_index == 1);
  CHECK(s.positions.rows() == mesh.vertex_count());
  CHECK(s.velocities.rows() == mesh.vertex_count());
  CHECK(s.velocities.cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.positions - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mesh io round trip") {
  namespace fs = std::filesystem;
  const TemplateMesh mesh = testing::grid_mesh(3, 3);
  const fs::path dir = fs::temp_directory_path() / "sft_mesh_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "grid.obj").string();
  save_mesh(path, mesh.vertices, mesh.faces, mesh.uvs);
  const TemplateMesh loaded = load_mesh(path);
  CHECK(loaded.vertex_count() == mesh.vertex_count());
  CHECK(loaded.face_count() == mesh.face_count());
  CHECK((loaded.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.uvs - mesh.uvs).cwiseAbs().maxCoeff() == 0.0);

  const std::string path2 = (dir / "grid2.obj").string();
  save_mesh(path2, loaded.vertices, loaded.faces, loaded.uvs);
  CHECK(read_file(path) == read_file(path2));
  fs::remove_all(dir);
}

TEST_CASE("load_mesh rejects broken files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sft_mesh_io_bad";
  fs::create_directories(dir);
  const std::string path = (dir / "bad.obj").string();
  write_file_atomic(path, "v 0 0 0\nv 1 0 0\nf 1 2 5\n");
  CHECK_THROWS_AS(load_mesh(path), ParseError);
  CHECK_THROWS_AS(load_mesh((dir / "absent.obj").string()), MissingFile);
  fs::remove_all(dir);
}
