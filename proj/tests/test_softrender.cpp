#include <doctest.h>

#include "sft/softrender.hpp"
#include "test_helpers.hpp"

#include <random>

using namespace sft;

namespace {

TemplateMesh grid_at(int nx, int ny, double w, double h, const Vec3& offset) {
  TemplateMesh flat = testing::grid_mesh(nx, ny, w, h);
  MatX3 moved = flat.vertices;
  moved.rowwise() += offset.transpose();
  return build_template(moved, flat.faces, flat.uvs);
}

TextureMap checker_texture(int size = 32, int cells = 8) {
  TextureMap tex;
  tex.image = Image(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool on = ((x * cells / size) + (y * cells / size)) % 2 == 0;
      tex.image.at(x, y, 0) = on ? 0.9 : 0.15;
      tex.image.at(x, y, 1) = 0.2 + 0.6 * x / (size - 1.0);
      tex.image.at(x, y, 2) = on ? 0.25 : 0.7;
    }
  return tex;
}

}  // namespace

TEST_CASE("rasterize: empty mesh gives pure background") {
  MatX3 v(3, 3);
  v << -1, 0, 1, 1, 0, 1, 0, 1, 1;
  Eigen::MatrixX3i f(0, 3);
  MatX2 uv = MatX2::Zero(3, 2);
  const TemplateMesh mesh = build_template(v, f, uv);
  const Camera cam = testing::simple_camera(32, 32, 30);
  RenderConfig cfg;
  cfg.background_color = Vec3(0.1, 0.5, 0.9);
  const RenderOutput out = rasterize(initial_state(mesh), mesh, checker_texture(), cam, cfg);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      CHECK(out.alpha.at(x, y) == 0.0);
      CHECK(out.color.at(x, y, 0) == doctest::Approx(0.1));
      CHECK(out.color.at(x, y, 2) == doctest::Approx(0.9));
    }
}

TEST_CASE("rasterize: saturated interior pixel matches the texture") {
  // Two-triangle quad filling most of the view at z = 1.
  const TemplateMesh mesh = grid_at(2, 2, 0.8, 0.8, Vec3(0, 0, 1));
  const Camera cam = testing::simple_camera(64, 64, 60);
  const TextureMap tex = checker_texture(64);
  const RenderOutput out = rasterize(initial_state(mesh), mesh, tex, cam, RenderConfig{});

  // A pixel well inside one triangle (the quad diagonal runs along y=x).
  const int px = 40, py = 24;
  CHECK(out.alpha.at(px, py) > 0.99);

  // Its expected uv from the flat quad geometry: world (x,y) at z=1 maps
  // linearly to uv over the quad [-0.4, 0.4]^2.
  const double wx = (px + 0.5 - cam.cx) / cam.fx;
  const double wy = (py + 0.5 - cam.cy) / cam.fy;
  const double u = (wx + 0.4) / 0.8, v = (wy + 0.4) / 0.8;
  double rgb[3];
  tex.sample(u, v, rgb);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(out.color.at(px, py, c) - rgb[c]) < 1e-3);
}

TEST_CASE("rasterize: alpha is monotone in triangle count") {
  const TemplateMesh small = grid_at(2, 2, 0.5, 0.5, Vec3(-0.1, 0, 1));
  TemplateMesh bigger;
  {
    MatX3 v(small.vertices.rows() + 3, 3);
    v.topRows(small.vertices.rows()) = small.vertices;
    v.row(small.vertices.rows() + 0) = Vec3(0.05, -0.1, 0.9);
    v.row(small.vertices.rows() + 1) = Vec3(0.45, -0.1, 0.9);
    v.row(small.vertices.rows() + 2) = Vec3(0.25, 0.3, 0.9);
    Eigen::MatrixX3i f(small.faces.rows() + 1, 3);
    f.topRows(small.faces.rows()) = small.faces;
    const int base = static_cast<int>(small.vertices.rows());
    f.row(small.faces.rows()) = Vec3i(base, base + 1, base + 2);
    MatX2 uv(v.rows(), 2);
    uv.topRows(small.uvs.rows()) = small.uvs;
    uv.row(base + 0) = Vec2(0, 0);
    uv.row(base + 1) = Vec2(1, 0);
    uv.row(base + 2) = Vec2(0.5, 1);
    bigger = build_template(v, f, uv);
  }
  const Camera cam = testing::simple_camera(48, 48, 40);
  const TextureMap tex = checker_texture();
  const RenderOutput a = rasterize(initial_state(small), small, tex, cam, RenderConfig{});
  const RenderOutput b = rasterize(initial_state(bigger), bigger, tex, cam, RenderConfig{});
  for (size_t i = 0; i < a.alpha.data.size(); ++i) CHECK(b.alpha.data[i] >= a.alpha.data[i] - 1e-12);
}

TEST_CASE("rasterize backward matches finite differences near edges") {
  // Sub-pixel offset keeps corners and the quad diagonal off the exact
  // pixel centers, which are non-differentiable points of the soft
  // coverage (FD would straddle the kink).
  const TemplateMesh mesh = grid_at(2, 2, 0.5, 0.5, Vec3(0.00737, -0.00412, 1));
  const Camera cam = testing::simple_camera(32, 32, 30);
  const TextureMap tex = checker_texture();
  const SurfaceState state = initial_state(mesh);
  RenderConfig cfg;
  cfg.background_color = Vec3(0.3, 0.3, 0.3);
  // A flat scene has no depth range; the resolved default gamma would be
  // razor-sharp and unresolvable by finite differences. Soften it here.
  cfg.gamma = 0.02;
  const RenderConfig rcfg = cfg.resolved(cam, state);

  // Random smooth loss over colors and alpha.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-1, 1);
  Image wc(cam.width, cam.height, 3), wa(cam.width, cam.height, 1);
  for (auto& v : wc.data) v = dist(rng);
  for (auto& v : wa.data) v = dist(rng);

  auto loss_of = [&](const SurfaceState& s) {
    const RenderOutput out = rasterize(s, mesh, tex, cam, rcfg);
    double l = 0;
    for (size_t i = 0; i < out.color.data.size(); ++i) l += wc.data[i] * out.color.data[i];
    for (size_t i = 0; i < out.alpha.data.size(); ++i) l += wa.data[i] * out.alpha.data[i];
    return l;
  };

  // dL/dcolor = wc -> foreground gets wc, bg_weight gets wc . bgcolor.
  Image gfg = wc;
  Image gbw(cam.width, cam.height, 1);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += wc.at(x, y, c) * rcfg.background_color[c];
      gbw.at(x, y) = s;
    }
  const MatX3 grad = rasterize_backward(state, mesh, tex, cam, rcfg, gfg, gbw, wa);

  // Screen-space probe of about 1e-3 px: world step = 1e-3 * z / fx.
  const double eps = 1e-3 * 1.0 / cam.fx;
  int checked = 0;
  for (int i = 0; i < mesh.vertex_count(); ++i)
    for (int c = 0; c < 3; ++c) {
      SurfaceState sp = state, sm = state;
      sp.positions(i, c) += eps;
      sm.positions(i, c) -= eps;
      const double fd = (loss_of(sp) - loss_of(sm)) / (2 * eps);
      if (std::abs(fd) < 1e-4 && std::abs(grad(i, c)) < 1e-4) continue;
      // image-sum loss picks up texel-boundary kinks; per-pixel checks
      // below carry the tight tolerance
      CHECK(testing::grad_close(grad(i, c), fd, 2e-2, 1e-3, 1e-2));
      ++checked;
    }
  CHECK(checked > 6);
}

TEST_CASE("rasterize backward: per-pixel intensity gradients at edge pixels") {
  const TemplateMesh mesh = grid_at(2, 2, 0.5, 0.5, Vec3(0.00737, -0.00412, 1));
  const Camera cam = testing::simple_camera(32, 32, 30);
  const TextureMap tex = checker_texture();
  const SurfaceState state = initial_state(mesh);
  RenderConfig cfg;
  cfg.gamma = 0.02;
  const RenderConfig rcfg = cfg.resolved(cam, state);
  const RenderOutput base = rasterize(state, mesh, tex, cam, rcfg);

  const double eps = 1e-3 / cam.fx;  // about 1e-3 px in screen space
  int tested = 0;
  for (int py = 0; py < cam.height && tested < 8; ++py)
    for (int px = 0; px < cam.width && tested < 8; ++px) {
      const double a = base.alpha.at(px, py);
      if (a < 0.05 || a > 0.95) continue;  // keep pixels near a silhouette edge
      ++tested;
      Image gfg(cam.width, cam.height, 3), gbw(cam.width, cam.height, 1),
          ga(cam.width, cam.height, 1);
      gfg.at(px, py, 1) = 1.0;
      const MatX3 grad = rasterize_backward(state, mesh, tex, cam, rcfg, gfg, gbw, ga);
      for (int i = 0; i < mesh.vertex_count(); ++i)
        for (int c = 0; c < 3; ++c) {
          SurfaceState sp = state, sm = state;
          sp.positions(i, c) += eps;
          sm.positions(i, c) -= eps;
          const double fd = (rasterize(sp, mesh, tex, cam, rcfg).foreground.at(px, py, 1) -
                             rasterize(sm, mesh, tex, cam, rcfg).foreground.at(px, py, 1)) /
                            (2 * eps);
          CHECK(testing::grad_close(grad(i, c), fd, 1e-2, 1e-6, 1e-4));
        }
    }
  CHECK(tested == 8);
}

TEST_CASE("gaussian filter: normalization and bounds") {
  Image constant(21, 17, 1, 0.37);
  const Image blurred = gaussian_filter(constant, 7.0);
  for (double v : blurred.data) CHECK(std::abs(v - 0.37) < 1e-12);

  Image impulse(64, 64, 1, 0.0);
  impulse.at(32, 32) = 1.0;
  const Image spread = gaussian_filter(impulse, 7.0);
  double sum = 0, maxv = 0;
  for (double v : spread.data) {
    sum += v;
    maxv = std::max(maxv, v);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(maxv <= 1.0);

  CHECK_THROWS_AS(gaussian_filter(constant, 0.0), Error);
}

TEST_CASE("render_depth: hard depth with z-order") {
  const TemplateMesh mesh = grid_at(2, 2, 2.0, 2.0, Vec3(0, 0, 1));
  const Camera cam = testing::simple_camera(32, 32, 30);
  const Image depth = render_depth(initial_state(mesh), mesh, cam);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(depth.at(x, y) == doctest::Approx(1.0).epsilon(1e-9));

  // Nearer triangle wins at overlap.
  MatX3 v(6, 3);
  v.row(0) = Vec3(-0.5, -0.5, 1.0);
  v.row(1) = Vec3(0.5, -0.5, 1.0);
  v.row(2) = Vec3(0.0, 0.5, 1.0);
  v.row(3) = Vec3(-0.5, -0.5, 0.8);
  v.row(4) = Vec3(0.5, -0.5, 0.8);
  v.row(5) = Vec3(0.0, 0.5, 0.8);
  Eigen::MatrixX3i f(2, 3);
  f.row(0) = Vec3i(0, 1, 2);
  f.row(1) = Vec3i(3, 4, 5);
  MatX2 uv = MatX2::Zero(6, 2);
  uv << 0, 0, 1, 0, 0.5, 1, 0, 0, 1, 0, 0.5, 1;
  const TemplateMesh two = build_template(v, f, uv);
  const Image d2 = render_depth(initial_state(two), two, cam);
  CHECK(d2.at(16, 16) == doctest::Approx(0.8).epsilon(1e-9));

  Eigen::MatrixX3i none(0, 3);
  const TemplateMesh empty = build_template(v, none, uv);
  const Image d0 = render_depth(initial_state(empty), empty, cam);
  for (double z : d0.data) CHECK(std::isinf(z));
}

TEST_CASE("texture acquisition reproduces the observed frame") {
  const TemplateMesh mesh = grid_at(6, 6, 0.6, 0.6, Vec3(0, 0, 1));
  const Camera cam = testing::simple_camera(96, 96, 100);
  const SurfaceState state = initial_state(mesh);

  // Observed frame: render with a known texture.
  const TextureMap truth = checker_texture(64, 8);
  RenderConfig cfg;
  cfg.background_color = Vec3(0.05, 0.05, 0.05);
  const RenderOutput observed = rasterize(state, mesh, truth, cam, cfg);

  const TextureMap acquired = acquire_texture(state, mesh, observed.color, cam, 64);
  const RenderOutput replay = rasterize(state, mesh, acquired, cam, cfg);

  double mae = 0;
  int count = 0;
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      if (observed.alpha.at(x, y) < 0.5) continue;
      for (int c = 0; c < 3; ++c) {
        mae += std::abs(replay.color.at(x, y, c) - observed.color.at(x, y, c));
        ++count;
      }
    }
  mae /= count;
  CHECK(mae < 0.02);
}
