#include "sft/softrender.hpp"

#include "sft/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

namespace sft {

namespace {

template <typename T>
T softplus(const T& x) {
  const double v = value_of(x);
  if (v > 30.0) return x;
  if (v < -30.0) return exp(x);
  return log(1.0 + exp(x));
}

template <typename T>
T clamp01(const T& x) {
  if (value_of(x) < 0.0) return T(0.0);
  if (value_of(x) > 1.0) return T(1.0);
  return x;
}

// Everything one (pixel, triangle) pair contributes, with the scalar type
// carrying derivatives in the backward pass.
template <typename T>
struct Fragment {
  bool valid = false;
  T log_cov;  // log D
  T depth;    // perspective-correct camera depth at the sample point
  T u, v;     // texture coordinates at the sample point
};

template <typename T>
T cross2(const T& ax, const T& ay, const T& bx, const T& by) {
  return ax * by - ay * bx;
}

// Squared distance and clamped parameter of p against segment (a, b).
template <typename T>
void point_segment(const T& px, const T& py, const T& ax, const T& ay, const T& bx, const T& by,
                   T& d2, T& t) {
  const T ex = bx - ax, ey = by - ay;
  const T len2 = ex * ex + ey * ey;
  t = clamp01((((px - ax) * ex + (py - ay) * ey)) / (len2 + 1e-300));
  const T dx = px - (ax + ex * t), dy = py - (ay + ey * t);
  d2 = dx * dx + dy * dy;
}

template <typename T>
Fragment<T> eval_fragment(double px, double py, const T sx[3], const T sy[3], const T sz[3],
                          const double uvs[3][2], const RenderConfig& cfg, double log_cutoff) {
  Fragment<T> frag;
  const T denom = cross2(sx[1] - sx[0], sy[1] - sy[0], sx[2] - sx[0], sy[2] - sy[0]);
  if (std::abs(value_of(denom)) < 1e-12) return frag;  // edge-on in projection

  const T w1 = cross2(T(px) - sx[0], T(py) - sy[0], sx[2] - sx[0], sy[2] - sy[0]) / denom;
  const T w2 = cross2(sx[1] - sx[0], sy[1] - sy[0], T(px) - sx[0], T(py) - sy[0]) / denom;
  const T w0 = 1.0 - w1 - w2;
  const bool inside =
      value_of(w0) >= 0.0 && value_of(w1) >= 0.0 && value_of(w2) >= 0.0;

  // Distance to the triangle boundary (always through the segments so the
  // value is continuous across the inside/outside transition).
  T best_d2, best_t;
  int best_edge = 0;
  {
    T d2, t;
    point_segment(T(px), T(py), sx[0], sy[0], sx[1], sy[1], best_d2, best_t);
    point_segment(T(px), T(py), sx[1], sy[1], sx[2], sy[2], d2, t);
    if (value_of(d2) < value_of(best_d2)) {
      best_d2 = d2;
      best_t = t;
      best_edge = 1;
    }
    point_segment(T(px), T(py), sx[2], sy[2], sx[0], sy[0], d2, t);
    if (value_of(d2) < value_of(best_d2)) {
      best_d2 = d2;
      best_t = t;
      best_edge = 2;
    }
  }

  const T signed_t = inside ? best_d2 / cfg.sigma : -best_d2 / cfg.sigma;
  frag.log_cov = -softplus(-signed_t);
  if (!inside && value_of(frag.log_cov) < log_cutoff) return frag;

  // Sample point barycentrics: interior point or closest boundary point.
  T b[3];
  if (inside) {
    b[0] = w0;
    b[1] = w1;
    b[2] = w2;
  } else {
    const int e0 = best_edge, e1 = (best_edge + 1) % 3;
    b[0] = T(0.0);
    b[1] = T(0.0);
    b[2] = T(0.0);
    b[e0] = 1.0 - best_t;
    b[e1] = best_t;
  }

  // Perspective-correct interpolation.
  const T winv = b[0] / sz[0] + b[1] / sz[1] + b[2] / sz[2];
  frag.depth = 1.0 / winv;
  frag.u = (b[0] * uvs[0][0] / sz[0] + b[1] * uvs[1][0] / sz[1] + b[2] * uvs[2][0] / sz[2]) *
           frag.depth;
  frag.v = (b[0] * uvs[0][1] / sz[0] + b[1] * uvs[1][1] / sz[1] + b[2] * uvs[2][1] / sz[2]) *
           frag.depth;
  frag.valid = true;
  return frag;
}

struct ScreenGeometry {
  MatX2 screen;
  VecX depth;
  double log_cutoff = 0;
  double halo = 0;  // pixels beyond this distance never see the triangle
};

ScreenGeometry project_screen(const SurfaceState& state, const Camera& camera,
                              const RenderConfig& cfg) {
  ScreenGeometry g;
  project(state.positions, camera, g.screen, g.depth);
  g.log_cutoff = std::log(cfg.coverage_cutoff);
  g.halo = std::sqrt(cfg.sigma * std::log(1.0 / cfg.coverage_cutoff - 1.0)) + 1.0;
  return g;
}

// Per-pixel triangle lists from bounding boxes padded by the halo.
std::vector<std::vector<int>> bin_triangles(const TemplateMesh& mesh, const ScreenGeometry& g,
                                            int width, int height) {
  std::vector<std::vector<int>> bins(static_cast<size_t>(width) * height);
  for (int f = 0; f < mesh.face_count(); ++f) {
    double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces(f, k);
      x0 = std::min(x0, g.screen(v, 0));
      x1 = std::max(x1, g.screen(v, 0));
      y0 = std::min(y0, g.screen(v, 1));
      y1 = std::max(y1, g.screen(v, 1));
    }
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0 - g.halo)));
    const int ix1 = std::min(width - 1, static_cast<int>(std::ceil(x1 + g.halo)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0 - g.halo)));
    const int iy1 = std::min(height - 1, static_cast<int>(std::ceil(y1 + g.halo)));
    for (int y = iy0; y <= iy1; ++y)
      for (int x = ix0; x <= ix1; ++x) bins[static_cast<size_t>(y) * width + x].push_back(f);
  }
  return bins;
}

struct PixelComposite {
  std::vector<int> faces;
  std::vector<Fragment<double>> frags;
  std::vector<Vec3> colors;
  std::vector<double> weights;  // softmax including background at the end
  double bg_weight = 1;
  double alpha = 0;
};

PixelComposite composite_pixel(int px_x, int px_y, const std::vector<int>& bin,
                               const TemplateMesh& mesh, const TextureMap& texture,
                               const ScreenGeometry& g, const RenderConfig& cfg) {
  PixelComposite out;
  const double px = px_x + 0.5, py = px_y + 0.5;
  for (int f : bin) {
    double sx[3], sy[3], sz[3], uvs[3][2];
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces(f, k);
      sx[k] = g.screen(v, 0);
      sy[k] = g.screen(v, 1);
      sz[k] = g.depth[v];
      uvs[k][0] = mesh.uvs(v, 0);
      uvs[k][1] = mesh.uvs(v, 1);
    }
    const Fragment<double> frag = eval_fragment(px, py, sx, sy, sz, uvs, cfg, g.log_cutoff);
    if (!frag.valid) continue;
    double rgb[3];
    texture.sample(frag.u, frag.v, rgb);
    out.faces.push_back(f);
    out.frags.push_back(frag);
    out.colors.emplace_back(rgb[0], rgb[1], rgb[2]);
  }

  const double bg_logit = -cfg.background_depth / cfg.gamma;
  double max_logit = bg_logit;
  std::vector<double> logits(out.frags.size());
  for (size_t i = 0; i < out.frags.size(); ++i) {
    logits[i] = out.frags[i].log_cov - out.frags[i].depth / cfg.gamma;
    max_logit = std::max(max_logit, logits[i]);
  }
  double z = std::exp(bg_logit - max_logit);
  const double bg_exp = z;
  out.weights.resize(out.frags.size());
  for (size_t i = 0; i < out.frags.size(); ++i) {
    out.weights[i] = std::exp(logits[i] - max_logit);
    z += out.weights[i];
  }
  for (auto& w : out.weights) w /= z;
  out.bg_weight = bg_exp / z;

  double survive = 1;
  for (const auto& frag : out.frags) survive *= 1.0 - std::exp(frag.log_cov);
  out.alpha = 1.0 - survive;
  return out;
}

}  // namespace

RenderConfig RenderConfig::resolved(const Camera& camera, const SurfaceState& reference) const {
  RenderConfig out = *this;
  MatX2 screen;
  VecX depth;
  project(reference.positions, camera, screen, depth);
  const double zmin = depth.minCoeff(), zmax = depth.maxCoeff();
  const double range = std::max(zmax - zmin, 1e-2);
  const double min_dim = std::min(camera.width, camera.height);
  if (out.sigma <= 0) out.sigma = 1e-4 * min_dim * min_dim;
  if (out.gamma <= 0) out.gamma = 1e-4 * range;
  if (out.background_depth <= 0) out.background_depth = zmax + 0.2 * range;
  return out;
}

RenderOutput rasterize(const SurfaceState& state, const TemplateMesh& mesh,
                       const TextureMap& texture, const Camera& camera,
                       const RenderConfig& config) {
  if (!texture.valid()) throw ShapeMismatch("rasterize: texture must be 3-channel");
  const RenderConfig cfg = config.resolved(camera, state);
  const ScreenGeometry g = project_screen(state, camera, cfg);
  const auto bins = bin_triangles(mesh, g, camera.width, camera.height);

  RenderOutput out;
  out.color = Image(camera.width, camera.height, 3);
  out.alpha = Image(camera.width, camera.height, 1);
  out.foreground = Image(camera.width, camera.height, 3);
  out.bg_weight = Image(camera.width, camera.height, 1, 1.0);

  parallel_for(camera.height, [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < camera.width; ++x) {
        const auto& bin = bins[static_cast<size_t>(y) * camera.width + x];
        const PixelComposite pc = composite_pixel(x, y, bin, mesh, texture, g, cfg);
        Vec3 fg = Vec3::Zero();
        for (size_t i = 0; i < pc.colors.size(); ++i) fg += pc.weights[i] * pc.colors[i];
        for (int c = 0; c < 3; ++c) {
          out.foreground.at(x, y, c) = fg[c];
          out.color.at(x, y, c) = fg[c] + pc.bg_weight * cfg.background_color[c];
        }
        out.bg_weight.at(x, y) = pc.bg_weight;
        out.alpha.at(x, y) = pc.alpha;
      }
  });
  return out;
}

MatX3 rasterize_backward(const SurfaceState& state, const TemplateMesh& mesh,
                         const TextureMap& texture, const Camera& camera,
                         const RenderConfig& config, const Image& grad_foreground,
                         const Image& grad_bg_weight, const Image& grad_alpha) {
  const RenderConfig cfg = config.resolved(camera, state);
  const ScreenGeometry g = project_screen(state, camera, cfg);
  const auto bins = bin_triangles(mesh, g, camera.width, camera.height);
  const int nv = mesh.vertex_count();

  const bool has_fg = grad_foreground.pixel_count() > 0;
  const bool has_bw = grad_bg_weight.pixel_count() > 0;
  const bool has_alpha = grad_alpha.pixel_count() > 0;

  // One screen-space gradient accumulator per worker; reduced in worker
  // order so the result is independent of the schedule.
  const int workers = std::min(thread_count(), camera.height);
  std::vector<MatX3> partial(workers, MatX3::Zero(nv, 3));  // (d/dsx, d/dsy, d/dsz)

  auto process_rows = [&](int w, int y_lo, int y_hi) {
    MatX3& acc = partial[w];
    using D9 = Dual<9, double>;
    for (int y = y_lo; y < y_hi; ++y)
      for (int x = 0; x < camera.width; ++x) {
        const auto& bin = bins[static_cast<size_t>(y) * camera.width + x];
        if (bin.empty()) continue;
        const PixelComposite pc = composite_pixel(x, y, bin, mesh, texture, g, cfg);
        if (pc.faces.empty()) continue;

        Vec3 gF = Vec3::Zero();
        double gB = 0, gA = 0;
        if (has_fg)
          for (int c = 0; c < 3; ++c) gF[c] = grad_foreground.at(x, y, c);
        if (has_bw) gB = grad_bg_weight.at(x, y);
        if (has_alpha) gA = grad_alpha.at(x, y);
        if (gF.isZero() && gB == 0 && gA == 0) continue;

        Vec3 fg = Vec3::Zero();
        for (size_t i = 0; i < pc.colors.size(); ++i) fg += pc.weights[i] * pc.colors[i];

        const double px = x + 0.5, py = y + 0.5;
        for (size_t i = 0; i < pc.faces.size(); ++i) {
          const int f = pc.faces[i];
          D9 sx[3], sy[3], sz[3];
          double uvs[3][2];
          for (int k = 0; k < 3; ++k) {
            const int v = mesh.faces(f, k);
            sx[k] = D9(g.screen(v, 0));
            sx[k].d[3 * k] = 1;
            sy[k] = D9(g.screen(v, 1));
            sy[k].d[3 * k + 1] = 1;
            sz[k] = D9(g.depth[v]);
            sz[k].d[3 * k + 2] = 1;
            uvs[k][0] = mesh.uvs(v, 0);
            uvs[k][1] = mesh.uvs(v, 1);
          }
          const Fragment<D9> frag = eval_fragment(px, py, sx, sy, sz, uvs, cfg, g.log_cutoff);
          if (!frag.valid) continue;

          // Softmax adjoints: dL/dlogit, dL/dcolor, dL/dD.
          const double wj = pc.weights[i];
          double gl = 0;
          Vec3 gc = Vec3::Zero();
          for (int c = 0; c < 3; ++c) {
            gl += gF[c] * wj * (pc.colors[i][c] - fg[c]);
            gc[c] = gF[c] * wj;
          }
          gl -= gB * pc.bg_weight * wj;

          double g_logD = gl;  // logit = logD - depth / gamma
          const double g_depth = -gl / cfg.gamma;
          if (gA != 0) {
            double prod_others = 1;
            for (size_t m = 0; m < pc.frags.size(); ++m)
              if (m != i) prod_others *= 1.0 - std::exp(pc.frags[m].log_cov);
            const double D = std::exp(frag.log_cov.v);
            g_logD += gA * prod_others * D;
          }

          double du[3], dv[3];
          texture.sample_grad(frag.u.v, frag.v.v, du, dv);
          double gu = 0, gv = 0;
          for (int c = 0; c < 3; ++c) {
            gu += gc[c] * du[c];
            gv += gc[c] * dv[c];
          }

          for (int k = 0; k < 3; ++k) {
            const int v = mesh.faces(f, k);
            for (int c = 0; c < 3; ++c) {
              const int slot = 3 * k + c;
              acc(v, c) += g_logD * frag.log_cov.d[slot] + g_depth * frag.depth.d[slot] +
                           gu * frag.u.d[slot] + gv * frag.v.d[slot];
            }
          }
        }
      }
  };

  if (workers <= 1) {
    process_rows(0, 0, camera.height);
  } else {
    std::vector<std::thread> pool;
    const int per = (camera.height + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = w * per, hi = std::min(camera.height, lo + per);
      if (lo >= hi) break;
      pool.emplace_back([&process_rows, w, lo, hi] { process_rows(w, lo, hi); });
    }
    for (auto& t : pool) t.join();
  }
  MatX3 screen_grad = MatX3::Zero(nv, 3);
  for (const auto& p : partial) screen_grad += p;

  // Chain screen-space gradients through the projection and extrinsics.
  MatX3 world_grad = MatX3::Zero(nv, 3);
  for (int i = 0; i < nv; ++i) {
    const Vec3 pc = camera.to_camera(state.positions.row(i));
    const double z = pc.z();
    Vec3 gcam;
    gcam.x() = screen_grad(i, 0) * camera.fx / z;
    gcam.y() = screen_grad(i, 1) * camera.fy / z;
    gcam.z() = -screen_grad(i, 0) * camera.fx * pc.x() / (z * z) -
               screen_grad(i, 1) * camera.fy * pc.y() / (z * z) + screen_grad(i, 2);
    world_grad.row(i) = (camera.rotation.transpose() * gcam).transpose();
  }
  return world_grad;
}

Image gaussian_filter(const Image& input, double sigma) {
  if (!(sigma > 0)) throw Error("gaussian_filter: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  Image tmp(input.width, input.height, input.channels);
  for (int y = 0; y < input.height; ++y)
    for (int x = 0; x < input.width; ++x)
      for (int c = 0; c < input.channels; ++c) {
        double acc = 0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * input.at(reflect(x + k, input.width), y, c);
        tmp.at(x, y, c) = acc;
      }
  Image out(input.width, input.height, input.channels);
  for (int y = 0; y < input.height; ++y)
    for (int x = 0; x < input.width; ++x)
      for (int c = 0; c < input.channels; ++c) {
        double acc = 0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * tmp.at(x, reflect(y + k, input.height), c);
        out.at(x, y, c) = acc;
      }
  return out;
}

Image render_depth(const SurfaceState& state, const TemplateMesh& mesh, const Camera& camera) {
  MatX2 screen;
  VecX depth;
  project(state.positions, camera, screen, depth);
  Image out(camera.width, camera.height, 1, std::numeric_limits<double>::infinity());

  for (int f = 0; f < mesh.face_count(); ++f) {
    double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
    double sx[3], sy[3], sz[3];
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces(f, k);
      sx[k] = screen(v, 0);
      sy[k] = screen(v, 1);
      sz[k] = depth[v];
      x0 = std::min(x0, sx[k]);
      x1 = std::max(x1, sx[k]);
      y0 = std::min(y0, sy[k]);
      y1 = std::max(y1, sy[k]);
    }
    const double denom = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
    if (std::abs(denom) < 1e-12) continue;
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int ix1 = std::min(camera.width - 1, static_cast<int>(std::ceil(x1)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int iy1 = std::min(camera.height - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y)
      for (int x = ix0; x <= ix1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double w1 =
            ((px - sx[0]) * (sy[2] - sy[0]) - (py - sy[0]) * (sx[2] - sx[0])) / denom;
        const double w2 =
            ((sx[1] - sx[0]) * (py - sy[0]) - (sy[1] - sy[0]) * (px - sx[0])) / denom;
        const double w0 = 1.0 - w1 - w2;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double z = 1.0 / (w0 / sz[0] + w1 / sz[1] + w2 / sz[2]);
        if (z < out.at(x, y)) out.at(x, y) = z;
      }
  }
  return out;
}

TextureMap acquire_texture(const SurfaceState& state, const TemplateMesh& mesh,
                           const Image& frame, const Camera& camera, int texture_size) {
  if (frame.channels != 3) throw ShapeMismatch("acquire_texture: frame must be RGB");
  MatX2 screen;
  VecX depth;
  project(state.positions, camera, screen, depth);

  const int S = texture_size;
  Image sums(S, S, 3);
  std::vector<double> counts(static_cast<size_t>(S) * S, 0.0);
  const Image zbuf = render_depth(state, mesh, camera);

  for (int f = 0; f < mesh.face_count(); ++f) {
    double sx[3], sy[3], sz[3], uu[3], vv[3];
    double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces(f, k);
      sx[k] = screen(v, 0);
      sy[k] = screen(v, 1);
      sz[k] = depth[v];
      uu[k] = mesh.uvs(v, 0);
      vv[k] = mesh.uvs(v, 1);
      x0 = std::min(x0, sx[k]);
      x1 = std::max(x1, sx[k]);
      y0 = std::min(y0, sy[k]);
      y1 = std::max(y1, sy[k]);
    }
    const double denom = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
    if (std::abs(denom) < 1e-12) continue;
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int ix1 = std::min(camera.width - 1, static_cast<int>(std::ceil(x1)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int iy1 = std::min(camera.height - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y)
      for (int x = ix0; x <= ix1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double w1 =
            ((px - sx[0]) * (sy[2] - sy[0]) - (py - sy[0]) * (sx[2] - sx[0])) / denom;
        const double w2 =
            ((sx[1] - sx[0]) * (py - sy[0]) - (sy[1] - sy[0]) * (px - sx[0])) / denom;
        const double w0 = 1.0 - w1 - w2;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double z = 1.0 / (w0 / sz[0] + w1 / sz[1] + w2 / sz[2]);
        if (z > zbuf.at(x, y) + 1e-9) continue;  // occluded by a nearer face
        const double u = (w0 * uu[0] / sz[0] + w1 * uu[1] / sz[1] + w2 * uu[2] / sz[2]) * z;
        const double v = (w0 * vv[0] / sz[0] + w1 * vv[1] / sz[1] + w2 * vv[2] / sz[2]) * z;
        const int tx = std::clamp(static_cast<int>(std::lround(u * (S - 1))), 0, S - 1);
        const int ty = std::clamp(static_cast<int>(std::lround((1.0 - v) * (S - 1))), 0, S - 1);
        for (int c = 0; c < 3; ++c) sums.at(tx, ty, c) += frame.at(x, y, c);
        counts[static_cast<size_t>(ty) * S + tx] += 1.0;
      }
  }

  TextureMap tex;
  tex.image = Image(S, S, 3);
  std::deque<std::pair<int, int>> queue;
  std::vector<int> dist(static_cast<size_t>(S) * S, -1);
  for (int ty = 0; ty < S; ++ty)
    for (int tx = 0; tx < S; ++tx) {
      const size_t idx = static_cast<size_t>(ty) * S + tx;
      if (counts[idx] > 0) {
        for (int c = 0; c < 3; ++c) tex.image.at(tx, ty, c) = sums.at(tx, ty, c) / counts[idx];
        dist[idx] = 0;
        queue.emplace_back(tx, ty);
      }
    }
  // Nearest-valid-texel hole fill, breadth first.
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [tx, ty] = queue.front();
    queue.pop_front();
    for (int n = 0; n < 4; ++n) {
      const int nx = tx + dx[n], ny = ty + dy[n];
      if (nx < 0 || nx >= S || ny < 0 || ny >= S) continue;
      const size_t nidx = static_cast<size_t>(ny) * S + nx;
      if (dist[nidx] >= 0) continue;
      dist[nidx] = dist[static_cast<size_t>(ty) * S + tx] + 1;
      for (int c = 0; c < 3; ++c) tex.image.at(nx, ny, c) = tex.image.at(tx, ty, c);
      queue.emplace_back(nx, ny);
    }
  }
  return tex;
}

}  // namespace sft
