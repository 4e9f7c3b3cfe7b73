#pragma once

#include "sft/geometry.hpp"

namespace sft {

struct RenderConfig {
  double sigma = 0;             // coverage sharpness, px^2; 0 = 1e-4 * (min image dim)^2
  double gamma = 0;             // depth softmax temperature, m; 0 = 1e-4 * (scene depth range)
  Vec3 background_color = Vec3::Zero();
  double background_depth = 0;  // compositing depth of the background; 0 = auto
  double coverage_cutoff = 1e-5;  // triangles with lower coverage do not touch a pixel

  // Fills the zero fields from the camera and a reference state (defaults
  // are resolved once, not per frame, so gradients never flow through them).
  RenderConfig resolved(const Camera& camera, const SurfaceState& reference) const;
};

struct RenderOutput {
  Image color;       // H x W x 3, composited over background_color
  Image alpha;       // H x W, soft silhouette 1 - prod(1 - D_j)
  // Compositing internals, kept so losses can substitute their own
  // background plate: color = foreground + bg_weight * background_color.
  Image foreground;  // premultiplied triangle color sum
  Image bg_weight;   // softmax weight of the background
};

// Probabilistic soft rasterization with softmax depth compositing and
// perspective-correct texture lookup.
RenderOutput rasterize(const SurfaceState& state, const TemplateMesh& mesh,
                       const TextureMap& texture, const Camera& camera,
                       const RenderConfig& config);

// Reverse pass: pixel adjoints (any may be empty) back to world-space
// vertex position gradients. Deterministic regardless of thread count.
MatX3 rasterize_backward(const SurfaceState& state, const TemplateMesh& mesh,
                         const TextureMap& texture, const Camera& camera,
                         const RenderConfig& config, const Image& grad_foreground,
                         const Image& grad_bg_weight, const Image& grad_alpha);

// Separable Gaussian blur, truncated at radius ceil(3 sigma), kernel
// normalized, reflect padding.
Image gaussian_filter(const Image& input, double sigma);

// Hard nearest-triangle depth map; background pixels get +infinity.
Image render_depth(const SurfaceState& state, const TemplateMesh& mesh, const Camera& camera);

// Builds the texture atlas by scattering frame colors through the hard
// rasterization of the given state; holes take the nearest valid texel.
TextureMap acquire_texture(const SurfaceState& state, const TemplateMesh& mesh,
                           const Image& frame, const Camera& camera, int texture_size);

}  // namespace sft
