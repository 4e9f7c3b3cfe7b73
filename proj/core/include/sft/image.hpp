#pragma once

#include "sft/common.hpp"

#include <string>
#include <vector>

namespace sft {

// Row-major, channel-interleaved float image with values in [0,1].
// Channels: 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// 8-bit PNG IO. Gray and RGB(A) files load as 1- or 3-channel images
// (alpha dropped), values scaled to [0,1]. Saves are atomic.
Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);

// Clamp-to-edge bilinear lookup at continuous pixel coordinates, where
// (0,0) is the center of the top-left pixel.
void bilinear_sample(const Image& img, double x, double y, double* out);

// d(sample)/dx and d(sample)/dy at the same location, one entry per channel.
void bilinear_sample_grad(const Image& img, double x, double y, double* dx, double* dy);

}  // namespace sft
