#include "sft/image.hpp"

#include "sft/config_file.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>

namespace sft {

namespace {

struct PngReadState {
  const unsigned char* data;
  size_t size;
  size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* s = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (s->offset + n > s->size) png_error(png, "unexpected end of PNG stream");
  std::memcpy(out, s->data + s->offset, n);
  s->offset += n;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), n);
}

void png_flush_noop(png_structp) {}

}  // namespace

Image load_png(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8))
    throw ParseError(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw Error("libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": PNG decode failed");
  }

  PngReadState state{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  png_set_expand(png);
  png_set_strip_alpha(png);
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int c = static_cast<int>(png_get_channels(png, info));
  if (c != 1 && c != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": unsupported channel count after expansion");
  }

  std::vector<unsigned char> row(static_cast<size_t>(w) * c);
  Image img(w, h, c);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (size_t i = 0; i < row.size(); ++i)
      img.data[static_cast<size_t>(y) * w * c + i] = row[i] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ShapeMismatch("save_png: channels must be 1 or 3");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw Error("libpng init failed");
  std::string bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(path + ": PNG encode failed");
  }
  png_set_write_fn(png, &bytes, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (size_t i = 0; i < row.size(); ++i) {
      const double v = img.data[static_cast<size_t>(y) * img.width * img.channels + i];
      row[i] = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file_atomic(path, bytes);
}

void bilinear_sample(const Image& img, double x, double y, double* out) {
  const double fx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const double fy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double ax = fx - x0, ay = fy - y0;
  for (int c = 0; c < img.channels; ++c) {
    const double top = (1 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c);
    const double bot = (1 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c);
    out[c] = (1 - ay) * top + ay * bot;
  }
}

void bilinear_sample_grad(const Image& img, double x, double y, double* dx, double* dy) {
  const bool inx = x > 0.0 && x < img.width - 1;
  const bool iny = y > 0.0 && y < img.height - 1;
  const double fx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const double fy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double ax = fx - x0, ay = fy - y0;
  for (int c = 0; c < img.channels; ++c) {
    const double v00 = img.at(x0, y0, c), v10 = img.at(x1, y0, c);
    const double v01 = img.at(x0, y1, c), v11 = img.at(x1, y1, c);
    dx[c] = inx ? (1 - ay) * (v10 - v00) + ay * (v11 - v01) : 0.0;
    dy[c] = iny ? (1 - ax) * (v01 - v00) + ax * (v11 - v10) : 0.0;
  }
}

}  // namespace sft
