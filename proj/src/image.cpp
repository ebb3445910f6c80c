#include "spsg/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace spsg {

ColorImage::ColorImage(int height, int width) {
  for (auto& c : channels) c = Raster::Zero(height, width);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw std::runtime_error(msg); }
void png_warning_fn(png_structp, png_const_charp) {}

// Decoded PNG: interleaved samples, one or two bytes each.
struct PngData {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

PngData decode_png(const std::string& path) {
  FilePtr file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) throw std::runtime_error("libpng initialization failed");
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  PngData out;
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(out.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (out.bit_depth == 16)
      out.samples[k] = static_cast<std::uint16_t>((buffer[2 * k] << 8) | buffer[2 * k + 1]);
    else
      out.samples[k] = buffer[k];
  }
  return out;
}

void encode_png(const std::string& path, int height, int width, int channels, int bit_depth,
                const std::vector<std::uint16_t>& samples) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) throw std::runtime_error("libpng initialization failed");
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int bytes = bit_depth / 8;
  std::vector<png_byte> row(static_cast<std::size_t>(width) * channels * bytes);
  for (int y = 0; y < height; ++y) {
    for (int k = 0; k < width * channels; ++k) {
      const std::uint16_t v = samples[static_cast<std::size_t>(y) * width * channels + k];
      if (bytes == 2) {
        row[2 * k] = static_cast<png_byte>(v >> 8);
        row[2 * k + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        row[k] = static_cast<png_byte>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

// Netpbm header token, skipping whitespace and '#' comments.
long read_pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw std::runtime_error("truncated PPM header");
  return std::stol(tok);
}

ColorImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '6' && magic[1] != '3'))
    throw std::runtime_error(path + ": unsupported PPM variant");
  const long width = read_pnm_token(in);
  const long height = read_pnm_token(in);
  const long maxval = read_pnm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error(path + ": bad PPM header");

  ColorImage img(static_cast<int>(height), static_cast<int>(width));
  const bool wide = maxval > 255;
  for (long y = 0; y < height; ++y) {
    for (long x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        long v;
        if (magic[1] == '3') {
          v = read_pnm_token(in);
        } else if (wide) {
          unsigned char b[2];
          in.read(reinterpret_cast<char*>(b), 2);
          v = (b[0] << 8) | b[1];
        } else {
          unsigned char b;
          in.read(reinterpret_cast<char*>(&b), 1);
          v = b;
        }
        if (!in) throw std::runtime_error(path + ": truncated PPM data");
        img.channels[c](y, x) = static_cast<double>(v) / static_cast<double>(maxval);
      }
    }
  }
  return img;
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in && png_sig_cmp(sig, 0, 8) == 0;
}

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

ColorImage read_image(const std::string& path) {
  if (!has_png_signature(path)) return read_ppm(path);

  const PngData data = decode_png(path);
  const double maxval = data.bit_depth == 16 ? 65535.0 : 255.0;
  ColorImage img(data.height, data.width);
  const bool gray = data.channels <= 2;
  for (int y = 0; y < data.height; ++y) {
    for (int x = 0; x < data.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * data.width + x) * data.channels;
      for (int c = 0; c < 3; ++c) img.channels[c](y, x) = data.samples[base + (gray ? 0 : c)] / maxval;
    }
  }
  return img;
}

void write_png_rgb(const std::string& path, const ColorImage& rgb) {
  const int h = rgb.height(), w = rgb.width();
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(rgb.channels[c](y, x), 0.0, 1.0);
        samples[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<std::uint16_t>(std::lround(v * 255.0));
      }
  encode_png(path, h, w, 3, 8, samples);
}

GrayPlane read_png_gray(const std::string& path) {
  const PngData data = decode_png(path);
  GrayPlane plane;
  plane.height = data.height;
  plane.width = data.width;
  plane.bit_depth = data.bit_depth;
  plane.values.resize(static_cast<std::size_t>(data.height) * data.width);
  for (std::size_t k = 0; k < plane.values.size(); ++k) plane.values[k] = data.samples[k * data.channels];
  return plane;
}

void write_png_gray16(const std::string& path, const GrayPlane& plane) {
  if (plane.values.size() != static_cast<std::size_t>(plane.height) * plane.width)
    throw std::invalid_argument("gray plane size does not match its dimensions");
  encode_png(path, plane.height, plane.width, 1, 16, plane.values);
}

ColorImage rgb_to_lab(const ColorImage& rgb) {
  if (rgb.empty()) throw std::invalid_argument("empty image");
  const int h = rgb.height(), w = rgb.width();
  ColorImage lab(h, w);
  // D65 reference white
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double c[3];
      for (int k = 0; k < 3; ++k) {
        const double v = rgb.channels[k](y, x);
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite pixel value");
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("pixel value outside [0, 1]");
        c[k] = srgb_to_linear(v);
      }
      const double X = 0.4124564 * c[0] + 0.3575761 * c[1] + 0.1804375 * c[2];
      const double Y = 0.2126729 * c[0] + 0.7151522 * c[1] + 0.0721750 * c[2];
      const double Z = 0.0193339 * c[0] + 0.1191920 * c[1] + 0.9503041 * c[2];
      const double fx = lab_f(X / xn), fy = lab_f(Y / yn), fz = lab_f(Z / zn);
      lab.channels[0](y, x) = 116.0 * fy - 16.0;
      lab.channels[1](y, x) = 500.0 * (fx - fy);
      lab.channels[2](y, x) = 200.0 * (fy - fz);
    }
  }
  return lab;
}

}  // namespace spsg
