#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spsg/types.hpp"

namespace spsg {

/// Three-channel image stored as one raster per channel. For RGB images the
/// values are in [0, 1]; for Lab images L is in [0, 100] and a, b roughly in
/// [-128, 127].
struct ColorImage {
  std::array<Raster, 3> channels;

  ColorImage() = default;
  ColorImage(int height, int width);

  int height() const { return static_cast<int>(channels[0].rows()); }
  int width() const { return static_cast<int>(channels[0].cols()); }
  bool empty() const { return channels[0].size() == 0; }
};

/// Reads a PNG (8 or 16 bit, gray/RGB/RGBA/palette) or binary/ASCII PPM into
/// an RGB image with values in [0, 1].
ColorImage read_image(const std::string& path);

/// Writes an 8-bit RGB PNG; values are clamped to [0, 1].
void write_png_rgb(const std::string& path, const ColorImage& rgb);

/// Raw single-channel PNG samples (gray value of the first channel), keeping
/// the file's bit depth. Used for label maps and boundary side files.
struct GrayPlane {
  int height = 0;
  int width = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> values;  // row-major
};

GrayPlane read_png_gray(const std::string& path);
void write_png_gray16(const std::string& path, const GrayPlane& plane);

/// sRGB (D65) to CIE Lab. Throws on non-finite values or values outside [0, 1].
ColorImage rgb_to_lab(const ColorImage& rgb);

}  // namespace spsg
