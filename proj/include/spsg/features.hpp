#pragma once

#include <vector>

#include "spsg/image.hpp"
#include "spsg/superpixels.hpp"
#include "spsg/types.hpp"

namespace spsg {

enum class FilterKind { kIntensity, kLaplacianOfGaussian };

/// One filter of the bank. Intensity filters pass a Lab channel through;
/// LoG filters convolve the L channel at the given scale.
struct FilterSpec {
  FilterKind kind = FilterKind::kIntensity;
  int channel = 0;     // Lab channel index for intensity filters
  double scale = 1.0;  // Gaussian sigma in pixels for LoG filters

  bool operator==(const FilterSpec&) const = default;
};

struct FilterBank {
  std::vector<FilterSpec> filters;

  /// L, a, b pass-through followed by LoG at sigma 1 and 2 on L.
  static FilterBank standard();
  void validate() const;
};

struct LshParams {
  int window_radius = 9;
  int bins_per_filter = 11;
  FilterBank bank = FilterBank::standard();

  void validate() const;
  int dimension() const { return bins_per_filter * static_cast<int>(bank.filters.size()); }
};

/// Per-pixel feature vectors; column (y * width + x) holds pixel (y, x).
struct PixelFeatureField {
  int height = 0;
  int width = 0;
  Matrix data;  // d x (height * width)

  int dimension() const { return static_cast<int>(data.rows()); }
};

/// Sampled LoG kernel of half-width ceil(3 sigma), shifted to zero mean so a
/// constant input yields a zero response.
Raster log_kernel(double sigma);

/// 2-D correlation with a symmetric kernel, reflecting at the borders
/// (edge pixel repeated: ... c b a | a b c ...).
Raster convolve_reflect(const Raster& input, const Raster& kernel);

/// Filter responses for an RGB image in [0, 1]; the image is converted to Lab
/// first. One raster per filter, in bank order.
std::vector<Raster> compute_filter_responses(const ColorImage& rgb, const FilterBank& bank);

/// Local spectral histograms: for every pixel, the concatenation over filters
/// of the normalized histogram of responses in the (2r+1)^2 window clipped at
/// the image border. Bins are uniform over each raster's [min, max].
PixelFeatureField compute_lsh_features(const std::vector<Raster>& responses, const LshParams& params);

/// Mean pixel feature of each superpixel; column i belongs to label i.
Matrix superpixel_features(const PixelFeatureField& field, const SuperpixelMap& map);

}  // namespace spsg
