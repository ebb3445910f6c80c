#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spsg/image.hpp"
#include "spsg/types.hpp"

namespace spsg {

/// Per-pixel region ids. Valid maps have dense ids 0..n-1, every id is used,
/// and every region is 4-connected.
struct SuperpixelMap {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<std::int32_t> labels;  // row-major

  std::int32_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count() const { return labels.size(); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Splits every 4-connected component of equal raw ids into its own region
/// and renumbers regions densely in raster order of first appearance.
SuperpixelMap relabel_connected(int height, int width, const std::vector<std::int64_t>& raw_ids);

/// Imports an over-segmentation from a 16-bit grayscale PNG (id = gray value)
/// or a headerless CSV of ids. When expected dimensions are given they must
/// match the file.
SuperpixelMap import_labels(const std::string& path, std::optional<int> expected_height = std::nullopt,
                            std::optional<int> expected_width = std::nullopt);

/// Writes a map as a 16-bit grayscale PNG. Requires count <= 65536.
void write_label_png(const std::string& path, const SuperpixelMap& map);
void write_label_csv(const std::string& path, const SuperpixelMap& map);

struct SlicParams {
  int target_count = 200;
  double compactness = 10.0;
  int iterations = 10;
  std::uint64_t seed = 0;
};

/// Built-in SLIC-style over-segmentation: k-means in (Lab, position) space
/// from a grid of seeds, followed by connectivity enforcement.
SuperpixelMap grid_slic(const ColorImage& rgb, const SlicParams& params);

struct AdjacencyEdge {
  int i = 0;  // i < j
  int j = 0;
  int boundary_pairs = 0;
  double mean_strength = 0.0;  // in [0, 1]
};

struct AdjacencyGraph {
  int node_count = 0;
  std::vector<AdjacencyEdge> edges;  // sorted by (i, j)
};

/// Optional per-pixel boundary strength in [0, 1] that replaces image contrast.
using BoundaryMap = Raster;

BoundaryMap read_boundary_png(const std::string& path);

/// Adjacency over 4-neighbour pixel pairs with differing labels. Edge strength
/// is the mean Lab contrast of its pixel pairs, scaled so the largest contrast
/// between any two 4-adjacent pixels of the image maps to 1. With a boundary
/// map, the mean of the two pixels' boundary values is used instead.
AdjacencyGraph build_adjacency(const SuperpixelMap& map, const ColorImage& rgb,
                               const BoundaryMap* boundary = nullptr);

/// Pixel count per superpixel.
std::vector<int> sizes(const SuperpixelMap& map);

}  // namespace spsg
