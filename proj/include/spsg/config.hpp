#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spsg {

/// Effective settings of one segmentation run. Serialized as flat
/// `key = value` text; lists are comma separated.
struct RunConfig {
  std::string image;
  std::string output_dir = "out";

  // Exactly one superpixel source.
  std::string superpixels;  // imported label map
  int slic_count = 0;       // built-in over-segmentation when > 0
  double slic_compactness = 10.0;
  int slic_iterations = 10;
  std::string boundary;  // optional boundary-strength PNG

  int window_radius = 9;
  int bins_per_filter = 11;

  int dict_size = 20;
  int nmf_iterations = 200;
  // Laplacian weight relative to a data term weighted by raw pixel counts;
  // the model instance receives gamma / (height * width).
  double gamma = 10.0;
  std::optional<double> sigma_x;  // nullopt = auto

  double mu = 1.0;
  double tol = 1e-7;
  int max_iters = 3000;

  std::vector<double> alphas;  // empty = default grid
  std::uint64_t seed = 0;
  bool warm_start = true;

  std::string feature_cache;
  std::string dict_cache;
  std::string trace;

  /// Throws std::invalid_argument on inconsistent or out-of-range settings.
  void validate() const;

  std::string to_text() const;
  /// Applies `key = value` pairs over the current values.
  void apply(const std::map<std::string, std::string>& pairs);
};

std::map<std::string, std::string> parse_key_values(const std::string& text);
RunConfig load_config(const std::string& path);

std::vector<double> parse_alpha_list(const std::string& text);

}  // namespace spsg
