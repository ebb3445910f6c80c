#pragma once

#include <vector>

#include "spsg/model.hpp"
#include "spsg/solver.hpp"
#include "spsg/superpixels.hpp"

namespace spsg {

/// Hard assignment of superpixels to selected dictionary words.
struct Assignment {
  std::vector<int> word_of;         // per superpixel, an element of selected_words
  std::vector<int> selected_words;  // ascending row indices of U*
  int regions() const { return static_cast<int>(selected_words.size()); }
};

/// Assigns superpixel i to argmax over selected rows j of U*(j, i); ties go
/// to the lower row index.
Assignment assign(const Matrix& u_star);
Assignment assign(const Matrix& u_star, const std::vector<int>& selected);

/// Connected components of the superpixel graph restricted to edges whose
/// endpoints share a word, rendered as a pixel label map with dense ids in
/// raster order.
SuperpixelMap merge(const SuperpixelMap& map, const AdjacencyGraph& graph, const Assignment& assignment);

struct SweepConfig {
  std::vector<double> alpha_grid;
  double lambda_max = 0.0;

  /// 19 evenly spaced values 0.05, 0.10, ..., 0.95.
  static std::vector<double> default_grid();
  void validate() const;
};

struct SweepEntry {
  double alpha = 0.0;
  double lambda = 0.0;
  SuperpixelMap labels;
  int words = 0;     // K, number of selected words
  int segments = 0;  // connected final regions
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SweepTraceRow {
  double alpha = 0.0;
  TraceRow row;
};

struct SegmentationFamily {
  std::vector<SweepEntry> entries;  // alpha ascending
};

/// One solve + assign + merge per alpha, lambda = alpha * lambda_max. With
/// warm starting the solves run in ascending alpha order from the previous
/// state; otherwise each starts fresh and entries run in parallel.
SegmentationFamily sweep(const ModelInstance& instance, const SuperpixelMap& map, const AdjacencyGraph& graph,
                         const SweepConfig& config, const SolverParams& params, bool warm_start = true,
                         std::vector<SweepTraceRow>* trace = nullptr);

}  // namespace spsg
