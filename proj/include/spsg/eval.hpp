#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spsg/superpixels.hpp"

namespace spsg {

/// Read-only view of a label image. Labels are arbitrary nonnegative ids;
/// regions need not be connected.
struct LabelView {
  int height = 0;
  int width = 0;
  std::span<const std::int32_t> labels;

  LabelView() = default;
  LabelView(int h, int w, std::span<const std::int32_t> l) : height(h), width(w), labels(l) {}
  LabelView(const SuperpixelMap& map) : height(map.height), width(map.width), labels(map.labels) {}  // NOLINT
};

/// Label image loaded as-is (no relabeling or splitting), from a PNG gray
/// plane or a CSV of ids.
struct LabelImage {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> labels;

  operator LabelView() const { return {height, width, labels}; }  // NOLINT
};

LabelImage read_label_image(const std::string& path);

/// Covering of gt by pred: (1/N) sum_{R in gt} |R| max_{R' in pred} IoU(R, R').
double covering(LabelView pred, LabelView gt);

/// Fraction of unordered pixel pairs labeled consistently (same/same or
/// different/different) in both maps.
double rand_index(LabelView pred, LabelView gt);

/// H(pred | gt) + H(gt | pred) in nats.
double variation_of_information(LabelView pred, LabelView gt);

struct SegmentationScores {
  double covering = 0.0;
  double rand_index = 0.0;
  double voi = 0.0;
};

/// Scores against each ground truth, averaged.
SegmentationScores score_against(LabelView pred, const std::vector<LabelImage>& ground_truths);

/// Scores of one image across the shared alpha grid.
struct ImageScores {
  std::string name;
  std::vector<double> alphas;
  std::vector<SegmentationScores> scores;  // parallel to alphas
};

struct ScaleAggregate {
  double ods = 0.0;        // best dataset-mean over alphas
  double ods_alpha = 0.0;  // alpha attaining it
  double ois = 0.0;        // mean over images of per-image best
};

struct BenchmarkSummary {
  ScaleAggregate covering;    // higher is better
  ScaleAggregate rand_index;  // higher is better
  ScaleAggregate voi;         // lower is better
  int images = 0;
};

/// Optimal dataset scale and optimal image scale aggregation. All images
/// must share one alpha grid.
BenchmarkSummary ods_ois(const std::vector<ImageScores>& images);

/// Two header lines and one row: Cov, PRI and VoI, each as ODS and OIS.
std::string format_summary_table(const BenchmarkSummary& summary, const std::string& method);

}  // namespace spsg
