#include "spsg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace spsg {

namespace {

void check_same_shape(const LabelView& a, const LabelView& b) {
  if (a.height != b.height || a.width != b.width || a.labels.size() != b.labels.size())
    throw std::invalid_argument("label maps differ in size");
  if (a.labels.empty()) throw std::invalid_argument("label maps are empty");
}

struct Contingency {
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> joint;
  std::unordered_map<std::int32_t, std::int64_t> pred;
  std::unordered_map<std::int32_t, std::int64_t> gt;
  std::int64_t total = 0;
};

Contingency contingency(const LabelView& pred, const LabelView& gt) {
  check_same_shape(pred, gt);
  Contingency c;
  for (std::size_t k = 0; k < pred.labels.size(); ++k) {
    ++c.joint[{pred.labels[k], gt.labels[k]}];
    ++c.pred[pred.labels[k]];
    ++c.gt[gt.labels[k]];
  }
  c.total = static_cast<std::int64_t>(pred.labels.size());
  return c;
}

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

LabelImage read_label_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path);
  unsigned char sig[4] = {};
  probe.read(reinterpret_cast<char*>(sig), 4);
  LabelImage img;
  if (probe && sig[0] == 0x89 && sig[1] == 'P' && sig[2] == 'N' && sig[3] == 'G') {
    const GrayPlane plane = read_png_gray(path);
    img.height = plane.height;
    img.width = plane.width;
    img.labels.assign(plane.values.begin(), plane.values.end());
    return img;
  }
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long v;
    int count = 0;
    while (row >> v) {
      img.labels.push_back(static_cast<std::int32_t>(v));
      ++count;
    }
    if (count == 0) continue;
    if (img.width && count != img.width) throw std::runtime_error(path + ": ragged label rows");
    img.width = count;
    ++img.height;
  }
  if (img.labels.empty()) throw std::runtime_error(path + ": empty label file");
  return img;
}

double covering(LabelView pred, LabelView gt) {
  const Contingency c = contingency(pred, gt);
  // Best IoU for every gt region.
  std::unordered_map<std::int32_t, double> best;
  for (const auto& [key, inter] : c.joint) {
    const auto [p, g] = key;
    const double uni = static_cast<double>(c.pred.at(p) + c.gt.at(g) - inter);
    double& b = best[g];
    b = std::max(b, static_cast<double>(inter) / uni);
  }
  double sum = 0.0;
  for (const auto& [g, size] : c.gt) sum += static_cast<double>(size) * best[g];
  return sum / static_cast<double>(c.total);
}

double rand_index(LabelView pred, LabelView gt) {
  const Contingency c = contingency(pred, gt);
  const std::int64_t total_pairs = pairs(c.total);
  if (total_pairs == 0) return 1.0;
  std::int64_t same_both = 0, same_pred = 0, same_gt = 0;
  for (const auto& [key, n] : c.joint) same_both += pairs(n);
  for (const auto& [key, n] : c.pred) same_pred += pairs(n);
  for (const auto& [key, n] : c.gt) same_gt += pairs(n);
  const std::int64_t disagree = same_pred + same_gt - 2 * same_both;
  return static_cast<double>(total_pairs - disagree) / static_cast<double>(total_pairs);
}

double variation_of_information(LabelView pred, LabelView gt) {
  const Contingency c = contingency(pred, gt);
  const double n = static_cast<double>(c.total);
  // Summed per joint cell so that identical partitions give exactly 0.
  double voi = 0.0;
  for (const auto& [key, k] : c.joint) {
    const double nab = static_cast<double>(k);
    const double na = static_cast<double>(c.pred.at(key.first));
    const double nb = static_cast<double>(c.gt.at(key.second));
    voi -= nab / n * (std::log(nab / nb) + std::log(nab / na));
  }
  return std::max(0.0, voi);
}

SegmentationScores score_against(LabelView pred, const std::vector<LabelImage>& ground_truths) {
  if (ground_truths.empty()) throw std::invalid_argument("no ground truths");
  SegmentationScores s;
  for (const auto& gt : ground_truths) {
    s.covering += covering(pred, gt);
    s.rand_index += rand_index(pred, gt);
    s.voi += variation_of_information(pred, gt);
  }
  const double m = static_cast<double>(ground_truths.size());
  s.covering /= m;
  s.rand_index /= m;
  s.voi /= m;
  return s;
}

BenchmarkSummary ods_ois(const std::vector<ImageScores>& images) {
  if (images.empty()) throw std::invalid_argument("no images to aggregate");
  const auto& grid = images.front().alphas;
  if (grid.empty()) throw std::invalid_argument("empty alpha grid");
  for (const auto& img : images) {
    if (img.alphas != grid) throw std::invalid_argument("image " + img.name + " uses a different alpha grid");
    if (img.scores.size() != grid.size()) throw std::invalid_argument("image " + img.name + " has missing scores");
  }

  const std::size_t na = grid.size();
  const double ni = static_cast<double>(images.size());
  auto aggregate = [&](auto metric, bool higher_better) {
    ScaleAggregate agg;
    auto better = [higher_better](double a, double b) { return higher_better ? a > b : a < b; };
    for (std::size_t k = 0; k < na; ++k) {
      double mean = 0.0;
      for (const auto& img : images) mean += metric(img.scores[k]);
      mean /= ni;
      if (k == 0 || better(mean, agg.ods)) {
        agg.ods = mean;
        agg.ods_alpha = grid[k];
      }
    }
    for (const auto& img : images) {
      double best = metric(img.scores[0]);
      for (std::size_t k = 1; k < na; ++k)
        if (better(metric(img.scores[k]), best)) best = metric(img.scores[k]);
      agg.ois += best;
    }
    agg.ois /= ni;
    return agg;
  };

  BenchmarkSummary summary;
  summary.images = static_cast<int>(images.size());
  summary.covering = aggregate([](const SegmentationScores& s) { return s.covering; }, true);
  summary.rand_index = aggregate([](const SegmentationScores& s) { return s.rand_index; }, true);
  summary.voi = aggregate([](const SegmentationScores& s) { return s.voi; }, false);
  return summary;
}

std::string format_summary_table(const BenchmarkSummary& s, const std::string& method) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s\n", "", "Cov (up)", "PRI (up)", "VoI (down)");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10s %7s %6s %7s %6s %7s %6s\n", "Method", "ODS", "OIS", "ODS", "OIS", "ODS", "OIS");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10s %7.2f %6.2f %7.2f %6.2f %7.2f %6.2f\n", method.c_str(), s.covering.ods,
                s.covering.ois, s.rand_index.ods, s.rand_index.ois, s.voi.ods, s.voi.ois);
  out += buf;
  return out;
}

}  // namespace spsg
