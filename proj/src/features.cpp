#include "spsg/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spsg/parallel.hpp"

namespace spsg {

FilterBank FilterBank::standard() {
  FilterBank bank;
  for (int c = 0; c < 3; ++c) bank.filters.push_back({FilterKind::kIntensity, c, 1.0});
  bank.filters.push_back({FilterKind::kLaplacianOfGaussian, 0, 1.0});
  bank.filters.push_back({FilterKind::kLaplacianOfGaussian, 0, 2.0});
  return bank;
}

void FilterBank::validate() const {
  if (filters.empty()) throw std::invalid_argument("filter bank is empty");
  for (const auto& f : filters) {
    if (f.channel < 0 || f.channel > 2) throw std::invalid_argument("filter channel must be 0, 1 or 2");
    if (!(f.scale > 0.0)) throw std::invalid_argument("filter scale must be positive");
  }
}

void LshParams::validate() const {
  if (window_radius < 1) throw std::invalid_argument("window_radius must be >= 1");
  if (bins_per_filter < 2) throw std::invalid_argument("bins_per_filter must be >= 2");
  bank.validate();
}

Raster log_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("LoG sigma must be positive");
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  Raster k(2 * r + 1, 2 * r + 1);
  const double s2 = sigma * sigma;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double q = (dx * dx + dy * dy) / (2.0 * s2);
      k(dy + r, dx + r) = -1.0 / (std::numbers::pi * s2 * s2) * (1.0 - q) * std::exp(-q);
    }
  }
  k -= k.mean();
  return k;
}

namespace {

int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// Uniform bin index with the last bin closed on the right.
struct Binner {
  double lo = 0.0;
  double width = 0.0;
  int bins = 1;
  bool degenerate = true;

  int operator()(double v) const {
    if (degenerate) return 0;
    const int b = static_cast<int>(std::floor((v - lo) / width));
    return std::clamp(b, 0, bins - 1);
  }
};

Binner make_binner(const Raster& r, int bins) {
  Binner b;
  b.bins = bins;
  const double lo = r.minCoeff(), hi = r.maxCoeff();
  b.lo = lo;
  // Ranges at rounding-noise level (e.g. LoG of a constant) count as constant.
  b.degenerate = !(hi - lo > 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))));
  b.width = b.degenerate ? 0.0 : (hi - lo) / bins;
  return b;
}

}  // namespace

Raster convolve_reflect(const Raster& input, const Raster& kernel) {
  const int h = static_cast<int>(input.rows()), w = static_cast<int>(input.cols());
  const int ry = static_cast<int>(kernel.rows()) / 2, rx = static_cast<int>(kernel.cols()) / 2;
  Raster out = Raster::Zero(h, w);
  parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -ry; dy <= ry; ++dy) {
        const int sy = reflect_index(y + dy, h);
        for (int dx = -rx; dx <= rx; ++dx) acc += kernel(dy + ry, dx + rx) * input(sy, reflect_index(x + dx, w));
      }
      out(y, x) = acc;
    }
  }, 8);
  return out;
}

std::vector<Raster> compute_filter_responses(const ColorImage& rgb, const FilterBank& bank) {
  if (rgb.empty()) throw std::invalid_argument("empty image");
  bank.validate();
  const ColorImage lab = rgb_to_lab(rgb);
  std::vector<Raster> responses;
  responses.reserve(bank.filters.size());
  for (const auto& f : bank.filters) {
    if (f.kind == FilterKind::kIntensity)
      responses.push_back(lab.channels[f.channel]);
    else
      responses.push_back(convolve_reflect(lab.channels[f.channel], log_kernel(f.scale)));
  }
  return responses;
}

PixelFeatureField compute_lsh_features(const std::vector<Raster>& responses, const LshParams& params) {
  params.validate();
  if (responses.empty()) throw std::invalid_argument("no filter responses");
  const int h = static_cast<int>(responses[0].rows()), w = static_cast<int>(responses[0].cols());
  if (h == 0 || w == 0) throw std::invalid_argument("empty response raster");
  for (const auto& r : responses)
    if (r.rows() != h || r.cols() != w) throw std::invalid_argument("response rasters differ in size");

  const int bins = params.bins_per_filter;
  const int radius = params.window_radius;
  const int nf = static_cast<int>(responses.size());

  PixelFeatureField field;
  field.height = h;
  field.width = w;
  field.data = Matrix::Zero(static_cast<Eigen::Index>(bins) * nf, static_cast<Eigen::Index>(h) * w);

  for (int f = 0; f < nf; ++f) {
    const Binner binner = make_binner(responses[f], bins);
    std::vector<int> bin_of(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) bin_of[static_cast<std::size_t>(y) * w + x] = binner(responses[f](y, x));

    // Integral image per bin: counts[b] is (h+1) x (w+1).
    std::vector<Eigen::ArrayXXi> counts(bins, Eigen::ArrayXXi::Zero(h + 1, w + 1));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int hit = bin_of[static_cast<std::size_t>(y) * w + x];
        for (int b = 0; b < bins; ++b)
          counts[b](y + 1, x + 1) = counts[b](y, x + 1) + counts[b](y + 1, x) - counts[b](y, x) + (b == hit);
      }
    }

    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
      const int y = static_cast<int>(yy);
      const int y0 = std::max(0, y - radius), y1 = std::min(h, y + radius + 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - radius), x1 = std::min(w, x + radius + 1);
        const double area = static_cast<double>(y1 - y0) * (x1 - x0);
        const Eigen::Index col = static_cast<Eigen::Index>(y) * w + x;
        for (int b = 0; b < bins; ++b) {
          const int c = counts[b](y1, x1) - counts[b](y0, x1) - counts[b](y1, x0) + counts[b](y0, x0);
          field.data(static_cast<Eigen::Index>(f) * bins + b, col) = c / area;
        }
      }
    }, 8);
  }
  return field;
}

Matrix superpixel_features(const PixelFeatureField& field, const SuperpixelMap& map) {
  if (map.height != field.height || map.width != field.width)
    throw std::invalid_argument("superpixel map and feature field differ in size");
  const int n = map.count;
  Matrix sums = Matrix::Zero(field.dimension(), n);
  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < map.labels.size(); ++k) {
    const int id = map.labels[k];
    if (id < 0 || id >= n) throw std::invalid_argument("label id out of range");
    sums.col(id) += field.data.col(static_cast<Eigen::Index>(k));
    ++counts[id];
  }
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) throw std::invalid_argument("superpixel " + std::to_string(i) + " has no pixels");
    sums.col(i) /= static_cast<double>(counts[i]);
  }
  return sums;
}

}  // namespace spsg
