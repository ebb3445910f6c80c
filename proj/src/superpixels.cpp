#include "spsg/superpixels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace spsg {

namespace {

constexpr int kDy[4] = {-1, 1, 0, 0};
constexpr int kDx[4] = {0, 0, -1, 1};

bool is_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[4] = {};
  in.read(reinterpret_cast<char*>(sig), 4);
  return in && sig[0] == 0x89 && sig[1] == 'P' && sig[2] == 'N' && sig[3] == 'G';
}

// 4-connected components of equal values; returns component id per pixel
// (raster order of first appearance) and the component count.
template <class T>
std::pair<std::vector<std::int32_t>, int> connected_components(int h, int w, const std::vector<T>& values) {
  std::vector<std::int32_t> comp(values.size(), -1);
  std::vector<int> stack;
  int next = 0;
  for (int start = 0; start < h * w; ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int y = p / w, x = p % w;
      for (int k = 0; k < 4; ++k) {
        const int ny = y + kDy[k], nx = x + kDx[k];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int q = ny * w + nx;
        if (comp[q] < 0 && values[q] == values[start]) {
          comp[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return {std::move(comp), next};
}

std::vector<std::int64_t> parse_csv_ids(const std::string& path, int& height, int& width) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::int64_t> ids;
  std::string line;
  height = 0;
  width = -1;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::int64_t v;
    int count = 0;
    while (row >> v) {
      ids.push_back(v);
      ++count;
    }
    if (!row.eof()) throw std::runtime_error(path + ": non-numeric label value");
    if (count == 0) continue;
    if (width >= 0 && count != width) throw std::runtime_error(path + ": ragged label rows");
    width = count;
    ++height;
  }
  if (ids.empty()) throw std::runtime_error(path + ": empty label file");
  return ids;
}

}  // namespace

void SuperpixelMap::validate() const {
  if (height <= 0 || width <= 0) throw std::invalid_argument("superpixel map is empty");
  if (labels.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("label count does not match map dimensions");
  std::vector<int> seen(static_cast<std::size_t>(count), 0);
  for (auto id : labels) {
    if (id < 0 || id >= count) throw std::invalid_argument("label id outside 0..n-1");
    seen[id] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw std::invalid_argument("unused label id");
  const auto [comp, ncomp] = connected_components(height, width, labels);
  if (ncomp != count) throw std::invalid_argument("superpixel is not 4-connected");
}

SuperpixelMap relabel_connected(int height, int width, const std::vector<std::int64_t>& raw_ids) {
  if (height <= 0 || width <= 0 || raw_ids.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("label data does not match dimensions");
  auto [comp, count] = connected_components(height, width, raw_ids);
  SuperpixelMap map;
  map.height = height;
  map.width = width;
  map.count = count;
  map.labels = std::move(comp);
  return map;
}

SuperpixelMap import_labels(const std::string& path, std::optional<int> expected_height,
                            std::optional<int> expected_width) {
  int h = 0, w = 0;
  std::vector<std::int64_t> ids;
  if (is_png(path)) {
    const GrayPlane plane = read_png_gray(path);
    h = plane.height;
    w = plane.width;
    ids.assign(plane.values.begin(), plane.values.end());
  } else {
    ids = parse_csv_ids(path, h, w);
  }
  if ((expected_height && *expected_height != h) || (expected_width && *expected_width != w)) {
    throw std::invalid_argument(path + ": label map is " + std::to_string(h) + "x" + std::to_string(w) +
                                ", image is " + std::to_string(expected_height.value_or(h)) + "x" +
                                std::to_string(expected_width.value_or(w)));
  }
  return relabel_connected(h, w, ids);
}

void write_label_png(const std::string& path, const SuperpixelMap& map) {
  if (map.count > 65536) throw std::invalid_argument("too many labels for a 16-bit PNG");
  GrayPlane plane;
  plane.height = map.height;
  plane.width = map.width;
  plane.bit_depth = 16;
  plane.values.assign(map.labels.begin(), map.labels.end());
  write_png_gray16(path, plane);
}

void write_label_csv(const std::string& path, const SuperpixelMap& map) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) out << (x ? "," : "") << map.at(y, x);
    out << '\n';
  }
}

SuperpixelMap grid_slic(const ColorImage& rgb, const SlicParams& params) {
  if (params.target_count < 2) throw std::invalid_argument("target superpixel count must be >= 2");
  if (params.iterations < 1) throw std::invalid_argument("SLIC iterations must be >= 1");
  if (!(params.compactness >= 0.0)) throw std::invalid_argument("compactness must be >= 0");
  const ColorImage lab = rgb_to_lab(rgb);
  const int h = lab.height(), w = lab.width();
  const long npix = static_cast<long>(h) * w;
  if (params.target_count > npix) throw std::invalid_argument("target superpixel count exceeds pixel count");

  const double step = std::sqrt(static_cast<double>(npix) / params.target_count);
  const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
  const int ny = std::max(1, static_cast<int>(std::lround(h / step)));

  struct Center {
    double l, a, b, y, x;
  };
  auto color_at = [&](int y, int x) {
    return std::array<double, 3>{lab.channels[0](y, x), lab.channels[1](y, x), lab.channels[2](y, x)};
  };
  auto gradient = [&](int y, int x) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
    double g = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double gx = lab.channels[c](y, xp) - lab.channels[c](y, xm);
      const double gy = lab.channels[c](yp, x) - lab.channels[c](ym, x);
      g += gx * gx + gy * gy;
    }
    return g;
  };

  std::mt19937_64 rng(params.seed);
  std::vector<Center> centers;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      int cy = std::min(h - 1, static_cast<int>((i + 0.5) * h / ny));
      int cx = std::min(w - 1, static_cast<int>((j + 0.5) * w / nx));
      // Move to the lowest-gradient pixel of the 3x3 neighbourhood; the
      // centre wins unless beaten strictly, ties among others by seeded order.
      std::vector<std::pair<int, int>> moves;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dy || dx) moves.emplace_back(dy, dx);
      std::shuffle(moves.begin(), moves.end(), rng);
      double best = gradient(cy, cx);
      int by = cy, bx = cx;
      for (auto [dy, dx] : moves) {
        const int yy = cy + dy, xx = cx + dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        const double g = gradient(yy, xx);
        if (g < best) {
          best = g;
          by = yy;
          bx = xx;
        }
      }
      const auto c = color_at(by, bx);
      centers.push_back({c[0], c[1], c[2], static_cast<double>(by), static_cast<double>(bx)});
    }
  }

  const double spatial_weight = (params.compactness / step) * (params.compactness / step);
  const int reach = static_cast<int>(std::ceil(2.0 * step));
  std::vector<std::int64_t> assignment(static_cast<std::size_t>(npix), -1);
  std::vector<double> dist(static_cast<std::size_t>(npix));
  for (int it = 0; it < params.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int y0 = std::max(0, static_cast<int>(c.y) - reach), y1 = std::min(h - 1, static_cast<int>(c.y) + reach);
      const int x0 = std::max(0, static_cast<int>(c.x) - reach), x1 = std::min(w - 1, static_cast<int>(c.x) + reach);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dl = lab.channels[0](y, x) - c.l, da = lab.channels[1](y, x) - c.a,
                       db = lab.channels[2](y, x) - c.b;
          const double sy = y - c.y, sx = x - c.x;
          const double d = dl * dl + da * da + db * db + spatial_weight * (sy * sy + sx * sx);
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          if (d < dist[p]) {
            dist[p] = d;
            assignment[p] = static_cast<std::int64_t>(k);
          }
        }
      }
    }
    std::vector<std::array<double, 6>> acc(centers.size(), {0, 0, 0, 0, 0, 0});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto k = assignment[static_cast<std::size_t>(y) * w + x];
        if (k < 0) continue;
        auto& a = acc[static_cast<std::size_t>(k)];
        a[0] += lab.channels[0](y, x);
        a[1] += lab.channels[1](y, x);
        a[2] += lab.channels[2](y, x);
        a[3] += y;
        a[4] += x;
        a[5] += 1.0;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& a = acc[k];
      if (a[5] == 0.0) continue;
      centers[k] = {a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]};
    }
  }
  // Pixels outside every search window (only possible on tiny grids).
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& k = assignment[static_cast<std::size_t>(y) * w + x];
      if (k >= 0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = (y - centers[c].y) * (y - centers[c].y) + (x - centers[c].x) * (x - centers[c].x);
        if (d < best) {
          best = d;
          k = static_cast<std::int64_t>(c);
        }
      }
    }
  }

  // Connectivity: fragments smaller than a quarter cell join the adjacent
  // fragment of closest mean colour.
  auto [comp, ncomp] = connected_components(h, w, assignment);
  std::vector<double> size(ncomp, 0.0);
  std::vector<std::array<double, 3>> color_sum(ncomp, {0, 0, 0});
  for (int p = 0; p < npix; ++p) {
    size[comp[p]] += 1.0;
    const auto c = color_at(p / w, p % w);
    for (int ch = 0; ch < 3; ++ch) color_sum[comp[p]][ch] += c[ch];
  }
  std::vector<std::vector<int>> neighbours(ncomp);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int a = comp[static_cast<std::size_t>(y) * w + x];
      if (x + 1 < w) {
        const int b = comp[static_cast<std::size_t>(y) * w + x + 1];
        if (a != b) neighbours[a].push_back(b), neighbours[b].push_back(a);
      }
      if (y + 1 < h) {
        const int b = comp[static_cast<std::size_t>(y + 1) * w + x];
        if (a != b) neighbours[a].push_back(b), neighbours[b].push_back(a);
      }
    }
  }
  std::vector<int> parent(ncomp);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<double> group_size = size;
  std::vector<std::array<double, 3>> group_color = color_sum;
  std::vector<std::vector<int>> members(ncomp);
  for (int c = 0; c < ncomp; ++c) members[c] = {c};

  const double min_size = std::max(1.0, step * step / 4.0);
  std::vector<int> order(ncomp);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return size[a] < size[b]; });
  for (int c : order) {
    const int root = find(c);
    if (group_size[root] >= min_size) continue;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m : members[root]) {
      for (int nb : neighbours[m]) {
        const int r = find(nb);
        if (r == root) continue;
        double d = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double diff = group_color[root][ch] / group_size[root] - group_color[r][ch] / group_size[r];
          d += diff * diff;
        }
        if (d < best_d || (d == best_d && r < best)) {
          best_d = d;
          best = r;
        }
      }
    }
    if (best < 0) continue;
    parent[root] = best;
    group_size[best] += group_size[root];
    for (int ch = 0; ch < 3; ++ch) group_color[best][ch] += group_color[root][ch];
    members[best].insert(members[best].end(), members[root].begin(), members[root].end());
    members[root].clear();
  }

  std::vector<std::int64_t> merged(static_cast<std::size_t>(npix));
  for (int p = 0; p < npix; ++p) merged[p] = find(comp[p]);
  return relabel_connected(h, w, merged);
}

BoundaryMap read_boundary_png(const std::string& path) {
  const GrayPlane plane = read_png_gray(path);
  const double maxval = plane.bit_depth == 16 ? 65535.0 : 255.0;
  BoundaryMap b(plane.height, plane.width);
  for (int y = 0; y < plane.height; ++y)
    for (int x = 0; x < plane.width; ++x) b(y, x) = plane.values[static_cast<std::size_t>(y) * plane.width + x] / maxval;
  return b;
}

AdjacencyGraph build_adjacency(const SuperpixelMap& map, const ColorImage& rgb, const BoundaryMap* boundary) {
  if (map.height != rgb.height() || map.width != rgb.width())
    throw std::invalid_argument("superpixel map and image differ in size");
  if (boundary && (boundary->rows() != map.height || boundary->cols() != map.width))
    throw std::invalid_argument("boundary map and image differ in size");
  const int h = map.height, w = map.width;
  const ColorImage lab = rgb_to_lab(rgb);

  auto contrast = [&](int y0, int x0, int y1, int x1) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = lab.channels[c](y0, x0) - lab.channels[c](y1, x1);
      s += d * d;
    }
    return std::sqrt(s);
  };
  auto strength = [&](int y0, int x0, int y1, int x1) {
    return boundary ? 0.5 * ((*boundary)(y0, x0) + (*boundary)(y1, x1)) : contrast(y0, x0, y1, x1);
  };

  double scale = 1.0;
  if (!boundary) {
    double max_contrast = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) max_contrast = std::max(max_contrast, contrast(y, x, y, x + 1));
        if (y + 1 < h) max_contrast = std::max(max_contrast, contrast(y, x, y + 1, x));
      }
    scale = max_contrast > 0.0 ? 1.0 / max_contrast : 0.0;
  }

  std::map<std::pair<int, int>, std::pair<int, double>> acc;
  auto visit = [&](int y0, int x0, int y1, int x1) {
    int a = map.at(y0, x0), b = map.at(y1, x1);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    auto& e = acc[{a, b}];
    e.first += 1;
    e.second += strength(y0, x0, y1, x1);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) visit(y, x, y, x + 1);
      if (y + 1 < h) visit(y, x, y + 1, x);
    }

  AdjacencyGraph g;
  g.node_count = map.count;
  g.edges.reserve(acc.size());
  for (const auto& [key, val] : acc) {
    const double mean = val.second / val.first * scale;
    g.edges.push_back({key.first, key.second, val.first, std::clamp(mean, 0.0, 1.0)});
  }
  return g;
}

std::vector<int> sizes(const SuperpixelMap& map) {
  std::vector<int> s(static_cast<std::size_t>(map.count), 0);
  for (auto id : map.labels) ++s[id];
  return s;
}

}  // namespace spsg
