#include "spsg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "spsg/io.hpp"

namespace spsg {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

LshParams lsh_params(const RunConfig& config) {
  LshParams p;
  p.window_radius = config.window_radius;
  p.bins_per_filter = config.bins_per_filter;
  p.validate();
  return p;
}

SolverParams solver_params(const RunConfig& config) {
  SolverParams p;
  p.mu = config.mu;
  p.tol = config.tol;
  p.max_iters = config.max_iters;
  p.validate();
  return p;
}

PixelFeatureField pixel_features(const ColorImage& rgb, const RunConfig& config) {
  const LshParams params = lsh_params(config);
  PixelFeatureField field;
  field.height = rgb.height();
  field.width = rgb.width();
  if (!config.feature_cache.empty() && fs::exists(config.feature_cache)) {
    field.data = read_matrix(config.feature_cache);
    if (field.data.rows() == params.dimension() &&
        field.data.cols() == static_cast<Eigen::Index>(field.height) * field.width)
      return field;
    std::fprintf(stderr, "warning: feature cache %s does not match this image, recomputing\n",
                 config.feature_cache.c_str());
  }
  field = compute_lsh_features(compute_filter_responses(rgb, params.bank), params);
  if (!config.feature_cache.empty()) write_matrix(config.feature_cache, field.data);
  return field;
}

SuperpixelMap superpixels_for(const ColorImage& rgb, const RunConfig& config) {
  if (!config.superpixels.empty()) return import_labels(config.superpixels, rgb.height(), rgb.width());
  SlicParams sp;
  sp.target_count = config.slic_count;
  sp.compactness = config.slic_compactness;
  sp.iterations = config.slic_iterations;
  sp.seed = config.seed;
  return grid_slic(rgb, sp);
}

PreparedImage prepare(const RunConfig& config) {
  config.validate();
  PreparedImage out;
  out.rgb = read_image(config.image);

  auto t0 = Clock::now();
  const PixelFeatureField field = pixel_features(out.rgb, config);
  out.times.features = seconds_since(t0);

  t0 = Clock::now();
  out.map = superpixels_for(out.rgb, config);
  BoundaryMap boundary;
  if (!config.boundary.empty()) {
    boundary = read_boundary_png(config.boundary);
    if (boundary.rows() != out.rgb.height() || boundary.cols() != out.rgb.width())
      throw std::invalid_argument("boundary map size does not match the image");
  }
  out.graph = build_adjacency(out.map, out.rgb, config.boundary.empty() ? nullptr : &boundary);
  out.features = superpixel_features(field, out.map);
  out.times.superpixels = seconds_since(t0);

  t0 = Clock::now();
  bool cached = false;
  if (!config.dict_cache.empty() && fs::exists(config.dict_cache)) {
    out.dictionary.words = read_matrix(config.dict_cache);
    cached = out.dictionary.words.rows() == out.features.rows() && out.dictionary.words.cols() == config.dict_size;
    if (!cached)
      std::fprintf(stderr, "warning: dictionary cache %s does not match, relearning\n", config.dict_cache.c_str());
  }
  if (!cached) {
    NmfOptions nmf;
    nmf.words = config.dict_size;
    nmf.iterations = config.nmf_iterations;
    nmf.seed = config.seed;
    out.dictionary = learn_dictionary(out.features, nmf);
    if (!config.dict_cache.empty()) write_matrix(config.dict_cache, out.dictionary.words);
  }
  out.times.dictionary = seconds_since(t0);

  ModelInstance& inst = out.instance;
  inst.dissimilarity = dissimilarity(out.dictionary, out.features);
  inst.weights = size_matrix(sizes(out.map));
  inst.sigma_x = config.sigma_x ? *config.sigma_x : auto_sigma(out.graph, out.features);
  inst.similarity = edge_weights(out.graph, out.features, inst.sigma_x);
  inst.laplacian = laplacian(inst.similarity);
  inst.gamma = config.gamma / static_cast<double>(out.map.pixel_count());
  inst.validate();
  return out;
}

RunResult run_segmentation(const PreparedImage& prepared, const RunConfig& config) {
  const SolverParams params = solver_params(config);
  RunResult result;
  result.times = prepared.times;
  const auto t0 = Clock::now();
  result.lambda_max = lambda_max(prepared.instance, params);
  if (!result.lambda_max.bracketed)
    std::fprintf(stderr, "warning: no single-word lambda found; using the largest probe\n");
  SweepConfig sc;
  sc.alpha_grid = config.alphas.empty() ? SweepConfig::default_grid() : config.alphas;
  sc.lambda_max = result.lambda_max.value;
  result.family = sweep(prepared.instance, prepared.map, prepared.graph, sc, params, config.warm_start,
                        config.trace.empty() ? nullptr : &result.trace);
  result.times.solver = seconds_since(t0);
  return result;
}

std::string alpha_file_name(double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha_%.4f.png", alpha);
  return buf;
}

void write_outputs(const RunConfig& config, const RunResult& result) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : result.family.entries) {
    const std::string file = alpha_file_name(e.alpha);
    write_label_png((dir / file).string(), e.labels);
    entries.push_back({{"alpha", e.alpha},
                       {"lambda", e.lambda},
                       {"K", e.words},
                       {"segments", e.segments},
                       {"objective", e.objective},
                       {"iterations", e.iterations},
                       {"converged", e.converged},
                       {"file", file}});
  }
  nlohmann::json index = {{"image", config.image},
                          {"lambda_max", result.lambda_max.value},
                          {"lambda_max_bracketed", result.lambda_max.bracketed},
                          {"entries", entries}};
  open_out(dir / "index.json") << index.dump(2) << '\n';
  open_out(dir / "config.txt") << config.to_text();

  if (!config.trace.empty()) {
    std::ofstream out = open_out(config.trace);
    out << "alpha,iteration,residual,objective\n";
    char buf[128];
    for (const auto& t : result.trace) {
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", t.alpha, t.row.iteration, t.row.residual,
                    t.row.objective);
      out << buf;
    }
  }
}

}  // namespace spsg
