#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spsg/config.hpp"
#include "spsg/eval.hpp"
#include "spsg/io.hpp"
#include "spsg/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Options that map onto RunConfig keys. Values given on the command line
// override those read from --config.
struct ConfigOptions {
  std::string config_file;
  std::deque<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  bool no_warm_start = false;
  CLI::Option* no_warm_start_opt = nullptr;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    values.emplace_back(key, std::string());
    options.emplace_back(key, app->add_option(flag, values.back().second, help));
  }

  spsg::RunConfig resolve() const {
    spsg::RunConfig cfg = config_file.empty() ? spsg::RunConfig{} : spsg::load_config(config_file);
    std::map<std::string, std::string> overrides;
    for (std::size_t k = 0; k < options.size(); ++k)
      if (options[k].second->count() > 0) overrides[values[k].first] = values[k].second;
    if (no_warm_start_opt && no_warm_start_opt->count() > 0) overrides["warm_start"] = "false";
    cfg.apply(overrides);
    return cfg;
  }
};

void add_image_options(CLI::App* app, ConfigOptions& o) {
  app->add_option("--config", o.config_file, "Flat key = value configuration file");
  o.add(app, "--image", "image", "Input image (PNG or PPM)");
  auto* sp = app->add_option("--superpixels", o.values.emplace_back("superpixels", "").second,
                             "Imported over-segmentation (16-bit PNG or CSV)");
  o.options.emplace_back("superpixels", sp);
  auto* slic = app->add_option("--slic", o.values.emplace_back("slic", "").second,
                               "Built-in over-segmentation with about N superpixels");
  o.options.emplace_back("slic", slic);
  sp->excludes(slic);
  o.add(app, "--slic-compactness", "slic_compactness", "Built-in over-segmentation compactness");
  o.add(app, "--slic-iterations", "slic_iterations", "Built-in over-segmentation iterations");
  o.add(app, "--boundary", "boundary", "Optional 8-bit boundary-strength PNG");
  o.add(app, "--window-radius", "window_radius", "Histogram window radius");
  o.add(app, "--bins", "bins_per_filter", "Histogram bins per filter");
  o.add(app, "--feature-cache", "feature_cache", "Pixel feature cache file");
  o.add(app, "--seed", "seed", "Random seed");
}

void add_model_options(CLI::App* app, ConfigOptions& o) {
  o.add(app, "--dict-size", "dict_size", "Dictionary size l");
  o.add(app, "--nmf-iters", "nmf_iterations", "Dictionary learning iterations");
  o.add(app, "--dict-cache", "dict_cache", "Dictionary cache file");
  o.add(app, "--gamma", "gamma", "Laplacian regularization weight");
  o.add(app, "--sigma-x", "sigma_x", "Feature bandwidth: auto or a positive value");
  o.add(app, "--mu", "mu", "ADMM penalty");
  o.add(app, "--tol", "tol", "Residual tolerance");
  o.add(app, "--max-iters", "max_iters", "Iteration cap per solve");
  auto* alpha = app->add_option("--alpha", o.values.emplace_back("alphas", "").second, "Single alpha");
  o.options.emplace_back("alphas", alpha);
  auto* grid = app->add_option("--alpha-grid", o.values.emplace_back("alphas", "").second,
                               "Comma separated alpha values");
  o.options.emplace_back("alphas", grid);
  alpha->excludes(grid);
  o.add(app, "--trace", "trace", "Solver trace CSV (alpha, iteration, residual, objective)");
  o.add(app, "--out", "output_dir", "Output directory");
  o.no_warm_start_opt = app->add_flag("--no-warm-start", o.no_warm_start, "Solve each alpha from scratch");
}

int cmd_segment(const ConfigOptions& o) {
  const spsg::RunConfig cfg = o.resolve();
  cfg.validate();
  const spsg::PreparedImage prepared = spsg::prepare(cfg);
  const spsg::RunResult result = spsg::run_segmentation(prepared, cfg);
  spsg::write_outputs(cfg, result);
  std::printf("%d superpixels, lambda_max %.6g\n", prepared.map.count, result.lambda_max.value);
  for (const auto& e : result.family.entries)
    std::printf("alpha %.4f  K %2d  segments %3d  iterations %5d%s\n", e.alpha, e.words, e.segments, e.iterations,
                e.converged ? "" : "  (not converged)");
  return 0;
}

int cmd_features(const ConfigOptions& o, const std::string& out) {
  spsg::RunConfig cfg = o.resolve();
  if (cfg.image.empty()) throw std::invalid_argument("no input image");
  const spsg::ColorImage rgb = spsg::read_image(cfg.image);
  const spsg::PixelFeatureField field = spsg::pixel_features(rgb, cfg);
  if (cfg.superpixels.empty() && cfg.slic_count == 0) {
    spsg::write_matrix(out, field.data);
    std::printf("%d x %lld pixel features\n", field.dimension(), static_cast<long long>(field.data.cols()));
    return 0;
  }
  const spsg::Matrix x = spsg::superpixel_features(field, spsg::superpixels_for(rgb, cfg));
  spsg::write_matrix(out, x);
  std::printf("%lld x %lld superpixel features\n", static_cast<long long>(x.rows()),
              static_cast<long long>(x.cols()));
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_bench(const ConfigOptions& o, int repeats, const std::string& csv) {
  if (repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
  spsg::RunConfig cfg = o.resolve();
  cfg.feature_cache.clear();
  cfg.dict_cache.clear();
  cfg.validate();
  const double alpha = cfg.alphas.empty() ? 0.5 : cfg.alphas.front();
  std::vector<double> features, superpixels, dictionary, solver;
  int nodes = 0;
  for (int r = 0; r < repeats; ++r) {
    const spsg::PreparedImage p = spsg::prepare(cfg);
    const spsg::SolverParams params = spsg::solver_params(cfg);
    const double lmax = spsg::lambda_max(p.instance, params).value;
    spsg::ModelInstance inst = p.instance;
    inst.lambda = alpha * lmax;
    const auto t0 = std::chrono::steady_clock::now();
    spsg::solve(inst, params);
    solver.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    features.push_back(p.times.features);
    superpixels.push_back(p.times.superpixels);
    dictionary.push_back(p.times.dictionary);
    nodes = p.map.count;
  }
  std::ostringstream os;
  os << "stage,median_seconds,repeats\n";
  char line[128];
  auto row = [&](const char* name, const std::vector<double>& t) {
    std::snprintf(line, sizeof line, "%s,%.6f,%d\n", name, median(t), repeats);
    os << line;
  };
  row("features", features);
  row("superpixels", superpixels);
  row("dictionary", dictionary);
  row("solver", solver);
  if (csv.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream(csv) << os.str();
    std::cout << os.str();
  }
  std::fprintf(stderr, "n = %d superpixels, l = %d words\n", nodes, cfg.dict_size);
  return 0;
}

bool is_label_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".csv";
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& report_path) {
  if (!fs::is_directory(pred_dir)) throw std::runtime_error("prediction directory not found: " + pred_dir);
  if (!fs::is_directory(gt_dir)) throw std::runtime_error("ground-truth directory not found: " + gt_dir);

  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(pred_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "index.json")) runs.push_back(entry.path());
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw std::runtime_error("no predictions (subdirectories with index.json) in " + pred_dir);

  std::vector<spsg::ImageScores> images;
  std::vector<std::string> skipped;
  json per_image = json::array();
  for (const auto& run : runs) {
    const std::string name = run.filename().string();
    const fs::path gdir = fs::path(gt_dir) / name;
    std::vector<fs::path> gt_files;
    if (fs::is_directory(gdir))
      for (const auto& e : fs::directory_iterator(gdir))
        if (e.is_regular_file() && is_label_file(e.path())) gt_files.push_back(e.path());
    if (gt_files.empty()) {
      std::fprintf(stderr, "warning: no ground truth for %s, skipped\n", name.c_str());
      skipped.push_back(name);
      continue;
    }
    std::sort(gt_files.begin(), gt_files.end());
    std::vector<spsg::LabelImage> gts;
    for (const auto& f : gt_files) gts.push_back(spsg::read_label_image(f.string()));

    json index;
    std::ifstream(run / "index.json") >> index;
    spsg::ImageScores scores;
    scores.name = name;
    json rows = json::array();
    for (const auto& e : index.at("entries")) {
      const double alpha = e.at("alpha").get<double>();
      const spsg::LabelImage pred = spsg::read_label_image((run / e.at("file").get<std::string>()).string());
      json per_gt = json::array();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        per_gt.push_back({{"ground_truth", gt_files[g].filename().string()},
                          {"cov", spsg::covering(pred, gts[g])},
                          {"pri", spsg::rand_index(pred, gts[g])},
                          {"voi", spsg::variation_of_information(pred, gts[g])}});
      }
      const spsg::SegmentationScores s = spsg::score_against(pred, gts);
      scores.alphas.push_back(alpha);
      scores.scores.push_back(s);
      rows.push_back({{"alpha", alpha}, {"cov", s.covering}, {"pri", s.rand_index}, {"voi", s.voi},
                      {"ground_truths", per_gt}});
    }
    per_image.push_back({{"image", name}, {"scores", rows}});
    images.push_back(std::move(scores));
  }
  if (images.empty()) throw std::runtime_error("no image had ground truth");

  const spsg::BenchmarkSummary s = spsg::ods_ois(images);
  std::fputs(spsg::format_summary_table(s, "IS4").c_str(), stdout);
  std::printf("%d images evaluated, %zu skipped\n", s.images, skipped.size());

  if (!report_path.empty()) {
    auto agg = [](const spsg::ScaleAggregate& a) { return json{{"ods", a.ods}, {"ods_alpha", a.ods_alpha}, {"ois", a.ois}}; };
    json report = {{"images", per_image},
                   {"summary", {{"cov", agg(s.covering)}, {"pri", agg(s.rand_index)}, {"voi", agg(s.voi)}}},
                   {"evaluated", s.images},
                   {"skipped", skipped.size()},
                   {"skipped_images", skipped}};
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << report.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image segmentation by sparse subset selection"};
  app.require_subcommand(1);

  ConfigOptions seg_opts;
  auto* segment = app.add_subcommand("segment", "Segment one image over an alpha sweep");
  add_image_options(segment, seg_opts);
  add_model_options(segment, seg_opts);

  ConfigOptions bench_opts;
  int repeats = 1;
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "Median per-stage wall-clock times");
  add_image_options(bench, bench_opts);
  add_model_options(bench, bench_opts);
  bench->add_option("--repeats", repeats, "Number of repeats");
  bench->add_option("--csv", bench_csv, "Timing CSV output");

  ConfigOptions feat_opts;
  std::string feat_out;
  auto* features = app.add_subcommand("features", "Write pixel or superpixel features");
  add_image_options(features, feat_opts);
  features->add_option("--output,-o", feat_out, "Output matrix file")->required();

  std::string pred_dir, gt_dir, report;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred-dir", pred_dir, "One subdirectory per image holding index.json")->required();
  eval->add_option("--gt-dir", gt_dir, "One subdirectory per image holding ground-truth label maps")->required();
  eval->add_option("--report", report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*segment) return cmd_segment(seg_opts);
    if (*bench) return cmd_bench(bench_opts, repeats, bench_csv);
    if (*features) return cmd_features(feat_opts, feat_out);
    if (*eval) return cmd_eval(pred_dir, gt_dir, report);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
