// Acceptance criteria 1-10; one PASS/FAIL line each, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "spsg/eval.hpp"
#include "spsg/pipeline.hpp"
#include "spsg/segment.hpp"
#include "spsg/solver.hpp"
#include "synthetic.hpp"

using namespace spsg;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.ok) o.detail = why;
  o.ok = false;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1: ADMM against a long projected-subgradient run.
Outcome solver_oracle() {
  constexpr int L = 5, N = 8;
  std::mt19937_64 rng(101);
  Outcome o;
  double worst_obj = 0.0, worst_err = 0.0;
  const SolverParams tight{1.0, 50000, 1e-12};
  for (int k = 0; k < 20; ++k) {
    const double gamma = k % 2 ? 1.0 : 0.0;
    ModelInstance inst = oracle::random_instance(rng, L, N, gamma);
    inst.lambda = 0.3 * lambda_max(inst, SolverParams{}).value;
    const Solution admm = solve(inst, tight);
    const auto ref = oracle::projected_subgradient<L, N>(inst.dissimilarity, inst.weights, Matrix(inst.laplacian),
                                                         gamma, inst.lambda, 1000000);
    const double obj = oracle::objective(inst.dissimilarity, inst.weights, Matrix(inst.laplacian), gamma,
                                         inst.lambda, admm.u_star);
    const double rel_obj = (obj - ref.objective) / std::abs(ref.objective);
    const double rel_err = (admm.u_star - Matrix(ref.u)).norm() / Matrix(ref.u).norm();
    worst_obj = std::max(worst_obj, rel_obj);
    worst_err = std::max(worst_err, rel_err);
    if (rel_obj > 0.01) fail(o, fmt("instance %.0f objective %.3g above oracle", k, rel_obj));
    if (rel_err > 2e-2) fail(o, fmt("instance %.0f relative error %.3g", k, rel_err));
  }
  if (o.ok) o.detail = fmt("worst objective gap %.2e, worst relative error %.2e", worst_obj, worst_err);
  return o;
}

// 2: combined residual below 1e-4 within 2000 iterations for several mu.
Outcome convergence() {
  std::mt19937_64 rng(202);
  Outcome o;
  int worst = 0;
  for (double gamma : {0.0, 0.02, 1.0}) {
    ModelInstance inst = oracle::random_instance(rng, 10, 50, gamma);
    inst.lambda = 0.3 * lambda_max(inst, SolverParams{}).value;
    for (double mu : {0.1, 1.0, 10.0}) {
      const Solution sol = solve(inst, SolverParams{mu, 2000, 1e-4});
      worst = std::max(worst, sol.iterations);
      if (!sol.converged) fail(o, fmt("mu %g gamma %g: residual %.3g after 2000 iterations", mu, gamma, sol.residual));
    }
  }
  if (o.ok) o.detail = fmt("slowest run %.0f iterations", worst);
  return o;
}

// 3: alpha >= 1 selects exactly one word.
Outcome single_word() {
  std::mt19937_64 rng(303);
  Outcome o;
  for (int k = 0; k < 10; ++k) {
    ModelInstance inst = oracle::random_instance(rng, 5, 8, 1.0);
    const LambdaMax lm = lambda_max(inst, SolverParams{});
    for (double alpha : {1.0, 1.1}) {
      inst.lambda = alpha * lm.value;
      const auto rows = selected_rows(solve(inst, SolverParams{}).u_star);
      if (rows.size() != 1) fail(o, fmt("instance %.0f alpha %.1f selected %.0f rows", k, alpha, rows.size()));
    }
  }
  if (o.ok) o.detail = "10 instances";
  return o;
}

// 4: shared factorization against per-row dense KKT solves.
Outcome shared_factorization() {
  std::mt19937_64 rng(404);
  Outcome o;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int n = 4 + 16 * k / 9, l = 3 + k % 4;
    const Matrix lap = laplacian(oracle::random_graph(rng, n));
    const double gamma = 0.5 + k, mu = 0.3 + 0.5 * k, lambda = 0.1 * k;
    SolverState s = SolverState::initial(l, n);
    s.u_hat = oracle::random_matrix(rng, l, n);
    s.v_hat = oracle::random_matrix(rng, l, n);
    s.lambda1 = oracle::random_matrix(rng, l, n, -1.0, 1.0);
    s.lambda2 = oracle::random_matrix(rng, l, n, -1.0, 1.0);
    const SolverState before = s;
    primal_update(s, KktFactorization(lap.sparseView(), gamma, mu), lambda);
    for (int j = 0; j < l; ++j) {
      Vector b(2 * n);
      for (int i = 0; i < n; ++i) {
        b(i) = lambda / n + before.lambda1(j, i) - mu * before.u_hat(j, i);
        b(n + i) = lambda / n + before.lambda2(j, i) - mu * before.v_hat(j, i);
      }
      const Vector y = oracle::dense_kkt_solve(lap, gamma, mu, b);
      worst = std::max(worst, (s.u.row(j).transpose() - y.head(n)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (s.v.row(j).transpose() - y.tail(n)).cwiseAbs().maxCoeff());
    }
  }
  if (worst > 1e-8) fail(o, fmt("max deviation %.3g", worst));
  else o.detail = fmt("max deviation %.2e", worst);
  return o;
}

// 5: every logged iterate satisfies the constraints.
Outcome feasibility() {
  std::mt19937_64 rng(505);
  Outcome o;
  ModelInstance inst = oracle::random_instance(rng, 8, 30, 1.0);
  inst.lambda = 0.2;
  const AdmmSolver solver(inst, SolverParams{1.0, 500, 1e-14});
  SolverState state = SolverState::initial(8, 30);
  int logged = 0;
  solver.run(inst.lambda, state, [&](const SolverState& s, double) {
    ++logged;
    if ((s.u_hat.colwise().sum().array() - 1.0).abs().maxCoeff() > 1e-9) fail(o, "column sum off");
    if (s.u_hat.minCoeff() < 0.0) fail(o, "negative u_hat");
    if (s.v_hat.minCoeff() < 0.0) fail(o, "negative v_hat");
    const Matrix rows = s.u + s.v;
    for (Eigen::Index j = 0; j < rows.rows(); ++j)
      if (rows.row(j).maxCoeff() - rows.row(j).minCoeff() > 1e-8) fail(o, "row of U + V not constant");
  });
  if (o.ok) o.detail = fmt("%.0f iterations checked", logged);
  return o;
}

// 6: simplex projection and Laplacian identity.
Outcome projection_oracles() {
  std::mt19937_64 rng(606);
  Outcome o;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vector v = oracle::random_matrix(rng, 5, 1, -1.0, 1.5);
    worst = std::max(worst, (project_simplex(v) - oracle::grid_simplex_projection(v)).cwiseAbs().maxCoeff());
  }
  if (worst > 1e-6) fail(o, fmt("projection deviation %.3g", worst));
  double worst_lap = 0.0;
  for (int k = 0; k < 50; ++k) {
    const SparseMatrix w = oracle::random_graph(rng, 5 + k % 20, 0.2);
    const Matrix lap = laplacian(w);
    const Matrix wd = w;
    const Matrix u = oracle::random_matrix(rng, 4, static_cast<int>(w.rows()));
    double half = 0.0;
    for (Eigen::Index i = 0; i < wd.rows(); ++i)
      for (Eigen::Index j = 0; j < wd.cols(); ++j) half += 0.5 * wd(i, j) * (u.col(i) - u.col(j)).squaredNorm();
    worst_lap = std::max(worst_lap, std::abs((u * lap * u.transpose()).trace() - half));
  }
  if (worst_lap > 1e-9) fail(o, fmt("Laplacian identity deviation %.3g", worst_lap));
  if (o.ok) o.detail = fmt("projection %.2e, Laplacian %.2e", worst, worst_lap);
  return o;
}

// 7: metrics against enumeration, identity, and OIS >= ODS.
Outcome metrics() {
  std::mt19937_64 rng(707);
  Outcome o;
  for (int k = 0; k < 200; ++k) {
    const int h = 1 + k % 10, w = 1 + (k / 10) % 10;
    std::uniform_int_distribution<int> pa(0, 1 + k % 5), pb(0, 1 + k % 3);
    std::vector<std::int32_t> a(h * w), b(h * w);
    for (auto& x : a) x = pa(rng);
    for (auto& x : b) x = pb(rng);
    const std::vector<int> ai(a.begin(), a.end()), bi(b.begin(), b.end());
    const LabelView va(h, w, a), vb(h, w, b);
    if (std::abs(covering(va, vb) - oracle::brute_covering(ai, bi)) > 1e-12) fail(o, "covering mismatch");
    if (std::abs(rand_index(va, vb) - oracle::brute_rand(ai, bi)) > 1e-12) fail(o, "rand index mismatch");
    if (std::abs(variation_of_information(va, vb) - oracle::brute_voi(ai, bi)) > 1e-12) fail(o, "VoI mismatch");
    if (covering(va, va) != 1.0 || rand_index(va, va) != 1.0 || variation_of_information(va, va) != 0.0)
      fail(o, "identical partitions not (1, 1, 0)");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<ImageScores> images(3);
    for (auto& img : images) {
      img.alphas = {0.2, 0.4, 0.6, 0.8};
      for (int a = 0; a < 4; ++a) img.scores.push_back({u(rng), u(rng), u(rng)});
    }
    const auto s = ods_ois(images);
    if (s.covering.ois < s.covering.ods) fail(o, "OIS below ODS");
  }
  if (o.ok) o.detail = "200 random map pairs, 50 tables";
  return o;
}

// 8: the synthetic two-region image yields a two-word segmentation.
Outcome synthetic_segmentation() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "spsg_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "two.png").string();
  write_png_rgb(path, synthetic::two_region_image());
  const auto truth = synthetic::two_region_truth();

  RunConfig cfg;
  cfg.image = path;
  cfg.slic_count = 30;
  const PreparedImage prepared = prepare(cfg);
  const RunResult result = run_segmentation(prepared, cfg);
  double best = -1.0;
  for (const auto& e : result.family.entries) {
    if (e.words != 2) continue;
    best = std::max(best, covering(e.labels, LabelView(64, 64, truth)));
  }
  if (best < 0.0) fail(o, "no entry with K = 2");
  else if (best < 0.9) fail(o, fmt("best covering at K = 2 is %.3f", best));
  else o.detail = fmt("%.0f superpixels, covering %.3f at K = 2", prepared.map.count, best);
  return o;
}

// 9: solver stage on n ~ 40, l = 20.
Outcome performance() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "spsg_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "perf.png").string();
  write_png_rgb(path, synthetic::two_region_image(11));
  RunConfig cfg;
  cfg.image = path;
  cfg.slic_count = 40;
  const PreparedImage prepared = prepare(cfg);
  const SolverParams params = solver_params(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ModelInstance inst = prepared.instance;
  inst.lambda = 0.5 * lambda_max(inst, params).value;
  solve(inst, params);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 2.0) fail(o, fmt("solver stage took %.2f s", secs));
  else o.detail = fmt("n = %.0f, l = %.0f, %.3f s including lambda_max", inst.nodes(), inst.words(), secs);
  return o;
}

// 10: eval produces the benchmark table from fabricated per-image scores.
Outcome eval_table() {
  Outcome o;
  std::vector<ImageScores> images(2);
  images[0] = {"a", {0.1, 0.5}, {{0.6, 0.7, 2.0}, {0.8, 0.76, 1.5}}};
  images[1] = {"b", {0.1, 0.5}, {{0.7, 0.8, 1.0}, {0.5, 0.7, 1.8}}};
  const auto s = ods_ois(images);
  const std::string table = format_summary_table(s, "IS4");
  const std::string expect =
      "                 Cov (up)       PRI (up)     VoI (down)\n"
      "Method         ODS    OIS     ODS    OIS     ODS    OIS\n"
      "IS4           0.65   0.75    0.75   0.78    1.50   1.25\n";
  if (table != expect) fail(o, "unexpected table:\n" + table);
  else o.detail = "ODS/OIS Cov/PRI/VoI table";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "solver-oracle agreement", 60.0, solver_oracle},
      {2, "convergence robustness", 30.0, convergence},
      {3, "single-word limit", 20.0, single_word},
      {4, "shared-factorization equivalence", 5.0, shared_factorization},
      {5, "feasibility", 5.0, feasibility},
      {6, "projection oracles", 10.0, projection_oracles},
      {7, "metric correctness", 5.0, metrics},
      {8, "synthetic segmentation", 10.0, synthetic_segmentation},
      {9, "performance sanity", 60.0, performance},
      {10, "benchmark table", 5.0, eval_table},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && secs >= c.limit_seconds) {
      o.ok = false;
      o.detail += fmt(" (over the %.0f s limit)", c.limit_seconds);
    }
    failures += !o.ok;
    std::printf("%s %2d %-34s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
