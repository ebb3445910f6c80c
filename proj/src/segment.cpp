#include "spsg/segment.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "spsg/parallel.hpp"

namespace spsg {

Assignment assign(const Matrix& u_star) { return assign(u_star, selected_rows(u_star)); }

Assignment assign(const Matrix& u_star, const std::vector<int>& selected) {
  if (selected.empty()) throw std::invalid_argument("no selected words to assign to");
  Assignment a;
  a.selected_words = selected;
  std::sort(a.selected_words.begin(), a.selected_words.end());
  a.word_of.resize(static_cast<std::size_t>(u_star.cols()));
  for (Eigen::Index i = 0; i < u_star.cols(); ++i) {
    int best = a.selected_words.front();
    for (int j : a.selected_words)
      if (u_star(j, i) > u_star(best, i)) best = j;
    a.word_of[static_cast<std::size_t>(i)] = best;
  }
  return a;
}

SuperpixelMap merge(const SuperpixelMap& map, const AdjacencyGraph& graph, const Assignment& assignment) {
  if (assignment.word_of.size() != static_cast<std::size_t>(map.count))
    throw std::invalid_argument("assignment does not cover every superpixel");
  std::vector<int> parent(static_cast<std::size_t>(map.count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& e : graph.edges) {
    if (assignment.word_of[e.i] != assignment.word_of[e.j]) continue;
    const int a = find(e.i), b = find(e.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  SuperpixelMap out;
  out.height = map.height;
  out.width = map.width;
  out.labels.resize(map.labels.size());
  std::vector<int> dense(static_cast<std::size_t>(map.count), -1);
  int next = 0;
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const int root = find(map.labels[p]);
    if (dense[root] < 0) dense[root] = next++;
    out.labels[p] = dense[root];
  }
  out.count = next;
  return out;
}

std::vector<double> SweepConfig::default_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  return grid;
}

void SweepConfig::validate() const {
  if (alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
  for (double a : alpha_grid)
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("alpha values must be finite and >= 0");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw std::invalid_argument("lambda_max must be positive");
}

SegmentationFamily sweep(const ModelInstance& instance, const SuperpixelMap& map, const AdjacencyGraph& graph,
                         const SweepConfig& config, const SolverParams& params, bool warm_start,
                         std::vector<SweepTraceRow>* trace) {
  config.validate();
  std::vector<double> alphas = config.alpha_grid;
  std::sort(alphas.begin(), alphas.end());

  const AdmmSolver solver(instance, params);
  SegmentationFamily family;
  family.entries.resize(alphas.size());

  auto finish = [&](std::size_t k, const Solution& sol) {
    SweepEntry& e = family.entries[k];
    e.alpha = alphas[k];
    e.lambda = alphas[k] * config.lambda_max;
    const Assignment a = assign(sol.u_star);
    e.labels = merge(map, graph, a);
    e.words = a.regions();
    e.segments = e.labels.count;
    e.objective = sol.objective;
    e.iterations = sol.iterations;
    e.converged = sol.converged;
  };

  std::vector<std::vector<SweepTraceRow>> traces(alphas.size());
  auto run_entry = [&](std::size_t k, SolverState& state) {
    const double lambda = alphas[k] * config.lambda_max;
    IterationCallback cb;
    if (trace) {
      cb = [&, k, lambda](const SolverState& s, double eps) {
        traces[k].push_back({alphas[k], {s.iteration, eps, objective(instance, s.u_hat, lambda)}});
      };
    }
    finish(k, solver.run(lambda, state, cb));
  };

  if (warm_start) {
    SolverState state = SolverState::initial(instance.words(), instance.nodes());
    for (std::size_t k = 0; k < alphas.size(); ++k) run_entry(k, state);
  } else {
    parallel_for(0, alphas.size(), [&](std::size_t k) {
      SolverState state = SolverState::initial(instance.words(), instance.nodes());
      run_entry(k, state);
    }, 1);
  }
  if (trace) {
    trace->clear();
    for (auto& t : traces) trace->insert(trace->end(), t.begin(), t.end());
  }
  return family;
}

}  // namespace spsg
