#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spsg/segment.hpp"

using namespace spsg;

namespace {

// Each superpixel is one pixel of a 1 x n strip.
SuperpixelMap strip(int n) {
  SuperpixelMap m{1, n, n, {}};
  for (int i = 0; i < n; ++i) m.labels.push_back(i);
  return m;
}

AdjacencyGraph graph_of(int n, const std::vector<std::pair<int, int>>& edges) {
  AdjacencyGraph g;
  g.node_count = n;
  for (auto [i, j] : edges) g.edges.push_back({i, j, 1, 0.0});
  return g;
}

}  // namespace

TEST_SUITE("segment") {
  TEST_CASE("assignment of one-hot columns") {
    Matrix u = Matrix::Zero(3, 4);
    u(2, 0) = u(0, 1) = u(1, 2) = u(2, 3) = 1.0;
    const Assignment a = assign(u);
    CHECK(a.word_of == std::vector<int>{2, 0, 1, 2});
    CHECK(a.regions() == 3);
  }

  TEST_CASE("assignment argmax and ties") {
    Matrix u(2, 2);
    u << 0.6, 0.5, 0.4, 0.5;
    const Assignment a = assign(u);
    CHECK(a.selected_words == std::vector<int>{0, 1});
    CHECK(a.word_of == std::vector<int>{0, 0});
    Matrix v(3, 1);
    v << 0.2, 0.4, 0.4;
    CHECK(assign(v, {2, 1}).word_of == std::vector<int>{1});
  }

  TEST_CASE("unselected rows are ignored") {
    Matrix u(3, 2);
    u << 0.98, 0.0, 0.02, 0.02, 0.0, 0.98;
    const Assignment a = assign(u);
    CHECK(a.selected_words == std::vector<int>{0, 2});
    CHECK(a.word_of == std::vector<int>{0, 2});
  }

  TEST_CASE("merge with one word") {
    const auto m = strip(4);
    const auto g = graph_of(4, {{0, 1}, {1, 2}, {2, 3}});
    const auto out = merge(m, g, Assignment{{5, 5, 5, 5}, {5}});
    CHECK(out.count == 1);
  }

  TEST_CASE("merge with alternating words on a path") {
    const auto m = strip(5);
    const auto g = graph_of(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    const auto out = merge(m, g, Assignment{{0, 1, 0, 1, 0}, {0, 1}});
    CHECK(out.count == 5);
    CHECK(out.labels == std::vector<std::int32_t>{0, 1, 2, 3, 4});
  }

  TEST_CASE("merge matches flood fill on a small graph") {
    // 1 x 5 strip whose graph has two extra chords.
    const auto m = strip(5);
    const auto g = graph_of(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 3}, {2, 4}});
    const std::vector<int> words{0, 0, 1, 0, 1};
    const auto out = merge(m, g, Assignment{words, {0, 1}});
    // Components by hand: {0, 1, 3} through edges (0,1), (0,3); {2, 4} through (2,4).
    CHECK(oracle::same_partition(std::vector<int>(out.labels.begin(), out.labels.end()), {0, 0, 1, 0, 1}));
    CHECK(out.count == 2);
  }

  TEST_CASE("merge on a pixel grid matches flood fill") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 2);
    const int h = 6, w = 7;
    SuperpixelMap m{h, w, h * w, {}};
    AdjacencyGraph g;
    g.node_count = h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        m.labels.push_back(y * w + x);
        if (x + 1 < w) g.edges.push_back({y * w + x, y * w + x + 1, 1, 0.0});
        if (y + 1 < h) g.edges.push_back({y * w + x, (y + 1) * w + x, 1, 0.0});
      }
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> words(h * w);
      for (auto& v : words) v = pick(rng);
      const auto out = merge(m, g, Assignment{words, {0, 1, 2}});
      CHECK(std::vector<int>(out.labels.begin(), out.labels.end()) == oracle::flood_fill(h, w, words));
    }
  }

  TEST_CASE("sweep sorts alphas and reaches a single word") {
    std::mt19937_64 rng(5);
    const int n = 6;
    const ModelInstance inst = oracle::random_instance(rng, 4, n, 0.2);
    const auto m = strip(n);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    const auto g = graph_of(n, edges);
    const double lm = lambda_max(inst, SolverParams{}).value;

    SweepConfig cfg{{0.9, 0.1, 0.5}, lm};
    std::vector<SweepTraceRow> trace;
    const auto fam = sweep(inst, m, g, cfg, SolverParams{}, true, &trace);
    REQUIRE(fam.entries.size() == 3);
    CHECK(fam.entries[0].alpha == 0.1);
    CHECK(fam.entries[1].alpha == 0.5);
    CHECK(fam.entries[2].alpha == 0.9);
    CHECK(fam.entries[1].lambda == doctest::Approx(0.5 * lm));
    CHECK(!trace.empty());
    CHECK(trace.front().alpha == 0.1);

    const auto one = sweep(inst, m, g, SweepConfig{{1.0}, lm}, SolverParams{}, false);
    REQUIRE(one.entries.size() == 1);
    CHECK(one.entries[0].words == 1);
    CHECK(one.entries[0].segments == 1);
  }

  TEST_CASE("sweep validation") {
    CHECK(SweepConfig::default_grid().size() == 19);
    CHECK(SweepConfig::default_grid().front() == doctest::Approx(0.05));
    CHECK(SweepConfig::default_grid().back() == doctest::Approx(0.95));
    CHECK_THROWS_AS((SweepConfig{{}, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SweepConfig{{0.5}, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SweepConfig{{-0.1}, 1.0}.validate()), std::invalid_argument);
  }
}
