#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spsg/model.hpp"

using namespace spsg;

namespace {

AdjacencyGraph path_graph(int n) {
  AdjacencyGraph g;
  g.node_count = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1, 0.0});
  return g;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("dissimilarity examples") {
    Dictionary dict{Matrix::Zero(3, 2)};
    dict.words.col(1) << 0.2, 0.3, 0.5;
    Matrix x(3, 2);
    x.col(0) << 1, 0, 0;
    x.col(1) << 0.2, 0.3, 0.5;
    const Matrix r = dissimilarity(dict, x);
    CHECK(r(0, 0) == 1.0);
    CHECK(r(1, 1) == 0.0);
  }

  TEST_CASE("dissimilarity matches a double loop") {
    std::mt19937_64 rng(1);
    Dictionary dict{oracle::random_matrix(rng, 3, 4)};
    const Matrix x = oracle::random_matrix(rng, 3, 5);
    const Matrix r = dissimilarity(dict, x);
    REQUIRE(r.rows() == 4);
    REQUIRE(r.cols() == 5);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 5; ++i) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (dict.words(k, j) - x(k, i)) * (dict.words(k, j) - x(k, i));
        CHECK(r(j, i) == doctest::Approx(s).epsilon(1e-14));
      }
    CHECK_THROWS_AS(dissimilarity(dict, Matrix::Ones(2, 5)), std::invalid_argument);
  }

  TEST_CASE("size weights") {
    CHECK(size_matrix({16})(0) == 1.0);
    const Vector q = size_matrix({4, 4, 4, 4});
    for (int i = 0; i < 4; ++i) CHECK(q(i) == 0.25);
    const Vector p = size_matrix({1, 3});
    CHECK(p(0) == 0.25);
    CHECK(p(1) == 0.75);
    CHECK_THROWS_AS(size_matrix({}), std::invalid_argument);
    CHECK_THROWS_AS(size_matrix({2, 0}), std::invalid_argument);
  }

  TEST_CASE("edge weights") {
    AdjacencyGraph g = path_graph(2);
    Matrix x(2, 2);
    x << 0.0, 1.0, 0.0, 1.0;  // squared distance 2
    SparseMatrix w = edge_weights(g, x, 2.0);
    CHECK(w.coeff(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(w.coeff(1, 0) == w.coeff(0, 1));
    CHECK(w.coeff(0, 0) == 0.0);

    Matrix same = Matrix::Ones(2, 2);
    CHECK(edge_weights(g, same, 1.0).coeff(0, 1) == 1.0);

    double prev = 1.0;
    for (double b : {0.1, 0.5, 1.0, 5.0, 50.0}) {
      g.edges[0].mean_strength = b;
      const double v = edge_weights(g, same, 1.0).coeff(0, 1);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-20);
    CHECK_THROWS_AS(edge_weights(g, same, 0.0), std::invalid_argument);
  }

  TEST_CASE("Laplacian examples") {
    SparseMatrix zero(3, 3);
    CHECK(Matrix(laplacian(zero)).isZero());

    SparseMatrix w(2, 2);
    w.insert(0, 1) = 0.7;
    w.insert(1, 0) = 0.7;
    const Matrix l = laplacian(w);
    CHECK(l(0, 0) == 0.7);
    CHECK(l(1, 1) == 0.7);
    CHECK(l(0, 1) == -0.7);
    CHECK(l(1, 0) == -0.7);

    SparseMatrix asym(2, 2);
    asym.insert(0, 1) = 0.5;
    CHECK_THROWS_AS(laplacian(asym), std::invalid_argument);
  }

  TEST_CASE("Laplacian quadratic form identity") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const SparseMatrix w = oracle::random_graph(rng, 12);
      const Matrix l = laplacian(w);
      CHECK((l * Vector::Ones(12)).cwiseAbs().maxCoeff() < 1e-12);
      const Matrix wd = w;
      const Vector u = oracle::random_matrix(rng, 12, 1, -1.0, 1.0);
      double half = 0.0;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) half += 0.5 * wd(i, j) * (u(i) - u(j)) * (u(i) - u(j));
      CHECK(u.dot(l * u) == doctest::Approx(half).epsilon(1e-12));
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(l).eigenvalues().minCoeff() > -1e-12);
    }
  }

  TEST_CASE("automatic sigma") {
    AdjacencyGraph g = path_graph(2);
    CHECK(auto_sigma(g, Matrix::Ones(3, 2)) == 1e-12);

    Matrix x(2, 2);
    x << 0.0, 1.0, 0.0, 1.0;
    CHECK(auto_sigma(g, x) == doctest::Approx(2.0));

    AdjacencyGraph three;
    three.node_count = 4;
    three.edges = {{0, 1, 1, 0.0}, {0, 2, 1, 0.0}, {0, 3, 1, 0.0}};
    Matrix y = Matrix::Zero(1, 4);
    y << 0.0, 1.0, std::sqrt(2.0), std::sqrt(3.0);
    CHECK(auto_sigma(three, y) == doctest::Approx(2.0));

    AdjacencyGraph empty;
    empty.node_count = 1;
    CHECK_THROWS_AS(auto_sigma(empty, Matrix::Ones(1, 1)), std::invalid_argument);
  }

  TEST_CASE("NMF error never increases") {
    std::mt19937_64 rng(13);
    const Matrix x = oracle::random_matrix(rng, 8, 30);
    std::vector<double> trace;
    learn_dictionary(x, NmfOptions{5, 100, 3}, &trace);
    REQUIRE(trace.size() == 101);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] * (1.0 + 1e-12));
  }

  TEST_CASE("NMF recovers a repeated column") {
    Vector col(4);
    col << 0.1, 0.4, 0.2, 0.3;
    const Matrix x = col.replicate(1, 6);
    std::vector<double> trace;
    const Dictionary d = learn_dictionary(x, NmfOptions{1, 50, 0}, &trace);
    CHECK(trace.back() / x.norm() < 1e-6);
    const Vector dir = d.words.col(0) / d.words.col(0).norm();
    CHECK((dir - col / col.norm()).norm() < 1e-6);
    CHECK(d.words.col(0).sum() == doctest::Approx(1.0));
  }

  TEST_CASE("NMF fits an exact rank-2 product") {
    Matrix a(4, 2), b(2, 6);
    a << 1.0, 0.1, 0.8, 0.2, 0.1, 0.9, 0.0, 1.0;
    b << 1.0, 0.7, 0.2, 0.0, 0.5, 0.9, 0.1, 0.4, 0.9, 1.0, 0.3, 0.6;
    const Matrix x = a * b;
    std::vector<double> trace;
    learn_dictionary(x, NmfOptions{2, 2000, 0}, &trace);
    CHECK(trace.back() / x.norm() <= 1e-3);
  }

  TEST_CASE("NMF input validation") {
    CHECK_THROWS_AS(learn_dictionary(Matrix(), NmfOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(learn_dictionary(-Matrix::Ones(2, 2), NmfOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(learn_dictionary(Matrix::Ones(2, 2), NmfOptions{0, 10, 0}), std::invalid_argument);
  }

  TEST_CASE("objective and validation") {
    std::mt19937_64 rng(19);
    ModelInstance inst = oracle::random_instance(rng, 3, 5, 0.7);
    inst.validate();
    const Matrix u = Matrix::Constant(3, 5, 1.0 / 3.0);
    const double expect =
        oracle::objective(inst.dissimilarity, inst.weights, Matrix(inst.laplacian), inst.gamma, 0.4, u);
    CHECK(objective(inst, u, 0.4) == doctest::Approx(expect).epsilon(1e-13));

    ModelInstance bad = inst;
    bad.weights(0) += 0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = inst;
    bad.gamma = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = inst;
    bad.dissimilarity(0, 0) = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
