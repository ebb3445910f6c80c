#include "spsg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spsg {

Dictionary learn_dictionary(const Matrix& x, const NmfOptions& options, std::vector<double>* error_trace) {
  if (x.size() == 0) throw std::invalid_argument("feature matrix is empty");
  if (options.words < 1) throw std::invalid_argument("dictionary size must be >= 1");
  if (options.iterations < 0) throw std::invalid_argument("iteration count must be >= 0");
  if ((x.array() < 0.0).any() || !x.allFinite()) throw std::invalid_argument("features must be finite and nonnegative");

  const Eigen::Index n = x.cols(), l = options.words;
  std::mt19937_64 rng(options.seed);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

  Matrix d(x.rows(), l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const Eigen::Index src = j < n ? order[static_cast<std::size_t>(j)] : pick(rng);
    d.col(j) = x.col(src).array() + 1e-6;
  }
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  Matrix h(l, n);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < n; ++i) h(j, i) = unit(rng);

  constexpr double tiny = 1e-300;
  if (error_trace) {
    error_trace->clear();
    error_trace->push_back((x - d * h).norm());
  }
  for (int it = 0; it < options.iterations; ++it) {
    h.array() *= (d.transpose() * x).array() / ((d.transpose() * d) * h).array().max(tiny);
    for (Eigen::Index j = 0; j < l; ++j) {
      if (h.row(j).maxCoeff() == 0.0) d.col(j) = x.col(pick(rng)).array() + 1e-6;
    }
    d.array() *= (x * h.transpose()).array() / (d * (h * h.transpose())).array().max(tiny);
    if (error_trace) error_trace->push_back((x - d * h).norm());
  }

  const double target = x.colwise().sum().mean();
  for (Eigen::Index j = 0; j < l; ++j) {
    const double s = d.col(j).sum();
    if (s > 0.0 && target > 0.0) d.col(j) *= target / s;
  }
  return Dictionary{std::move(d)};
}

Matrix dissimilarity(const Dictionary& dict, const Matrix& features) {
  if (dict.words.rows() != features.rows()) throw std::invalid_argument("dictionary and feature dimensions differ");
  Matrix r(dict.words.cols(), features.cols());
  for (Eigen::Index i = 0; i < features.cols(); ++i)
    for (Eigen::Index j = 0; j < dict.words.cols(); ++j) r(j, i) = (dict.words.col(j) - features.col(i)).squaredNorm();
  return r;
}

Vector size_matrix(const std::vector<int>& sizes) {
  if (sizes.empty()) throw std::invalid_argument("no superpixel sizes");
  double total = 0.0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("superpixel sizes must be >= 1");
    total += s;
  }
  Vector p(static_cast<Eigen::Index>(sizes.size()));
  for (std::size_t i = 0; i < sizes.size(); ++i) p(static_cast<Eigen::Index>(i)) = sizes[i] / total;
  return p;
}

SparseMatrix edge_weights(const AdjacencyGraph& graph, const Matrix& features, double sigma_x) {
  if (!(sigma_x > 0.0)) throw std::invalid_argument("sigma_x must be positive");
  if (graph.node_count != features.cols()) throw std::invalid_argument("graph nodes and feature columns differ");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * graph.edges.size());
  for (const auto& e : graph.edges) {
    if (e.i == e.j) throw std::invalid_argument("self loop in adjacency graph");
    const double dist2 = (features.col(e.i) - features.col(e.j)).squaredNorm();
    const double w = std::exp(-dist2 / sigma_x - e.mean_strength);
    triplets.emplace_back(e.i, e.j, w);
    triplets.emplace_back(e.j, e.i, w);
  }
  SparseMatrix w(graph.node_count, graph.node_count);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

SparseMatrix laplacian(const SparseMatrix& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("similarity matrix must be square");
  const SparseMatrix wt = w.transpose();
  if ((w - wt).norm() > 1e-12 * std::max(1.0, w.norm())) throw std::invalid_argument("similarity matrix is not symmetric");
  if (w.diagonal().cwiseAbs().sum() != 0.0) throw std::invalid_argument("similarity matrix has a nonzero diagonal");

  const Vector degree = w * Vector::Ones(w.cols());
  SparseMatrix d(w.rows(), w.cols());
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    if (degree(i) != 0.0) diag.emplace_back(i, i, degree(i));
  d.setFromTriplets(diag.begin(), diag.end());
  SparseMatrix l = d - w;
  l.prune(0.0);
  return l;
}

double auto_sigma(const AdjacencyGraph& graph, const Matrix& features) {
  if (graph.edges.empty()) throw std::invalid_argument("cannot estimate sigma_x without edges");
  double sum = 0.0;
  for (const auto& e : graph.edges) sum += (features.col(e.i) - features.col(e.j)).squaredNorm();
  return std::max(sum / static_cast<double>(graph.edges.size()), 1e-12);
}

void ModelInstance::validate() const {
  const Eigen::Index n = dissimilarity.cols();
  if (dissimilarity.rows() < 1 || n < 1) throw std::invalid_argument("dissimilarity matrix is empty");
  if (weights.size() != n) throw std::invalid_argument("size weights do not match node count");
  if (laplacian.rows() != n || laplacian.cols() != n) throw std::invalid_argument("Laplacian does not match node count");
  if (!dissimilarity.allFinite() || (dissimilarity.array() < 0.0).any())
    throw std::invalid_argument("dissimilarity must be finite and nonnegative");
  if ((weights.array() <= 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("size weights must be positive and sum to 1");
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
}

double objective(const ModelInstance& inst, const Matrix& u, double lambda) {
  double fit = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) fit += inst.weights(i) * inst.dissimilarity.col(i).dot(u.col(i));
  const double smooth = inst.gamma == 0.0 ? 0.0 : (u * inst.laplacian).cwiseProduct(u).sum();
  const double sparsity = u.cwiseAbs().rowwise().maxCoeff().sum();
  return fit + inst.gamma * smooth + lambda * sparsity;
}

}  // namespace spsg
