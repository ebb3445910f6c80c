#pragma once

#include <cstdint>
#include <vector>

#include "spsg/superpixels.hpp"
#include "spsg/types.hpp"

namespace spsg {

/// Nonnegative dictionary; column j is word d_j.
struct Dictionary {
  Matrix words;  // d x l

  int dimension() const { return static_cast<int>(words.rows()); }
  int size() const { return static_cast<int>(words.cols()); }
};

struct NmfOptions {
  int words = 20;
  int iterations = 200;
  std::uint64_t seed = 0;
};

/// Learns D >= 0 with Frobenius-loss multiplicative updates on X ~ D H.
/// Initial words are distinct random columns of X plus 1e-6. Words whose
/// activations vanish are re-seeded from random columns (this leaves the
/// reconstruction unchanged). Finally every word is rescaled to the mean
/// column sum of X, so words live on the same scale as the features.
/// When `error_trace` is given it receives ||X - DH||_F before the first
/// update and after each one.
Dictionary learn_dictionary(const Matrix& features, const NmfOptions& options,
                            std::vector<double>* error_trace = nullptr);

/// R(j, i) = ||d_j - x_i||^2.
Matrix dissimilarity(const Dictionary& dict, const Matrix& features);

/// Diagonal of the size matrix P: p_i = s_i / sum(s).
Vector size_matrix(const std::vector<int>& sizes);

/// Sparse symmetric similarity on graph edges:
/// W(i, j) = exp(-||x_i - x_j||^2 / sigma_x - b_ij).
SparseMatrix edge_weights(const AdjacencyGraph& graph, const Matrix& features, double sigma_x);

/// L = diag(W 1) - W. Throws if W is not symmetric with zero diagonal.
SparseMatrix laplacian(const SparseMatrix& w);

/// Mean squared feature distance over graph edges, floored at 1e-12.
double auto_sigma(const AdjacencyGraph& graph, const Matrix& features);

/// Everything the solver consumes for one image.
struct ModelInstance {
  Matrix dissimilarity;  // R, l x n
  Vector weights;        // p, diagonal of P
  SparseMatrix similarity;  // W
  SparseMatrix laplacian;   // L
  double gamma = 10.0;
  double lambda = 0.0;
  double sigma_x = 1.0;

  int words() const { return static_cast<int>(dissimilarity.rows()); }
  int nodes() const { return static_cast<int>(dissimilarity.cols()); }

  /// Throws std::invalid_argument when dimensions or invariants are violated.
  void validate() const;
};

/// Objective tr(P R^T U) + gamma tr(U L U^T) + lambda * sum_j max_i |U(j, i)|.
double objective(const ModelInstance& instance, const Matrix& u, double lambda);
inline double objective(const ModelInstance& instance, const Matrix& u) {
  return objective(instance, u, instance.lambda);
}

}  // namespace spsg
