#pragma once

#include <functional>
#include <vector>

#include "spsg/model.hpp"
#include "spsg/types.hpp"

namespace spsg {

struct SolverParams {
  double mu = 1.0;
  int max_iters = 3000;
  double tol = 1e-7;

  void validate() const;
};

/// ADMM iterate. All matrices are l x n. After an auxiliary update u_hat has
/// columns on the probability simplex and v_hat >= 0; after a primal update
/// every row of u + v is constant.
struct SolverState {
  Matrix u, v;
  Matrix u_hat, v_hat;
  Matrix lambda1, lambda2;
  int iteration = 0;
  std::vector<double> residuals;

  /// u_hat uniform (1/l), everything else zero.
  static SolverState initial(int words, int nodes);
};

/// Shared factorization of the row subproblem
///   minimize 1/2 y^T B y + y^T b  subject to  A y = 0,
/// with y = [u_j; v_j], B = blockdiag(2 gamma L + mu I, mu I) and A the
/// (n-1) x 2n matrix encoding u_{i-1} + v_{i-1} = u_i + v_i. The system is
/// reduced to the Schur complement A B^{-1} A^T; both factors are Cholesky.
class KktFactorization {
 public:
  KktFactorization(const SparseMatrix& laplacian, double gamma, double mu);

  int nodes() const { return nodes_; }
  double mu() const { return mu_; }

  /// Minimizers for each column of `rhs` (2n x k); returns 2n x k.
  Matrix solve(const Matrix& rhs) const;

  /// Row form of solve(): with b_u, b_v stacked as rows (k x n each), writes
  /// the minimizers as rows of u and v. Uses a dense copy of the solution map.
  void solve_rows(const Matrix& bu, const Matrix& bv, Matrix& u, Matrix& v) const;

 private:
  int nodes_ = 0;
  double mu_ = 1.0;
  Eigen::LLT<Matrix> smooth_llt_;  // 2 gamma L + mu I
  Eigen::LLT<Matrix> schur_llt_;   // D M^{-1} D^T + D D^T / mu
  Matrix smooth_inv_dt_;           // M^{-1} D^T, n x (n-1)
  Matrix map_t_;                   // solve(I)^T, 2n x 2n
};

/// Minimizes the augmented Lagrangian over (U, V) under the row constraint:
/// one back-solve per dictionary word against the shared factorization.
void primal_update(SolverState& state, const KktFactorization& kkt, double lambda);

/// Euclidean projection of a vector onto {z >= 0, sum z = 1}.
Vector project_simplex(const Vector& v);
Matrix project_simplex_columns(const Matrix& m);
Matrix project_nonneg(const Matrix& m);

/// U_hat = Pi_simplex(U + (Lambda1 - R diag(p)) / mu), V_hat = max(V + Lambda2 / mu, 0).
void auxiliary_update(SolverState& state, const Matrix& dissimilarity, const Vector& weights, double mu);

/// Lambda1 += mu (U - U_hat), Lambda2 += mu (V - V_hat).
void dual_update(SolverState& state, double mu);

/// (1/mu)|dLambda1|^2 + mu |dU|^2 + (1/mu)|dLambda2|^2 + mu |dV|^2, squared Frobenius norms.
double combined_residual(const SolverState& previous, const SolverState& current, double mu);

struct Solution {
  Matrix u_star;  // l x n, columns on the simplex
  int iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// Called after every completed iteration with the new state and residual.
using IterationCallback = std::function<void(const SolverState&, double residual)>;

/// ADMM bound to one (L, gamma, mu); reusable across lambda values.
class AdmmSolver {
 public:
  AdmmSolver(const ModelInstance& instance, const SolverParams& params);

  /// Iterates from `state` (warm start) until the residual drops below tol or
  /// max_iters is reached. On non-convergence the u_hat with the smallest
  /// residual is returned with converged = false.
  Solution run(double lambda, SolverState& state, const IterationCallback& callback = {}) const;

  const SolverParams& params() const { return params_; }
  const KktFactorization& factorization() const { return kkt_; }

 private:
  ModelInstance instance_;
  SolverParams params_;
  KktFactorization kkt_;
};

struct TraceRow {
  int iteration = 0;
  double residual = 0.0;
  double objective = 0.0;
};

/// Solves from the default initial state at instance.lambda.
Solution solve(const ModelInstance& instance, const SolverParams& params, std::vector<TraceRow>* trace = nullptr);

/// Rows j with max_i U(j, i) > 0.1 / l.
std::vector<int> selected_rows(const Matrix& u);

struct LambdaMax {
  double value = 0.0;
  bool converged = true;  // every probe converged
  bool bracketed = true;  // a single-word probe was found
};

/// Smallest lambda at which the solver selects exactly one word, bracketed by
/// doubling (or halving) from the largest column range of R diag(p) and
/// refined by 12 bisection steps of loose-tolerance solves; the result is
/// confirmed by a full-tolerance solve and raised by at most 5% if needed.
/// Doubling is capped by sum_i (G_ki - min_j G_ji), G = R diag(p) and k its
/// cheapest row, above which e_k 1^T is optimal. Halving stops once successive
/// probes no longer change. Loose probes warm-start from the last multi-word
/// state. Identical dictionary words are collapsed before probing.
LambdaMax lambda_max(const ModelInstance& instance, const SolverParams& params);

}  // namespace spsg
