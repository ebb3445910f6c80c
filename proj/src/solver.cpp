#include "spsg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spsg/parallel.hpp"

namespace spsg {

void SolverParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

SolverState SolverState::initial(int words, int nodes) {
  SolverState s;
  s.u = Matrix::Zero(words, nodes);
  s.v = Matrix::Zero(words, nodes);
  s.u_hat = Matrix::Constant(words, nodes, 1.0 / words);
  s.v_hat = Matrix::Zero(words, nodes);
  s.lambda1 = Matrix::Zero(words, nodes);
  s.lambda2 = Matrix::Zero(words, nodes);
  return s;
}

namespace {

// (n-1) x n consecutive-difference operator: row i is e_i - e_{i+1}.
Matrix difference_operator(int n) {
  Matrix d = Matrix::Zero(std::max(n - 1, 0), n);
  for (int i = 0; i + 1 < n; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

// D * X for the difference operator without forming D.
Matrix apply_difference(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) return Matrix(0, x.cols());
  return x.topRows(n - 1) - x.bottomRows(n - 1);
}

// D^T * Y for the difference operator.
Matrix apply_difference_transpose(const Matrix& y, Eigen::Index n) {
  Matrix out = Matrix::Zero(n, y.cols());
  if (n < 2) return out;
  out.topRows(n - 1) += y;
  out.bottomRows(n - 1) -= y;
  return out;
}

}  // namespace

KktFactorization::KktFactorization(const SparseMatrix& laplacian, double gamma, double mu)
    : nodes_(static_cast<int>(laplacian.rows())), mu_(mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (laplacian.rows() != laplacian.cols()) throw std::invalid_argument("Laplacian must be square");
  const int n = nodes_;
  Matrix smooth = 2.0 * gamma * Matrix(laplacian);
  smooth.diagonal().array() += mu;
  smooth_llt_.compute(smooth);
  if (smooth_llt_.info() != Eigen::Success) throw std::runtime_error("KKT block is not positive definite");

  const Matrix d = difference_operator(n);
  smooth_inv_dt_ = smooth_llt_.solve(Matrix(d.transpose()));
  Matrix schur = d * smooth_inv_dt_ + (d * d.transpose()) / mu;
  schur_llt_.compute(schur);
  if (n > 1 && schur_llt_.info() != Eigen::Success) throw std::runtime_error("KKT Schur complement is singular");
  map_t_ = solve(Matrix::Identity(2 * n, 2 * n)).transpose();
}

Matrix KktFactorization::solve(const Matrix& rhs) const {
  const Eigen::Index n = nodes_;
  if (rhs.rows() != 2 * n) throw std::invalid_argument("KKT right-hand side has wrong height");
  const Matrix bu = rhs.topRows(n), bv = rhs.bottomRows(n);
  const Matrix wu = smooth_llt_.solve(bu);
  Matrix y(2 * n, rhs.cols());
  if (n < 2) {
    y.topRows(n) = -wu;
    y.bottomRows(n) = -bv / mu_;
    return y;
  }
  const Matrix wv = bv / mu_;
  const Matrix nu = -schur_llt_.solve(apply_difference(wu + wv));
  y.topRows(n) = -(wu + smooth_inv_dt_ * nu);
  y.bottomRows(n) = -(bv + apply_difference_transpose(nu, n)) / mu_;
  return y;
}

void KktFactorization::solve_rows(const Matrix& bu, const Matrix& bv, Matrix& u, Matrix& v) const {
  const Eigen::Index n = nodes_;
  if (bu.cols() != n || bv.cols() != n || bu.rows() != bv.rows())
    throw std::invalid_argument("KKT right-hand side has wrong shape");
  u.noalias() = bu * map_t_.topLeftCorner(n, n);
  u.noalias() += bv * map_t_.bottomLeftCorner(n, n);
  v.noalias() = bu * map_t_.topRightCorner(n, n);
  v.noalias() += bv * map_t_.bottomRightCorner(n, n);
}

void primal_update(SolverState& state, const KktFactorization& kkt, double lambda) {
  const Eigen::Index n = state.u_hat.cols();
  if (n != kkt.nodes()) throw std::invalid_argument("state and factorization node counts differ");
  const double mu = kkt.mu();
  const double shift = lambda / static_cast<double>(n);
  // Row j holds b_j for dictionary word j.
  const Matrix bu = (state.lambda1 - mu * state.u_hat).array() + shift;
  const Matrix bv = (state.lambda2 - mu * state.v_hat).array() + shift;
  kkt.solve_rows(bu, bv, state.u, state.v);
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index k = v.size();
  if (k == 0) return v;
  thread_local std::vector<double> sorted;
  sorted.assign(v.data(), v.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

Matrix project_simplex_columns(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  parallel_for(0, static_cast<std::size_t>(m.cols()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.col(c) = project_simplex(m.col(c));
  }, 512);
  return out;
}

Matrix project_nonneg(const Matrix& m) { return m.cwiseMax(0.0); }

void auxiliary_update(SolverState& state, const Matrix& dissimilarity, const Vector& weights, double mu) {
  const Matrix target = state.u + (state.lambda1 - dissimilarity * weights.asDiagonal()) / mu;
  state.u_hat = project_simplex_columns(target);
  state.v_hat = project_nonneg(state.v + state.lambda2 / mu);
}

void dual_update(SolverState& state, double mu) {
  state.lambda1 += mu * (state.u - state.u_hat);
  state.lambda2 += mu * (state.v - state.v_hat);
}

double combined_residual(const SolverState& previous, const SolverState& current, double mu) {
  return (current.lambda1 - previous.lambda1).squaredNorm() / mu + mu * (current.u - previous.u).squaredNorm() +
         (current.lambda2 - previous.lambda2).squaredNorm() / mu + mu * (current.v - previous.v).squaredNorm();
}

AdmmSolver::AdmmSolver(const ModelInstance& instance, const SolverParams& params)
    : instance_(instance), params_(params), kkt_(instance.laplacian, instance.gamma, params.mu) {
  params_.validate();
  instance_.validate();
}

Solution AdmmSolver::run(double lambda, SolverState& state, const IterationCallback& callback) const {
  const int l = instance_.words(), n = instance_.nodes();
  if (state.u_hat.rows() != l || state.u_hat.cols() != n) throw std::invalid_argument("solver state has wrong shape");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  const double mu = params_.mu;

  state.iteration = 0;
  state.residuals.clear();
  Solution sol;
  Matrix best_u = state.u_hat;
  double best_residual = std::numeric_limits<double>::infinity();
  SolverState previous;
  for (int k = 1; k <= params_.max_iters; ++k) {
    previous.u = state.u;
    previous.v = state.v;
    previous.lambda1 = state.lambda1;
    previous.lambda2 = state.lambda2;

    primal_update(state, kkt_, lambda);
    auxiliary_update(state, instance_.dissimilarity, instance_.weights, mu);
    dual_update(state, mu);

    const double eps = combined_residual(previous, state, mu);
    state.iteration = k;
    state.residuals.push_back(eps);
    if (callback) callback(state, eps);
    if (eps < best_residual) {
      best_residual = eps;
      best_u = state.u_hat;
    }
    if (eps < params_.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.iterations = state.iteration;
  if (sol.converged) {
    sol.u_star = state.u_hat;
    sol.residual = state.residuals.back();
  } else {
    sol.u_star = best_u;
    sol.residual = best_residual;
  }
  sol.u_star = sol.u_star.cwiseMax(0.0);
  sol.objective = objective(instance_, sol.u_star, lambda);
  return sol;
}

Solution solve(const ModelInstance& instance, const SolverParams& params, std::vector<TraceRow>* trace) {
  AdmmSolver solver(instance, params);
  SolverState state = SolverState::initial(instance.words(), instance.nodes());
  IterationCallback cb;
  if (trace) {
    trace->clear();
    cb = [&](const SolverState& s, double eps) {
      trace->push_back({s.iteration, eps, objective(instance, s.u_hat)});
    };
  }
  return solver.run(instance.lambda, state, cb);
}

std::vector<int> selected_rows(const Matrix& u) {
  std::vector<int> rows;
  const double threshold = 0.1 / static_cast<double>(u.rows());
  for (Eigen::Index j = 0; j < u.rows(); ++j)
    if (u.row(j).maxCoeff() > threshold) rows.push_back(static_cast<int>(j));
  return rows;
}

LambdaMax lambda_max(const ModelInstance& instance, const SolverParams& params) {
  instance.validate();
  params.validate();

  // Collapse identical dictionary words: they are interchangeable, and a
  // symmetric solver state would otherwise split mass between them forever.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < instance.dissimilarity.rows(); ++j) {
    bool duplicate = false;
    for (auto k : keep)
      if (instance.dissimilarity.row(j) == instance.dissimilarity.row(k)) duplicate = true;
    if (!duplicate) keep.push_back(j);
  }
  ModelInstance probe_instance = instance;
  probe_instance.dissimilarity.resize(static_cast<Eigen::Index>(keep.size()), instance.nodes());
  for (std::size_t r = 0; r < keep.size(); ++r)
    probe_instance.dissimilarity.row(static_cast<Eigen::Index>(r)) = instance.dissimilarity.row(keep[r]);

  const Matrix scaled = instance.dissimilarity * instance.weights.asDiagonal();
  double start = 0.0;
  for (Eigen::Index i = 0; i < scaled.cols(); ++i)
    start = std::max(start, scaled.col(i).maxCoeff() - scaled.col(i).minCoeff());
  if (!(start > 0.0)) start = 1e-12;

  LambdaMax result;
  if (probe_instance.words() == 1) {
    result.value = start;
    return result;
  }

  SolverParams loose = params;
  loose.tol = params.tol * 10.0;
  const AdmmSolver probe_solver(probe_instance, loose);
  Matrix last;
  // Loose probes start from the last multi-word state. Starting from a
  // single-word state would make them accept lambdas that are too small.
  SolverState warm = SolverState::initial(probe_instance.words(), probe_instance.nodes());
  bool use_warm = true;
  auto probe = [&](const AdmmSolver& solver, double lambda) {
    SolverState state = use_warm ? warm : SolverState::initial(probe_instance.words(), probe_instance.nodes());
    const Solution sol = solver.run(lambda, state);
    result.converged = result.converged && sol.converged;
    last = sol.u_star;
    const bool single = selected_rows(sol.u_star).size() == 1;
    if (!single) warm = std::move(state);
    return single;
  };
  auto single_word = [&](double lambda) { return probe(probe_solver, lambda); };

  constexpr int kMaxScaling = 60;
  constexpr double kSaturation = 1e-6;
  double lo = start, hi = start;
  if (single_word(start)) {
    lo = start / 2.0;
    int steps = 0;
    Matrix previous = last;
    while (single_word(lo) && steps++ < kMaxScaling) {
      // A single word at every level: lambda no longer matters.
      if ((last - previous).cwiseAbs().maxCoeff() < kSaturation) break;
      previous = last;
      hi = lo;
      lo /= 2.0;
    }
  } else {
    // With G = R diag(p) and k the row of least total cost, U = e_k 1^T has a
    // zero smoothness gradient and is optimal for lambda >= sum_i (G_ki - min_j G_ji).
    const Matrix g = probe_instance.dissimilarity * probe_instance.weights.asDiagonal();
    Eigen::Index k = 0;
    g.rowwise().sum().minCoeff(&k);
    const double bound = (g.row(k) - g.colwise().minCoeff()).sum();
    hi = start * 2.0;
    int steps = 0;
    while (hi < bound && !single_word(hi)) {
      lo = hi;
      hi *= 2.0;
      if (++steps >= kMaxScaling) {
        result.value = lo;
        result.bracketed = false;
        return result;
      }
    }
    hi = std::min(hi, std::max(bound, lo));
  }
  for (int step = 0; step < 12; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (single_word(mid))
      hi = mid;
    else
      lo = mid;
  }
  // Probes are loose; confirm at full tolerance, nudging up by at most 5%.
  use_warm = false;
  const AdmmSolver full_solver(probe_instance, params);
  for (int bump = 0; bump < 5 && !probe(full_solver, hi); ++bump) hi *= 1.01;
  result.value = hi;
  return result;
}

}  // namespace spsg
