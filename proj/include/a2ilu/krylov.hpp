#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "a2ilu/types.hpp"

namespace a2ilu {

enum class KrylovMethod { Cg, Bicgstab };

enum class ConvergenceClass { Convergent, PseudoConvergent, NotConvergent };

inline const char* to_string(ConvergenceClass c) {
  switch (c) {
    case ConvergenceClass::Convergent: return "convergent";
    case ConvergenceClass::PseudoConvergent: return "pseudo_convergent";
    case ConvergenceClass::NotConvergent: return "not_convergent";
  }
  return "unknown";
}

struct SolverConfig {
  KrylovMethod method = KrylovMethod::Cg;
  /// threshold on the squared relative recursive residual ||r||^2 / ||b||^2
  double epsilon = 1e-9;
  /// 0 means "matrix dimension"
  Index max_iters = 0;
  /// how often the true residual s = b - A x is recomputed
  Index true_residual_stride = 10;
};

template <typename Scalar>
struct SolveStats {
  struct Checkpoint {
    Index iteration = 0;
    Scalar true_residual_sq_rel = Scalar(0);
    Scalar recursive_residual_sq_rel = Scalar(0);
  };

  Index iterations = 0;
  std::vector<Scalar> recursive_residual_history;  // ||r_k||^2 / ||b||^2, k = 0..iterations
  std::vector<Checkpoint> true_residual_checkpoints;
  ConvergenceClass convergence = ConvergenceClass::NotConvergent;
  bool recursive_criterion_met = false;
  bool hit_iteration_cap = false;
  bool breakdown = false;
  std::string breakdown_reason;

  double wall_time_s = 0;
  // filled by the harness, not the solver
  double preconditioner_setup_s = 0;
  double acceleration_s = 0;
};

template <typename Scalar>
using ApplyFn = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

/// Trichotomy of Section "robustness" protocols: convergent when the
/// recursive criterion is met and the final true residual confirms it
/// (||s||^2 / ||r||^2 <= 2); pseudo-convergent when the recursive residual
/// keeps decreasing (or has met the criterion) while the true residual has
/// stagnated above the threshold over the last three checkpoints.
template <typename Scalar>
ConvergenceClass classify_convergence(const SolveStats<Scalar>& stats, const SolverConfig& cfg) {
  if (stats.breakdown) return ConvergenceClass::NotConvergent;
  if (stats.true_residual_checkpoints.empty()) return ConvergenceClass::NotConvergent;
  const auto& final_cp = stats.true_residual_checkpoints.back();

  if (stats.recursive_criterion_met &&
      final_cp.true_residual_sq_rel <= Scalar(2) * final_cp.recursive_residual_sq_rel) {
    return ConvergenceClass::Convergent;
  }

  const auto& cps = stats.true_residual_checkpoints;
  bool recursive_ok = stats.recursive_criterion_met;
  if (!recursive_ok && stats.hit_iteration_cap && cps.size() >= 3) {
    const auto& a = cps[cps.size() - 3];
    const auto& b = cps[cps.size() - 2];
    const auto& c = cps[cps.size() - 1];
    recursive_ok = a.recursive_residual_sq_rel > b.recursive_residual_sq_rel &&
                   b.recursive_residual_sq_rel > c.recursive_residual_sq_rel;
  }
  if (recursive_ok && cps.size() >= 3) {
    const Scalar t1 = cps[cps.size() - 3].true_residual_sq_rel;
    const Scalar t2 = cps[cps.size() - 2].true_residual_sq_rel;
    const Scalar t3 = cps[cps.size() - 1].true_residual_sq_rel;
    const bool stagnant = t1 > Scalar(0) && t2 > Scalar(0) &&
                          std::abs(t2 - t1) < Scalar(1e-3) * t1 &&
                          std::abs(t3 - t2) < Scalar(1e-3) * t2;
    const bool above_threshold = t3 > Scalar(cfg.epsilon);
    if (stagnant && above_threshold) return ConvergenceClass::PseudoConvergent;
  }
  return ConvergenceClass::NotConvergent;
}

namespace detail {

template <typename Scalar>
struct ResidualTracker {
  const SparseMatrix<Scalar>& A;
  const Vector<Scalar>& b;
  Scalar b_norm2;
  SolveStats<Scalar>& stats;

  void checkpoint(Index iteration, const Vector<Scalar>& x, Scalar recursive_sq_rel) {
    const Scalar true_sq = (b - A * x).squaredNorm();
    stats.true_residual_checkpoints.push_back(
        {iteration, true_sq / b_norm2, recursive_sq_rel});
  }
};

}  // namespace detail

/// Preconditioned conjugate gradients with the recursive residual
/// r_{k+1} = r_k - alpha_k A p_k and the squared-norm stopping rule
/// ||r||^2 / ||b||^2 <= epsilon. The caller asserts symmetry of A. When
/// scaling was applied upstream, x is in scaled variables; the caller
/// unscales.
template <typename Scalar>
std::pair<Vector<Scalar>, SolveStats<Scalar>> cg_solve(const SparseMatrix<Scalar>& A,
                                                       const ApplyFn<Scalar>& preconditioner,
                                                       const Vector<Scalar>& b,
                                                       const Vector<Scalar>& x0,
                                                       const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const Index n = static_cast<Index>(A.rows());
  if (b.size() != n || x0.size() != n) throw std::invalid_argument("cg_solve: dimension mismatch");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("cg_solve: epsilon must be positive");
  const Index max_iters = cfg.max_iters > 0 ? cfg.max_iters : n;
  const Index stride = cfg.true_residual_stride > 0 ? cfg.true_residual_stride : Index(10);

  SolveStats<Scalar> stats;
  Vector<Scalar> x = x0;
  const Scalar b_norm2 = b.squaredNorm();
  if (b_norm2 == Scalar(0)) {
    x.setZero();
    stats.recursive_residual_history.push_back(Scalar(0));
    stats.true_residual_checkpoints.push_back({0, Scalar(0), Scalar(0)});
    stats.recursive_criterion_met = true;
    stats.convergence = ConvergenceClass::Convergent;
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(stats)};
  }
  detail::ResidualTracker<Scalar> tracker{A, b, b_norm2, stats};

  auto apply_m = [&](const Vector<Scalar>& r) {
    return preconditioner ? preconditioner(r) : r;
  };

  Vector<Scalar> r = b - A * x;
  Scalar rel = r.squaredNorm() / b_norm2;
  stats.recursive_residual_history.push_back(rel);
  if (rel <= Scalar(cfg.epsilon)) {
    stats.recursive_criterion_met = true;
    tracker.checkpoint(0, x, rel);
    stats.convergence = classify_convergence(stats, cfg);
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(stats)};
  }

  Vector<Scalar> z = apply_m(r);
  Vector<Scalar> p = z;
  Scalar rz = r.dot(z);
  Vector<Scalar> Ap(n);

  for (Index k = 1; k <= max_iters; ++k) {
    Ap.noalias() = A * p;
    const Scalar pAp = p.dot(Ap);
    if (!(pAp > Scalar(0))) {
      stats.breakdown = true;
      stats.breakdown_reason =
          "p^T A p <= 0 at iteration " + std::to_string(k) + " (operator not SPD)";
      tracker.checkpoint(stats.iterations, x, rel);
      break;
    }
    const Scalar alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    rel = r.squaredNorm() / b_norm2;
    stats.recursive_residual_history.push_back(rel);
    stats.iterations = k;

    const bool met = rel <= Scalar(cfg.epsilon);
    if (met || k % stride == 0 || k == max_iters) {
      tracker.checkpoint(k, x, rel);
    }
    if (met) {
      stats.recursive_criterion_met = true;
      break;
    }
    if (k == max_iters) {
      stats.hit_iteration_cap = true;
      break;
    }

    z = apply_m(r);
    const Scalar rz_new = r.dot(z);
    const Scalar beta = rz_new / rz;
    rz = rz_new;
    p = z + beta * p;
  }

  stats.convergence = classify_convergence(stats, cfg);
  stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(x), std::move(stats)};
}

/// Preconditioned BiCGSTAB with the same stopping rule as cg_solve.
template <typename Scalar>
std::pair<Vector<Scalar>, SolveStats<Scalar>> bicgstab_solve(const SparseMatrix<Scalar>& A,
                                                             const ApplyFn<Scalar>& preconditioner,
                                                             const Vector<Scalar>& b,
                                                             const Vector<Scalar>& x0,
                                                             const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const Index n = static_cast<Index>(A.rows());
  if (b.size() != n || x0.size() != n) {
    throw std::invalid_argument("bicgstab_solve: dimension mismatch");
  }
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("bicgstab_solve: epsilon must be positive");
  const Index max_iters = cfg.max_iters > 0 ? cfg.max_iters : n;
  const Index stride = cfg.true_residual_stride > 0 ? cfg.true_residual_stride : Index(10);

  SolveStats<Scalar> stats;
  Vector<Scalar> x = x0;
  const Scalar b_norm2 = b.squaredNorm();
  if (b_norm2 == Scalar(0)) {
    x.setZero();
    stats.recursive_residual_history.push_back(Scalar(0));
    stats.true_residual_checkpoints.push_back({0, Scalar(0), Scalar(0)});
    stats.recursive_criterion_met = true;
    stats.convergence = ConvergenceClass::Convergent;
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(stats)};
  }
  detail::ResidualTracker<Scalar> tracker{A, b, b_norm2, stats};

  auto apply_m = [&](const Vector<Scalar>& r) {
    return preconditioner ? preconditioner(r) : r;
  };

  Vector<Scalar> r = b - A * x;
  Scalar rel = r.squaredNorm() / b_norm2;
  stats.recursive_residual_history.push_back(rel);
  if (rel <= Scalar(cfg.epsilon)) {
    stats.recursive_criterion_met = true;
    tracker.checkpoint(0, x, rel);
    stats.convergence = classify_convergence(stats, cfg);
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(stats)};
  }

  const Vector<Scalar> r_shadow = r;
  Vector<Scalar> p = Vector<Scalar>::Zero(n);
  Vector<Scalar> v = Vector<Scalar>::Zero(n);
  Scalar rho = Scalar(1), alpha = Scalar(1), omega = Scalar(1);

  auto fail = [&](Index k, const std::string& reason) {
    stats.breakdown = true;
    stats.breakdown_reason = reason + " at iteration " + std::to_string(k);
    tracker.checkpoint(stats.iterations, x, rel);
  };

  for (Index k = 1; k <= max_iters; ++k) {
    const Scalar rho_new = r_shadow.dot(r);
    if (rho_new == Scalar(0)) {
      fail(k, "rho = 0");
      break;
    }
    if (k == 1) {
      p = r;
    } else {
      const Scalar beta = (rho_new / rho) * (alpha / omega);
      p = r + beta * (p - omega * v);
    }
    rho = rho_new;

    const Vector<Scalar> p_hat = apply_m(p);
    v.noalias() = A * p_hat;
    const Scalar rsv = r_shadow.dot(v);
    if (rsv == Scalar(0)) {
      fail(k, "r_shadow . v = 0");
      break;
    }
    alpha = rho / rsv;

    const Vector<Scalar> s = r - alpha * v;
    const Scalar s_rel = s.squaredNorm() / b_norm2;
    if (s_rel <= Scalar(cfg.epsilon)) {
      x += alpha * p_hat;
      r = s;
      rel = s_rel;
      stats.recursive_residual_history.push_back(rel);
      stats.iterations = k;
      stats.recursive_criterion_met = true;
      tracker.checkpoint(k, x, rel);
      break;
    }

    const Vector<Scalar> s_hat = apply_m(s);
    const Vector<Scalar> t = A * s_hat;
    const Scalar tt = t.squaredNorm();
    if (tt == Scalar(0)) {
      fail(k, "t = 0");
      break;
    }
    omega = t.dot(s) / tt;
    if (omega == Scalar(0)) {
      fail(k, "omega = 0");
      break;
    }

    x += alpha * p_hat + omega * s_hat;
    r = s - omega * t;
    rel = r.squaredNorm() / b_norm2;
    stats.recursive_residual_history.push_back(rel);
    stats.iterations = k;

    const bool met = rel <= Scalar(cfg.epsilon);
    if (met || k % stride == 0 || k == max_iters) {
      tracker.checkpoint(k, x, rel);
    }
    if (met) {
      stats.recursive_criterion_met = true;
      break;
    }
    if (k == max_iters) {
      stats.hit_iteration_cap = true;
      break;
    }
  }

  stats.convergence = classify_convergence(stats, cfg);
  stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(x), std::move(stats)};
}

}  // namespace a2ilu
