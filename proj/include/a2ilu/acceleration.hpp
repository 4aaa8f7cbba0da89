#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "a2ilu/factorization.hpp"
#include "a2ilu/sparse_kernels.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu {

/// Scalars rescaling the incomplete factors:
/// M = (phi L + gamma D)(gamma D)^{-1}(gamma D + phi U).
template <typename Scalar>
struct AccelerationParams {
  Scalar phi = Scalar(1);
  Scalar gamma = Scalar(1);
};

/// Per-row reductions from which the objective f(R) = ||(A - M(phi,gamma)) e||^2
/// and its derivatives are evaluated in O(n):
///   v_i(phi,gamma) = s_i - phi c_i - gamma d_i - phi^2 gamma^{-1} t_i,
///   f = sum_i v_i^2.
template <typename Scalar>
struct ObjectiveData {
  Vector<Scalar> a_row_sums;        // s: row sums of A
  Vector<Scalar> factor_row_sums;   // c: row sums of L plus row sums of U
  Vector<Scalar> diag;              // d: diagonal of the factorization
  Vector<Scalar> product_row_sums;  // t: row sums of L D^{-1} U

  Index rows() const { return static_cast<Index>(diag.size()); }
};

/// O(nnz) assembly. The triple-product row sums collapse to two sparse
/// matvecs and a diagonal scale: t = L (D^{-1} (U e)). Works for any factor
/// pattern, not just ILU(0).
template <typename Scalar>
ObjectiveData<Scalar> build_objective(const SparseMatrix<Scalar>& A,
                                      const FactorTriple<Scalar>& F) {
  ObjectiveData<Scalar> obj;
  const Vector<Scalar> ones = Vector<Scalar>::Ones(A.cols());
  obj.a_row_sums = A * ones;
  const Vector<Scalar> upper_sums = F.upper * ones;
  obj.factor_row_sums = F.lower * ones + upper_sums;
  obj.diag = F.diag;
  obj.product_row_sums = F.lower * (upper_sums.array() / F.diag.array()).matrix();
  for (Index i = 0; i < obj.rows(); ++i) {
    if (!std::isfinite(obj.a_row_sums(i)) || !std::isfinite(obj.factor_row_sums(i)) ||
        !std::isfinite(obj.diag(i)) || !std::isfinite(obj.product_row_sums(i))) {
      throw NumericError(i, "build_objective: nonfinite row sum in row " + std::to_string(i));
    }
  }
  return obj;
}

template <typename Scalar>
Scalar objective(const ObjectiveData<Scalar>& obj, const AccelerationParams<Scalar>& p) {
  if (p.gamma == Scalar(0)) {
    throw std::invalid_argument("objective: gamma = 0 is a pole of f");
  }
  const Scalar phi2_inv_gamma = p.phi * p.phi / p.gamma;
  const Scalar* s = obj.a_row_sums.data();
  const Scalar* c = obj.factor_row_sums.data();
  const Scalar* d = obj.diag.data();
  const Scalar* t = obj.product_row_sums.data();
  const Index n = obj.rows();
  Scalar f = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar v = s[i] - p.phi * c[i] - p.gamma * d[i] - phi2_inv_gamma * t[i];
    f += v * v;
  }
  return f;
}

template <typename Scalar>
struct GradientHessian {
  Scalar f = Scalar(0);
  Eigen::Matrix<Scalar, 2, 1> gradient;
  Eigen::Matrix<Scalar, 2, 2> hessian;
};

/// Analytic partials of f in (phi, gamma), assembled by the chain rule on
/// f = sum v_i^2. One fused pass over the four row-sum arrays.
template <typename Scalar>
GradientHessian<Scalar> gradient_hessian(const ObjectiveData<Scalar>& obj,
                                         const AccelerationParams<Scalar>& p) {
  if (p.gamma == Scalar(0)) {
    throw std::invalid_argument("gradient_hessian: gamma = 0 is a pole of f");
  }
  const Scalar phi = p.phi, gamma = p.gamma;
  const Scalar phi2_inv_gamma = phi * phi / gamma;
  const Scalar two_phi_inv_gamma = Scalar(2) * phi / gamma;
  const Scalar phi2_inv_gamma2 = phi * phi / (gamma * gamma);

  const Scalar* s = obj.a_row_sums.data();
  const Scalar* c = obj.factor_row_sums.data();
  const Scalar* d = obj.diag.data();
  const Scalar* t = obj.product_row_sums.data();
  const Index n = obj.rows();

  Scalar f = 0, vv_phi = 0, vv_gamma = 0, pp = 0, pg = 0, gg = 0, vt = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar v = s[i] - phi * c[i] - gamma * d[i] - phi2_inv_gamma * t[i];
    const Scalar v_phi = -c[i] - two_phi_inv_gamma * t[i];
    const Scalar v_gamma = -d[i] + phi2_inv_gamma2 * t[i];
    f += v * v;
    vv_phi += v * v_phi;
    vv_gamma += v * v_gamma;
    pp += v_phi * v_phi;
    pg += v_phi * v_gamma;
    gg += v_gamma * v_gamma;
    vt += v * t[i];
  }

  GradientHessian<Scalar> out;
  out.f = f;
  out.gradient(0) = Scalar(2) * vv_phi;
  out.gradient(1) = Scalar(2) * vv_gamma;
  out.hessian(0, 0) = Scalar(2) * (pp - (Scalar(2) / gamma) * vt);
  out.hessian(0, 1) = Scalar(2) * (pg + (Scalar(2) * phi / (gamma * gamma)) * vt);
  out.hessian(1, 0) = out.hessian(0, 1);
  out.hessian(1, 1) =
      Scalar(2) * (gg - (Scalar(2) * phi * phi / (gamma * gamma * gamma)) * vt);
  return out;
}

template <typename Scalar>
struct OptimizeOptions {
  Scalar step_tolerance = Scalar(1e-10);
  int max_iterations = 100;
  /// gamma / phi <= 1 enforced by projection on exit; disable to experiment.
  bool enforce_ratio_constraint = true;
  AccelerationParams<Scalar> start{Scalar(1), Scalar(1)};
};

template <typename Scalar>
struct OptimizeReport {
  AccelerationParams<Scalar> params;
  Scalar initial_objective = Scalar(0);
  Scalar final_objective = Scalar(0);
  int iterations = 0;
  bool projected = false;       // gamma := phi applied on exit
  bool no_improvement = false;  // result falls back to the start parameters
  int gradient_fallback_steps = 0;
};

/// Newton-Raphson on f from (1,1), safeguarded so the result never has a
/// larger objective than the start:
///  - indefinite/singular Hessian (det <= 0 or trace <= 0) falls back to a
///    backtracking gradient step,
///  - Newton steps that would carry gamma across zero are halved until gamma
///    keeps its starting sign,
///  - the best iterate seen is returned; on exit gamma/phi > 1 is projected
///    to gamma = phi, and the start parameters are restored whenever nothing
///    beat them (reported via the no-improvement flag).
template <typename Scalar>
OptimizeReport<Scalar> optimize(const ObjectiveData<Scalar>& obj,
                                const OptimizeOptions<Scalar>& opts = {}) {
  OptimizeReport<Scalar> report;
  AccelerationParams<Scalar> cur = opts.start;
  const bool gamma_positive = cur.gamma > Scalar(0);
  auto gamma_ok = [&](Scalar g) { return gamma_positive ? g > Scalar(0) : g < Scalar(0); };

  AccelerationParams<Scalar> best = cur;
  Scalar f_best = std::numeric_limits<Scalar>::infinity();
  Scalar f_init = std::numeric_limits<Scalar>::quiet_NaN();

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const auto gh = gradient_hessian(obj, cur);
    if (iter == 0) f_init = gh.f;
    if (std::isfinite(gh.f) && gh.f < f_best) {
      f_best = gh.f;
      best = cur;
    }

    const Scalar det = gh.hessian(0, 0) * gh.hessian(1, 1) - gh.hessian(0, 1) * gh.hessian(1, 0);
    const Scalar trace = gh.hessian(0, 0) + gh.hessian(1, 1);

    Eigen::Matrix<Scalar, 2, 1> step;
    bool need_backtracking = false;
    if (det > Scalar(0) && trace > Scalar(0)) {
      step(0) = -(gh.hessian(1, 1) * gh.gradient(0) - gh.hessian(0, 1) * gh.gradient(1)) / det;
      step(1) = -(gh.hessian(0, 0) * gh.gradient(1) - gh.hessian(1, 0) * gh.gradient(0)) / det;
    } else {
      ++report.gradient_fallback_steps;
      step = -gh.gradient;
      need_backtracking = true;
    }
    if (!std::isfinite(step(0)) || !std::isfinite(step(1))) break;
    if (step(0) == Scalar(0) && step(1) == Scalar(0)) break;

    // keep gamma on the starting side of its pole
    Scalar scale = Scalar(1);
    int halvings = 0;
    while (halvings < 80 && !gamma_ok(cur.gamma + scale * step(1))) {
      scale *= Scalar(0.5);
      ++halvings;
    }
    if (halvings == 80) break;

    if (need_backtracking) {
      bool accepted = false;
      for (int h = 0; h < 60; ++h) {
        const AccelerationParams<Scalar> cand{cur.phi + scale * step(0),
                                              cur.gamma + scale * step(1)};
        if (gamma_ok(cand.gamma)) {
          const Scalar f_new = objective(obj, cand);
          if (std::isfinite(f_new) && f_new < gh.f) {
            cur = cand;
            accepted = true;
            break;
          }
        }
        scale *= Scalar(0.5);
      }
      if (!accepted) break;
      ++report.iterations;
      continue;
    }

    if (std::max(std::abs(scale * step(0)), std::abs(scale * step(1))) <= opts.step_tolerance) {
      break;
    }
    cur.phi += scale * step(0);
    cur.gamma += scale * step(1);
    ++report.iterations;
  }

  {
    const Scalar f_last = objective(obj, cur);
    if (std::isfinite(f_last) && f_last < f_best) {
      f_best = f_last;
      best = cur;
    }
  }
  if (std::isnan(f_init)) f_init = objective(obj, opts.start);

  report.initial_objective = f_init;
  report.params = best;
  report.final_objective = f_best;

  if (opts.enforce_ratio_constraint && report.params.gamma / report.params.phi > Scalar(1)) {
    report.params.gamma = report.params.phi;
    report.final_objective = objective(obj, report.params);
    report.projected = true;
  }
  if (!(report.final_objective < report.initial_objective)) {
    report.params = opts.start;
    report.final_objective = report.initial_objective;
    report.no_improvement = true;
    report.projected = false;
  }
  return report;
}

/// Applies M^{-1} with M = (phi L + gamma D)(gamma D)^{-1}(gamma D + phi U):
/// forward-solve (phi L + gamma D) w = r, then backward-solve
/// (gamma D + phi U) z = gamma D w. The scaled factors are materialized once.
template <typename Scalar>
class Preconditioner {
public:
  Preconditioner(const FactorTriple<Scalar>& factors, AccelerationParams<Scalar> params)
      : scaled_lower_(params.phi * factors.lower),
        scaled_upper_(params.phi * factors.upper),
        scaled_diag_(params.gamma * factors.diag),
        params_(params) {
    if (params.phi == Scalar(0) || params.gamma == Scalar(0)) {
      throw std::invalid_argument("Preconditioner: phi and gamma must be nonzero");
    }
    if (!std::isfinite(params.phi) || !std::isfinite(params.gamma)) {
      throw std::invalid_argument("Preconditioner: phi and gamma must be finite");
    }
  }

  Vector<Scalar> apply(const Vector<Scalar>& r) const {
    const Vector<Scalar> w = lower_solve(scaled_lower_, scaled_diag_, r);
    return upper_solve(scaled_upper_, scaled_diag_,
                       (scaled_diag_.array() * w.array()).matrix());
  }

  const AccelerationParams<Scalar>& params() const { return params_; }

private:
  SparseMatrix<Scalar> scaled_lower_;
  SparseMatrix<Scalar> scaled_upper_;
  Vector<Scalar> scaled_diag_;
  AccelerationParams<Scalar> params_;
};

template <typename Scalar>
Preconditioner<Scalar> make_preconditioner(const FactorTriple<Scalar>& factors,
                                           AccelerationParams<Scalar> params) {
  return Preconditioner<Scalar>(factors, params);
}

}  // namespace a2ilu
