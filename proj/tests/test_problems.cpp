#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Cholesky>

#include "a2ilu/acceleration.hpp"
#include "a2ilu/factorization.hpp"
#include "a2ilu/krylov.hpp"
#include "a2ilu/problems.hpp"
#include "a2ilu/sparse_kernels.hpp"
#include "oracles.hpp"

using namespace a2ilu;
using oracles::Matrix;

namespace {

/// hand-built 8x8 stencil matrix for m = 2, kappa = 1
Matrix poisson_m2_oracle() {
  const double h = 1.0 / 3.0;
  Matrix A = Matrix::Zero(8, 8);
  auto idx = [](Index i, Index j, Index k) { return i + 2 * j + 4 * k; };
  for (Index k = 0; k < 2; ++k) {
    for (Index j = 0; j < 2; ++j) {
      for (Index i = 0; i < 2; ++i) {
        const Index row = idx(i, j, k);
        A(row, row) = 6.0 * h;
        A(row, idx(1 - i, j, k)) = -h;
        A(row, idx(i, 1 - j, k)) = -h;
        A(row, idx(i, j, 1 - k)) = -h;
      }
    }
  }
  return A;
}

Index count_interior_rows_with_nnz(const SparseMatrix<double>& A, Index m, Index want) {
  Index count = 0;
  for (Index k = 2; k < m; ++k) {
    for (Index j = 2; j < m; ++j) {
      for (Index i = 2; i < m; ++i) {
        const Index row = (i - 1) + (j - 1) * m + (k - 1) * m * m;
        const Index nnz = A.outerIndexPtr()[row + 1] - A.outerIndexPtr()[row];
        count += nnz == want ? 1 : 0;
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("gen_poisson_jump: m = 2, kappa = 1 matches the hand-built stencil") {
  const auto problem = gen_poisson_jump<double>(2, 1.0);
  const Matrix want = poisson_m2_oracle();
  CHECK((oracles::dense(problem.matrix) - want).cwiseAbs().maxCoeff() <= 1e-15);

  // rhs = f * h^3 sampled at the lattice points
  const double h = 1.0 / 3.0;
  CHECK(problem.rhs(0) == doctest::Approx(3 * h * h * h * h));           // (h,h,h)
  CHECK(problem.rhs(7) == doctest::Approx((6 * h) * h * h * h));         // (2h,2h,2h)
}

TEST_CASE("gen_poisson_jump: m = 10 is symmetric positive definite") {
  const auto problem = gen_poisson_jump<double>(10);
  CHECK(is_numerically_symmetric(problem.matrix));
  const Matrix Ad = oracles::dense(problem.matrix);
  Eigen::LLT<Matrix> llt(Ad);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("gen_poisson_jump: interior rows have exactly 7 nonzeros") {
  const Index m = 6;
  const auto problem = gen_poisson_jump<double>(m);
  const Index interior = (m - 2) * (m - 2) * (m - 2);
  CHECK(count_interior_rows_with_nnz(problem.matrix, m, 7) == interior);
  // boundary-adjacent rows have fewer
  const Index corner_nnz = problem.matrix.outerIndexPtr()[1] - problem.matrix.outerIndexPtr()[0];
  CHECK(corner_nnz == 4);
}

TEST_CASE("gen_poisson_jump: row sums nonnegative, zero strictly inside") {
  const Index m = 6;
  const auto problem = gen_poisson_jump<double>(m);
  const Vector<double> row_sums = build_rhs_ones(problem.matrix);
  double max_abs = 0;
  for (Index k = 0; k < problem.matrix.nonZeros(); ++k) {
    max_abs = std::max(max_abs, std::abs(problem.matrix.valuePtr()[k]));
  }
  const double tol = 1e-13 * max_abs;  // cancellation roundoff at kappa = 1e3 scale
  CHECK(row_sums.minCoeff() >= -tol);
  for (Index k = 2; k < m; ++k) {
    for (Index j = 2; j < m; ++j) {
      for (Index i = 2; i < m; ++i) {
        const Index row = (i - 1) + (j - 1) * m + (k - 1) * m * m;
        CHECK(std::abs(row_sums(row)) <= tol);
      }
    }
  }
}

TEST_CASE("gen_helmholtz: shift = 0 equals the kappa = 1 Poisson matrix") {
  const auto helm = gen_helmholtz<double>(5, 0.0);
  const auto pois = gen_poisson_jump<double>(5, 1.0);
  CHECK(oracles::dense(helm.matrix) == oracles::dense(pois.matrix));
  CHECK(helm.rhs == build_rhs_ones(pois.matrix));
}

TEST_CASE("gen_helmholtz: matrix equals Laplacian minus the volume-scaled shift") {
  const Index m = 10;
  const double shift = 1.0;
  const auto helm = gen_helmholtz<double>(m, shift);
  const auto lap = gen_poisson_jump<double>(m, 1.0);
  const double h = 1.0 / (m + 1);
  Matrix diff = oracles::dense(lap.matrix) - oracles::dense(helm.matrix);
  const Matrix want = (shift * h * h * h) * Matrix::Identity(m * m * m, m * m * m);
  CHECK((diff - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("gen_helmholtz: positive definite for admissible shifts") {
  const auto helm = gen_helmholtz<double>(8, 20.0);
  Eigen::LLT<Matrix> llt(oracles::dense(helm.matrix));
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("gen_advection_diffusion: velocity = 0 equals the Poisson generator output") {
  const auto adv = gen_advection_diffusion<double>(5, {0.0, 0.0, 0.0});
  const auto pois = gen_poisson_jump<double>(5, 1.0);
  CHECK(oracles::dense(adv.matrix) == oracles::dense(pois.matrix));
  CHECK(adv.rhs == pois.rhs);
}

TEST_CASE("gen_advection_diffusion: interior advection row sums vanish") {
  const Index m = 8;
  const auto adv = gen_advection_diffusion<double>(m, {1.0, 0.0, 0.0});
  const auto pois = gen_poisson_jump<double>(m, 1.0);
  const Matrix advection_part = oracles::dense(adv.matrix) - oracles::dense(pois.matrix);
  const Eigen::VectorXd row_sums = advection_part * Eigen::VectorXd::Ones(m * m * m);
  for (Index k = 1; k <= m; ++k) {
    for (Index j = 1; j <= m; ++j) {
      for (Index i = 2; i <= m; ++i) {  // rows whose upwind x-neighbor is interior
        const Index row = (i - 1) + (j - 1) * m + (k - 1) * m * m;
        CHECK(std::abs(row_sums(row)) <= 1e-15);
      }
    }
  }
  CHECK_FALSE(is_numerically_symmetric(adv.matrix));
}

TEST_CASE("gen_advection_diffusion: negative velocity upwinds from the other side") {
  const Index m = 4;
  const auto adv = gen_advection_diffusion<double>(m, {-2.0, 0.0, 0.0});
  const auto pois = gen_poisson_jump<double>(m, 1.0);
  const Matrix part = oracles::dense(adv.matrix) - oracles::dense(pois.matrix);
  const double h = 1.0 / (m + 1);
  const double flux = 2.0 * h * h;
  // row 0: diagonal picks up the outflow, +x neighbor carries the inflow
  CHECK(part(0, 0) == doctest::Approx(flux));
  CHECK(part(0, 1) == doctest::Approx(-flux));
  CHECK(part(0, 2) == 0.0);
}

TEST_CASE("generators: lexicographic indexing pinned") {
  const Index m = 3;
  const auto problem = gen_poisson_jump<double>(m, 1.0);
  // point (2h, h, h) has index 1: neighbors at 0 and 2 in x
  const Matrix Ad = oracles::dense(problem.matrix);
  CHECK(Ad(1, 0) != 0.0);
  CHECK(Ad(1, 2) != 0.0);
  CHECK(Ad(1, 1 + m) != 0.0);      // +y neighbor
  CHECK(Ad(1, 1 + m * m) != 0.0);  // +z neighbor
}

TEST_CASE("generators: invalid sizes rejected") {
  CHECK_THROWS_AS(gen_poisson_jump<double>(1), std::invalid_argument);
  CHECK_THROWS_AS(gen_poisson_jump<double>(600), ResourceError);
}

TEST_CASE("helmholtz: A2ILU(0) beats ILU(0) on iteration count at m = 16") {
  const auto problem = gen_helmholtz<double>(16, 1.0);
  auto [A, rec] = diagonal_scale(problem.matrix);
  const Vector<double> b = rec.scale_rhs(problem.rhs);
  const auto F = ilu0<double>(A);

  SolverConfig cfg;
  cfg.epsilon = 1e-9;
  cfg.max_iters = 160;

  const auto plain = make_preconditioner(F, {1.0, 1.0});
  ApplyFn<double> plain_apply = [&](const Vector<double>& r) { return plain.apply(r); };
  auto [x1, s1] = cg_solve<double>(A, plain_apply, b, Vector<double>::Zero(A.rows()), cfg);

  const auto obj = build_objective(A, F);
  const auto report = optimize(obj);
  const auto accel = make_preconditioner(F, report.params);
  ApplyFn<double> accel_apply = [&](const Vector<double>& r) { return accel.apply(r); };
  auto [x2, s2] = cg_solve<double>(A, accel_apply, b, Vector<double>::Zero(A.rows()), cfg);

  CHECK(s1.convergence == ConvergenceClass::Convergent);
  CHECK(s2.convergence == ConvergenceClass::Convergent);
  CHECK(s2.iterations < s1.iterations);
}

TEST_CASE("advection-diffusion: BiCGSTAB with accelerated level and Crout factors converges") {
  const auto problem = gen_advection_diffusion<double>(12, {1.0, 0.5, 0.0});
  auto [A, rec] = diagonal_scale(problem.matrix);
  const Vector<double> b = rec.scale_rhs(problem.rhs);

  SolverConfig cfg;
  cfg.method = KrylovMethod::Bicgstab;
  cfg.epsilon = 1e-18;
  cfg.max_iters = 240;

  const FactorTriple<double> factors[] = {level_ilu<double>(A, 1),
                                          crout_ilu<double>(A, 0.01, 5.0)};
  for (const auto& F : factors) {
    const auto report = optimize(build_objective(A, F));
    const auto precond = make_preconditioner(F, report.params);
    ApplyFn<double> apply = [&](const Vector<double>& r) { return precond.apply(r); };
    auto [x, stats] = bicgstab_solve<double>(A, apply, b, Vector<double>::Zero(A.rows()), cfg);
    CHECK(stats.convergence == ConvergenceClass::Convergent);
    CHECK(report.final_objective <= report.initial_objective);
  }
}

TEST_CASE("advection-diffusion: BiCGSTAB with A2ILU(0) takes fewer iterations at m = 32") {
  const auto problem = gen_advection_diffusion<double>(32, {1.0, 0.0, 0.0});
  auto [A, rec] = diagonal_scale(problem.matrix);
  const Vector<double> b = rec.scale_rhs(problem.rhs);
  const auto F = ilu0<double>(A);

  SolverConfig cfg;
  cfg.method = KrylovMethod::Bicgstab;
  cfg.epsilon = 1e-9;
  cfg.max_iters = 320;

  const auto plain = make_preconditioner(F, {1.0, 1.0});
  ApplyFn<double> plain_apply = [&](const Vector<double>& r) { return plain.apply(r); };
  auto [x1, s1] = bicgstab_solve<double>(A, plain_apply, b, Vector<double>::Zero(A.rows()), cfg);

  const auto obj = build_objective(A, F);
  const auto report = optimize(obj);
  const auto accel = make_preconditioner(F, report.params);
  ApplyFn<double> accel_apply = [&](const Vector<double>& r) { return accel.apply(r); };
  auto [x2, s2] = bicgstab_solve<double>(A, accel_apply, b, Vector<double>::Zero(A.rows()), cfg);

  CHECK(s1.convergence == ConvergenceClass::Convergent);
  CHECK(s2.convergence == ConvergenceClass::Convergent);
  CHECK(s2.iterations < s1.iterations);
}
