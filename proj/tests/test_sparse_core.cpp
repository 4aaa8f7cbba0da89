#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "a2ilu/sparse_kernels.hpp"
#include "oracles.hpp"

using namespace a2ilu;
using oracles::Matrix;

TEST_CASE("matvec: identity") {
  auto I = oracles::sparse_from_dense(Matrix::Identity(3, 3));
  Eigen::Vector3d x(1, 2, 3);
  const Vector<double> y = matvec<double>(I, x);
  CHECK(y(0) == 1.0);
  CHECK(y(1) == 2.0);
  CHECK(y(2) == 3.0);
}

TEST_CASE("matvec: tridiagonal row sums") {
  auto A = oracles::tridiagonal(3, 1.0, 4.0, 1.0);
  const Vector<double> y = matvec<double>(A, Vector<double>::Ones(3));
  CHECK(y(0) == 5.0);
  CHECK(y(1) == 6.0);
  CHECK(y(2) == 5.0);
}

TEST_CASE("matvec: dimension mismatch rejected") {
  auto A = oracles::tridiagonal(3, 1.0, 4.0, 1.0);
  CHECK_THROWS_AS(matvec<double>(A, Vector<double>::Ones(4)), std::invalid_argument);
}

TEST_CASE("matvec: dense oracle on random instances") {
  for (unsigned seed = 0; seed < 50; ++seed) {
    auto A = oracles::random_dominant(30, 0.2, 1000 + seed);
    const auto x = oracles::random_vector(30, 2000 + seed);
    const Vector<double> got = matvec<double>(A, x);
    const Eigen::VectorXd want = oracles::dense(A) * x;
    const double scale = want.cwiseAbs().maxCoeff();
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-13 * scale);
  }
}

TEST_CASE("build_rhs_ones equals matvec with the ones vector") {
  auto A = oracles::random_dominant(17, 0.3, 7);
  const Vector<double> b = build_rhs_ones(A);
  const Vector<double> want = matvec<double>(A, Vector<double>::Ones(17));
  CHECK(b == want);
}

TEST_CASE("lower_solve: diagonal system") {
  SparseMatrix<double> L(2, 2);  // empty strictly-lower part
  Vector<double> d(2);
  d << 2, 2;
  Vector<double> b(2);
  b << 4, 6;
  const Vector<double> y = lower_solve(L, d, b);
  CHECK(y(0) == 2.0);
  CHECK(y(1) == 3.0);
}

TEST_CASE("lower_solve: 2x2 forward substitution") {
  Matrix Ld = Matrix::Zero(2, 2);
  Ld(1, 0) = 1.0;
  Vector<double> d(2);
  d << 4, 3.75;
  Vector<double> b(2);
  b << 4, 4.75;
  const Vector<double> y = lower_solve(oracles::sparse_from_dense(Ld), d, b);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(y(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lower/upper_solve: dense oracle on random triangular systems") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  const Index n = 20;
  Matrix Ld = Matrix::Zero(n, n);
  Matrix Ud = Matrix::Zero(n, n);
  Vector<double> d(n);
  for (Index i = 0; i < n; ++i) {
    d(i) = 2.0 + std::abs(value(rng));
    for (Index j = 0; j < i; ++j) {
      if (value(rng) > 0.2) Ld(i, j) = value(rng);
      if (value(rng) > 0.2) Ud(j, i) = value(rng);
    }
  }
  const Vector<double> b = oracles::random_vector(n, 43);
  const Matrix Lfull = Ld + Matrix(d.asDiagonal());
  const Matrix Ufull = Ud + Matrix(d.asDiagonal());

  const Vector<double> yl = lower_solve(oracles::sparse_from_dense(Ld), d, b);
  const Eigen::VectorXd wl = Lfull.triangularView<Eigen::Lower>().solve(b);
  CHECK((yl - wl).norm() <= 1e-12 * wl.norm());

  const Vector<double> yu = upper_solve(oracles::sparse_from_dense(Ud), d, b);
  const Eigen::VectorXd wu = Ufull.triangularView<Eigen::Upper>().solve(b);
  CHECK((yu - wu).norm() <= 1e-12 * wu.norm());

  // residual form of the same property
  const Vector<double> rl = Lfull * yl - b;
  CHECK(rl.cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("lower_solve: zero diagonal identifies the row") {
  SparseMatrix<double> L(2, 2);
  Vector<double> d(2);
  d << 1, 0;
  const Vector<double> ones = Vector<double>::Ones(2);
  try {
    lower_solve(L, d, ones);
    FAIL("expected BreakdownError");
  } catch (const BreakdownError& e) {
    CHECK(e.row() == 1);
  }
}

TEST_CASE("upper_solve: mirror examples") {
  SparseMatrix<double> U(2, 2);
  Vector<double> d(2);
  d << 2, 2;
  Vector<double> b(2);
  b << 4, 6;
  const Vector<double> y = upper_solve(U, d, b);
  CHECK(y(0) == 2.0);
  CHECK(y(1) == 3.0);

  Matrix Ud = Matrix::Zero(2, 2);
  Ud(0, 1) = 1.0;
  Vector<double> d2(2);
  d2 << 4, 3.75;
  Vector<double> b2(2);
  b2 << 5, 3.75;
  const Vector<double> y2 = upper_solve(oracles::sparse_from_dense(Ud), d2, b2);
  CHECK(y2(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(y2(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("diagonal_scale: diag(4,9)") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 4.0;
  A(1, 1) = 9.0;
  auto [scaled, record] = diagonal_scale(oracles::sparse_from_dense(A));
  CHECK(oracles::dense(scaled)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(oracles::dense(scaled)(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(record.d_scale(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(record.d_scale(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("diagonal_scale: [[4,2],[2,4]]") {
  Matrix A(2, 2);
  A << 4, 2, 2, 4;
  auto [scaled, record] = diagonal_scale(oracles::sparse_from_dense(A));
  const Matrix S = oracles::dense(scaled);
  CHECK(S(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(S(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(S(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(S(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("diagonal_scale: unit-diagonal matrix unchanged") {
  Matrix A(2, 2);
  A << 1, 0.25, 0.25, 1;
  auto [scaled, record] = diagonal_scale(oracles::sparse_from_dense(A));
  CHECK(oracles::dense(scaled) == A);
  CHECK(record.d_scale(0) == 1.0);
  CHECK(record.d_scale(1) == 1.0);
}

TEST_CASE("diagonal_scale: every diagonal entry becomes sign(a_ii)") {
  auto A = oracles::random_dominant(25, 0.2, 3, /*symmetric=*/true);
  // flip one diagonal sign to exercise the indefinite path
  Matrix Ad = oracles::dense(A);
  Ad(7, 7) = -Ad(7, 7);
  auto [scaled, record] = diagonal_scale(oracles::sparse_from_dense(Ad));
  const Matrix S = oracles::dense(scaled);
  for (Index i = 0; i < 25; ++i) {
    CHECK(std::abs(std::abs(S(i, i)) - 1.0) <= 1e-13);
  }
  CHECK(S(7, 7) < 0);
}

TEST_CASE("diagonal_scale: zero diagonal rejected") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(0, 1) = 1.0;
  A(1, 0) = 1.0;
  CHECK_THROWS_AS(diagonal_scale(oracles::sparse_from_dense(A)), ZeroDiagonalError);
}

TEST_CASE("diagonal_scale: solving the scaled system recovers the unscaled solution") {
  auto A = oracles::random_dominant(30, 0.2, 11, /*symmetric=*/true);
  const auto b = oracles::random_vector(30, 12);
  auto [scaled, record] = diagonal_scale(A);

  const Eigen::VectorXd x_direct = oracles::dense(A).fullPivLu().solve(b);
  const Eigen::VectorXd x_hat =
      oracles::dense(scaled).fullPivLu().solve(record.scale_rhs(b));
  const Vector<double> x_recovered = record.unscale_solution(x_hat);
  CHECK((x_recovered - x_direct).norm() <= 1e-10 * x_direct.norm());
}

TEST_CASE("zero_diagonal_rows flags missing and explicit-zero diagonals") {
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = 1.0;
  A(1, 2) = 1.0;  // row 1 has no diagonal
  A(2, 2) = 5.0;
  auto rows = zero_diagonal_rows(oracles::sparse_from_dense(A));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == 1);
}

TEST_CASE("is_numerically_symmetric") {
  CHECK(is_numerically_symmetric(oracles::laplacian_2d(4, 4)));
  auto A = oracles::random_dominant(10, 0.3, 5);  // nonsymmetric
  CHECK_FALSE(is_numerically_symmetric(A));
}
