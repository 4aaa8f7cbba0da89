#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "a2ilu/types.hpp"

namespace a2ilu {

template <typename Scalar>
Vector<Scalar> matvec(const SparseMatrix<Scalar>& A, const Vector<Scalar>& x) {
  if (x.size() != A.cols()) {
    throw std::invalid_argument("matvec: vector length " + std::to_string(x.size()) +
                                " does not match matrix dimension " + std::to_string(A.cols()));
  }
  return A * x;
}

/// b = A e, the right-hand side whose exact solution is the all-ones vector.
template <typename Scalar>
Vector<Scalar> build_rhs_ones(const SparseMatrix<Scalar>& A) {
  return A * Vector<Scalar>::Ones(A.cols());
}

/// Solves (L + D) y = b by forward substitution. L must be strictly lower triangular.
template <typename Scalar, typename Rhs>
Vector<Scalar> lower_solve(const SparseMatrix<Scalar>& L, const Vector<Scalar>& diag,
                           const Eigen::MatrixBase<Rhs>& b) {
  const Index n = static_cast<Index>(diag.size());
  if (L.rows() != n || b.size() != n) {
    throw std::invalid_argument("lower_solve: dimension mismatch");
  }
  Vector<Scalar> y(n);
  for (Index i = 0; i < n; ++i) {
    Scalar acc = b(i);
    for (typename SparseMatrix<Scalar>::InnerIterator it(L, i); it; ++it) {
      acc -= it.value() * y(it.col());
    }
    if (diag(i) == Scalar(0)) {
      throw BreakdownError(i, "lower_solve: zero diagonal entry in row " + std::to_string(i));
    }
    y(i) = acc / diag(i);
  }
  return y;
}

/// Solves (D + U) y = b by backward substitution. U must be strictly upper triangular.
template <typename Scalar, typename Rhs>
Vector<Scalar> upper_solve(const SparseMatrix<Scalar>& U, const Vector<Scalar>& diag,
                           const Eigen::MatrixBase<Rhs>& b) {
  const Index n = static_cast<Index>(diag.size());
  if (U.rows() != n || b.size() != n) {
    throw std::invalid_argument("upper_solve: dimension mismatch");
  }
  Vector<Scalar> y(n);
  for (Index i = n - 1; i >= 0; --i) {
    Scalar acc = b(i);
    for (typename SparseMatrix<Scalar>::InnerIterator it(U, i); it; ++it) {
      acc -= it.value() * y(it.col());
    }
    if (diag(i) == Scalar(0)) {
      throw BreakdownError(i, "upper_solve: zero diagonal entry in row " + std::to_string(i));
    }
    y(i) = acc / diag(i);
  }
  return y;
}

/// Rows whose diagonal entry is structurally missing or stored as exactly zero.
template <typename Scalar>
std::vector<Index> zero_diagonal_rows(const SparseMatrix<Scalar>& A) {
  std::vector<Index> rows;
  for (Index i = 0; i < A.rows(); ++i) {
    bool ok = false;
    for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i) {
        ok = it.value() != Scalar(0);
        break;
      }
      if (it.col() > i) break;
    }
    if (!ok) rows.push_back(i);
  }
  return rows;
}

/// Symmetric diagonal scaling record: S = diag(1/sqrt(|a_ii|)).
///
/// The same elementwise product by S both maps a right-hand side into scaled
/// variables (b_hat = S b) and recovers a solution from them (x = S x_hat),
/// since (S A S)(S^{-1} x) = S b.
template <typename Scalar>
struct ScalingRecord {
  Vector<Scalar> d_scale;
  bool applied = false;

  Vector<Scalar> scale_rhs(const Vector<Scalar>& b) const {
    if (!applied) return b;
    return (d_scale.array() * b.array()).matrix();
  }
  Vector<Scalar> unscale_solution(const Vector<Scalar>& x_hat) const {
    if (!applied) return x_hat;
    return (d_scale.array() * x_hat.array()).matrix();
  }
};

/// Returns S A S with S = diag(1/sqrt(|a_ii|)), so every diagonal entry of the
/// result equals sign(a_ii); indefinite matrices scale to +-1 diagonals.
template <typename Scalar>
std::pair<SparseMatrix<Scalar>, ScalingRecord<Scalar>> diagonal_scale(const SparseMatrix<Scalar>& A) {
  const Index n = static_cast<Index>(A.rows());
  Vector<Scalar> scale(n);
  for (Index i = 0; i < n; ++i) {
    Scalar dii = Scalar(0);
    for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i) {
        dii = it.value();
        break;
      }
      if (it.col() > i) break;
    }
    if (dii == Scalar(0)) {
      throw ZeroDiagonalError(i, "diagonal_scale: zero or missing diagonal in row " +
                                     std::to_string(i));
    }
    scale(i) = Scalar(1) / std::sqrt(std::abs(dii));
  }

  SparseMatrix<Scalar> scaled = A;
  for (Index i = 0; i < n; ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(scaled, i); it; ++it) {
      it.valueRef() *= scale(i) * scale(it.col());
    }
  }
  ScalingRecord<Scalar> record{std::move(scale), true};
  return {std::move(scaled), std::move(record)};
}

/// max |a_ij - a_ji| <= tol * max |a_ij|
template <typename Scalar>
bool is_numerically_symmetric(const SparseMatrix<Scalar>& A, Scalar tol = Scalar(1e-13)) {
  if (A.rows() != A.cols()) return false;
  SparseMatrix<Scalar> diff = SparseMatrix<Scalar>(A.transpose()) - A;
  Scalar max_diff = 0;
  for (Index k = 0; k < diff.nonZeros(); ++k) {
    max_diff = std::max(max_diff, std::abs(diff.valuePtr()[k]));
  }
  Scalar max_abs = 0;
  for (Index k = 0; k < A.nonZeros(); ++k) {
    max_abs = std::max(max_abs, std::abs(A.valuePtr()[k]));
  }
  return max_diff <= tol * max_abs;
}

}  // namespace a2ilu
