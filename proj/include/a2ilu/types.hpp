#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace a2ilu {

using Index = int;

/// Compressed sparse row storage. Column indices ascend within each row and
/// duplicates are forbidden; every producer in this library yields compressed
/// matrices satisfying both.
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Factorization or triangular solve hit a zero / sub-threshold pivot.
class BreakdownError : public std::runtime_error {
public:
  BreakdownError(Index row, const std::string& what)
      : std::runtime_error(what), row_(row) {}
  Index row() const noexcept { return row_; }

private:
  Index row_;
};

/// A nonfinite value surfaced where a finite one is required.
class NumericError : public std::runtime_error {
public:
  NumericError(Index row, const std::string& what)
      : std::runtime_error(what), row_(row) {}
  Index row() const noexcept { return row_; }

private:
  Index row_;
};

/// The matrix has a structurally missing or exactly zero diagonal entry.
class ZeroDiagonalError : public std::runtime_error {
public:
  ZeroDiagonalError(Index row, const std::string& what)
      : std::runtime_error(what), row_(row) {}
  Index row() const noexcept { return row_; }

private:
  Index row_;
};

/// Structurally valid Matrix Market input of a kind this library does not handle.
class UnsupportedFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates the Matrix Market grammar.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A computation exceeded its configured memory budget.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace a2ilu
