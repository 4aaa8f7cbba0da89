#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "a2ilu/sparse_kernels.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu {

template <typename Scalar>
struct MatrixMarketMatrix {
  SparseMatrix<Scalar> matrix;
  /// true when the file declared `symmetric` storage (expanded to full on read)
  bool symmetric_source = false;
  /// rows with missing/zero diagonal, so a harness can exclude the matrix
  std::vector<Index> zero_diagonal_rows;
};

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    return true;
  }
  return false;
}

struct MmHeader {
  std::string format;
  std::string field;
  std::string symmetry;
};

inline MmHeader read_banner(std::istream& in, const std::string& path) {
  std::string banner;
  if (!std::getline(in, banner)) throw ParseError(path + ": empty file");
  std::istringstream ss(banner);
  std::string tag, object, format, field, symmetry;
  ss >> tag >> object >> format >> field >> symmetry;
  if (lowercase(tag) != "%%matrixmarket") {
    throw ParseError(path + ": missing %%MatrixMarket banner");
  }
  if (lowercase(object) != "matrix") {
    throw UnsupportedFormatError(path + ": unsupported object '" + object + "'");
  }
  return {lowercase(format), lowercase(field), lowercase(symmetry)};
}

}  // namespace detail

/// Reads a coordinate-format, real-valued Matrix Market file. Symmetric files
/// are expanded to full storage; duplicate entries are summed.
template <typename Scalar = double>
MatrixMarketMatrix<Scalar> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  auto header = detail::read_banner(in, path);

  if (header.format != "coordinate") {
    throw UnsupportedFormatError(path + ": format '" + header.format +
                                 "' not supported for matrices (coordinate only)");
  }
  if (header.field == "pattern" || header.field == "complex") {
    throw UnsupportedFormatError(path + ": field '" + header.field + "' not supported");
  }
  if (header.field != "real" && header.field != "integer") {
    throw UnsupportedFormatError(path + ": unknown field '" + header.field + "'");
  }
  const bool symmetric = header.symmetry == "symmetric";
  if (!symmetric && header.symmetry != "general") {
    throw UnsupportedFormatError(path + ": symmetry '" + header.symmetry + "' not supported");
  }

  std::string line;
  if (!detail::next_data_line(in, line)) throw ParseError(path + ": missing size line");
  long long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0) {
      throw ParseError(path + ": malformed size line '" + line + "'");
    }
  }
  if (rows != cols) {
    throw UnsupportedFormatError(path + ": only square matrices are supported (" +
                                 std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }

  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; ++k) {
    if (!detail::next_data_line(in, line)) {
      throw ParseError(path + ": expected " + std::to_string(nnz) + " entries, got " +
                       std::to_string(k));
    }
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 0;
    if (!(ss >> i >> j >> v)) throw ParseError(path + ": malformed entry '" + line + "'");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError(path + ": entry index out of range in '" + line + "'");
    }
    triplets.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1),
                          static_cast<Scalar>(v));
    if (symmetric && i != j) {
      triplets.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1),
                            static_cast<Scalar>(v));
    }
  }

  MatrixMarketMatrix<Scalar> result;
  result.matrix.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  result.symmetric_source = symmetric;
  result.zero_diagonal_rows = zero_diagonal_rows(result.matrix);
  return result;
}

/// Writes coordinate real general, 1-based, full precision (round-trip exact).
template <typename Scalar>
void write_matrix_market(const std::string& path, const SparseMatrix<Scalar>& A) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  out << std::setprecision(17);
  for (Index i = 0; i < A.rows(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
      out << (i + 1) << " " << (it.col() + 1) << " " << it.value() << "\n";
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

/// Reads a dense vector stored as an n-by-1 array-format file.
template <typename Scalar = double>
Vector<Scalar> read_matrix_market_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  auto header = detail::read_banner(in, path);
  if (header.format != "array" || (header.field != "real" && header.field != "integer")) {
    throw UnsupportedFormatError(path + ": expected array real vector");
  }
  std::string line;
  if (!detail::next_data_line(in, line)) throw ParseError(path + ": missing size line");
  long long rows = 0, cols = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || rows <= 0 || cols != 1) {
      throw UnsupportedFormatError(path + ": expected an n-by-1 array");
    }
  }
  Vector<Scalar> v(rows);
  for (long long k = 0; k < rows; ++k) {
    if (!detail::next_data_line(in, line)) throw ParseError(path + ": truncated vector data");
    std::istringstream ss(line);
    double x = 0;
    if (!(ss >> x)) throw ParseError(path + ": malformed value '" + line + "'");
    v(static_cast<Index>(k)) = static_cast<Scalar>(x);
  }
  return v;
}

template <typename Scalar>
void write_matrix_market_vector(const std::string& path, const Vector<Scalar>& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v(i) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace a2ilu
