#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "a2ilu/types.hpp"

namespace a2ilu {

/// Pivots below this magnitude abort the factorization; tiny-but-finite pivots
/// still flow through (shifted ILU exists to handle them).
inline constexpr double kPivotFloor = 1e-300;

/// DDU-form incomplete factors: M = (L + D) D^{-1} (D + U) with L strictly
/// lower, U strictly upper. The retained pattern is the union of the factor
/// structures plus the diagonal.
template <typename Scalar>
struct FactorTriple {
  SparseMatrix<Scalar> lower;
  Vector<Scalar> diag;
  SparseMatrix<Scalar> upper;

  Index rows() const { return static_cast<Index>(diag.size()); }
  Index pattern_nnz() const {
    return static_cast<Index>(lower.nonZeros() + upper.nonZeros()) + rows();
  }
};

enum class FactorVariant { Ilu0, ShiftedIlu0, Milu0, LevelIlu, CroutIlu };

inline const char* to_string(FactorVariant v) {
  switch (v) {
    case FactorVariant::Ilu0: return "ilu0";
    case FactorVariant::ShiftedIlu0: return "shifted_ilu0";
    case FactorVariant::Milu0: return "milu0";
    case FactorVariant::LevelIlu: return "level_ilu";
    case FactorVariant::CroutIlu: return "crout_ilu";
  }
  return "unknown";
}

struct FactorizationConfig {
  FactorVariant variant = FactorVariant::Ilu0;
  double alpha = 0.0;    // shift parameter (shifted_ilu0)
  double omega = 0.0;    // relaxation parameter (milu0)
  int level_p = 0;       // fill level (level_ilu)
  double tol = 0.0;      // drop tolerance (crout_ilu)
  double fill_ratio_m = std::numeric_limits<double>::infinity();  // max-fill ratio (crout_ilu)
  std::size_t max_pattern_nnz = 0;  // level_ilu pattern budget; 0 = unlimited
};

namespace detail {

/// CSR rows appended in order; maps onto an Eigen matrix without re-sorting.
template <typename Scalar>
struct RowAccumulator {
  std::vector<Index> ptr{0};
  std::vector<Index> cols;
  std::vector<Scalar> vals;

  void push(Index c, Scalar v) {
    cols.push_back(c);
    vals.push_back(v);
  }
  void close_row() { ptr.push_back(static_cast<Index>(cols.size())); }

  SparseMatrix<Scalar> to_matrix(Index rows, Index ncols) const {
    Eigen::Map<const SparseMatrix<Scalar>> map(rows, ncols, static_cast<Index>(cols.size()),
                                               ptr.data(), cols.data(), vals.data());
    return SparseMatrix<Scalar>(map);
  }
};

/// IKJ elimination restricted to a fixed per-row pattern: every retained
/// position (i,j) receives a_ij minus the accumulated l_ik d_kk^{-1} u_kj
/// updates. `row_cols(i)` must return the sorted
/// column list of row i of the pattern, diagonal included, as a
/// (pointer, count) pair. With omega != 0, discarded fill is accumulated and
/// omega-scaled into the row's diagonal.
template <typename Scalar, typename RowCols>
FactorTriple<Scalar> ilu_ikj(const SparseMatrix<Scalar>& A, RowCols&& row_cols, Scalar omega) {
  const Index n = static_cast<Index>(A.rows());
  FactorTriple<Scalar> F;
  F.diag.resize(n);
  RowAccumulator<Scalar> L, U;
  L.cols.reserve(A.nonZeros() / 2);
  L.vals.reserve(A.nonZeros() / 2);
  U.cols.reserve(A.nonZeros() / 2);
  U.vals.reserve(A.nonZeros() / 2);

  std::vector<Scalar> work(n, Scalar(0));
  std::vector<Index> stamp(n, -1);
  const Index* a_ptr = A.outerIndexPtr();
  const Index* a_col = A.innerIndexPtr();
  const Scalar* a_val = A.valuePtr();

  for (Index i = 0; i < n; ++i) {
    auto [cols, count] = row_cols(i);
    bool diag_seen = false;
    for (Index t = 0; t < count; ++t) {
      work[cols[t]] = Scalar(0);
      stamp[cols[t]] = i;
      diag_seen |= cols[t] == i;
    }
    if (!diag_seen) {
      throw std::invalid_argument("factorization: row " + std::to_string(i) +
                                  " has no diagonal entry in the pattern");
    }
    for (Index t = a_ptr[i]; t < a_ptr[i + 1]; ++t) work[a_col[t]] = a_val[t];

    Scalar fill_acc = Scalar(0);
    for (Index t = 0; t < count && cols[t] < i; ++t) {
      const Index k = cols[t];
      const Scalar lik = work[k];
      if (lik == Scalar(0)) continue;
      const Scalar factor = lik / F.diag(k);
      for (Index u = U.ptr[k]; u < U.ptr[k + 1]; ++u) {
        const Index j = U.cols[u];
        if (stamp[j] == i) {
          work[j] -= factor * U.vals[u];
        } else {
          fill_acc += factor * U.vals[u];
        }
      }
    }

    Scalar dii = work[i];
    if (omega != Scalar(0)) dii -= omega * fill_acc;
    if (!(std::abs(dii) >= Scalar(kPivotFloor)) || !std::isfinite(dii)) {
      throw BreakdownError(i, "factorization breakdown: pivot " + std::to_string(dii) +
                                  " in row " + std::to_string(i));
    }
    F.diag(i) = dii;
    for (Index t = 0; t < count; ++t) {
      if (cols[t] < i) L.push(cols[t], work[cols[t]]);
      else if (cols[t] > i) U.push(cols[t], work[cols[t]]);
    }
    L.close_row();
    U.close_row();
  }

  F.lower = L.to_matrix(n, n);
  F.upper = U.to_matrix(n, n);
  return F;
}

}  // namespace detail

/// ILU(0): factorization restricted to pattern(A); all fill-in discarded.
template <typename Scalar>
FactorTriple<Scalar> ilu0(const SparseMatrix<Scalar>& A) {
  const Index* ptr = A.outerIndexPtr();
  const Index* col = A.innerIndexPtr();
  return detail::ilu_ikj(
      A, [&](Index i) { return std::pair<const Index*, Index>(col + ptr[i], ptr[i + 1] - ptr[i]); },
      Scalar(0));
}

/// ILU(0) of A + alpha * diag(A). M approximates the shifted matrix; the
/// Krylov solver still iterates on A.
template <typename Scalar>
FactorTriple<Scalar> shifted_ilu0(const SparseMatrix<Scalar>& A, Scalar alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("shifted_ilu0: alpha must be finite");
  SparseMatrix<Scalar> shifted = A;
  for (Index i = 0; i < shifted.rows(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(shifted, i); it; ++it) {
      if (it.col() == i) {
        it.valueRef() *= Scalar(1) + alpha;
        break;
      }
      if (it.col() > i) break;
    }
  }
  return ilu0(shifted);
}

/// MILU(0): every fill value discarded during row i's elimination is
/// accumulated, omega-scaled, and subtracted from d_ii. omega = 0 reproduces
/// ILU(0) exactly.
template <typename Scalar>
FactorTriple<Scalar> milu0(const SparseMatrix<Scalar>& A, Scalar omega) {
  if (!std::isfinite(omega)) throw std::invalid_argument("milu0: omega must be finite");
  const Index* ptr = A.outerIndexPtr();
  const Index* col = A.innerIndexPtr();
  return detail::ilu_ikj(
      A, [&](Index i) { return std::pair<const Index*, Index>(col + ptr[i], ptr[i + 1] - ptr[i]); },
      omega);
}

namespace detail {

/// Symbolic fill-level pass: level 0 at nonzeros/diagonal, infinity elsewhere;
/// lev_ij = min(lev_ij, lev_ik + lev_kj + 1); positions with level <= p are
/// retained. Returns per-row sorted column lists (diagonal included).
template <typename Scalar>
std::vector<std::vector<Index>> symbolic_levels(const SparseMatrix<Scalar>& A, int p,
                                                std::size_t max_pattern_nnz) {
  const Index n = static_cast<Index>(A.rows());
  const Index* a_ptr = A.outerIndexPtr();
  const Index* a_col = A.innerIndexPtr();

  std::vector<std::vector<Index>> pattern(n);
  // strictly upper (col, level) lists of processed rows
  std::vector<std::vector<std::pair<Index, int>>> upper_levels(n);

  std::vector<int> lev(n, 0);
  std::vector<Index> stamp(n, -1);
  std::vector<Index> next(n + 1, -1);  // linked working row, sentinel head at index n
  std::size_t total_nnz = 0;

  for (Index i = 0; i < n; ++i) {
    // seed the working row with pattern(A) row i at level 0
    Index prev = n;
    bool diag_seen = false;
    for (Index t = a_ptr[i]; t < a_ptr[i + 1]; ++t) {
      const Index c = a_col[t];
      next[prev] = c;
      prev = c;
      lev[c] = 0;
      stamp[c] = i;
      diag_seen |= c == i;
    }
    next[prev] = -1;
    if (!diag_seen) {
      throw std::invalid_argument("level_ilu: row " + std::to_string(i) +
                                  " has no diagonal entry");
    }

    for (Index k = next[n]; k != -1 && k < i; k = next[k]) {
      const int lev_ik = lev[k];
      for (const auto& [j, lev_kj] : upper_levels[k]) {
        const int fill_level = lev_ik + lev_kj + 1;
        if (fill_level > p) continue;
        if (stamp[j] == i) {
          lev[j] = std::min(lev[j], fill_level);
        } else {
          // insert j ahead of the cursor (j > k always holds)
          Index at = k;
          while (next[at] != -1 && next[at] < j) at = next[at];
          next[j] = next[at];
          next[at] = j;
          stamp[j] = i;
          lev[j] = fill_level;
        }
      }
    }

    auto& row = pattern[i];
    for (Index c = next[n]; c != -1; c = next[c]) {
      row.push_back(c);
      if (c > i) upper_levels[i].emplace_back(c, lev[c]);
    }
    total_nnz += row.size();
    if (max_pattern_nnz != 0 && total_nnz > max_pattern_nnz) {
      throw ResourceError("level_ilu: pattern exceeded budget of " +
                          std::to_string(max_pattern_nnz) + " nonzeros at row " +
                          std::to_string(i));
    }
  }
  return pattern;
}

}  // namespace detail

/// Fill-level ILU(p): symbolic level pass then pattern-restricted
/// factorization. p = 0 reproduces ILU(0) bitwise.
template <typename Scalar>
FactorTriple<Scalar> level_ilu(const SparseMatrix<Scalar>& A, int p,
                               std::size_t max_pattern_nnz = 0) {
  if (p < 0) throw std::invalid_argument("level_ilu: p must be >= 0");
  const auto pattern = detail::symbolic_levels(A, p, max_pattern_nnz);
  return detail::ilu_ikj(
      A,
      [&](Index i) {
        return std::pair<const Index*, Index>(pattern[i].data(),
                                              static_cast<Index>(pattern[i].size()));
      },
      Scalar(0));
}

namespace detail {

template <typename Scalar>
struct CroutWorkRow {
  std::vector<Scalar> val;
  std::vector<Index> stamp;
  std::vector<Index> touched;
  Index current = -1;

  explicit CroutWorkRow(Index n) : val(n, Scalar(0)), stamp(n, -1) {}

  void reset(Index id) {
    current = id;
    touched.clear();
  }
  void set(Index j, Scalar v) {
    val[j] = v;
    stamp[j] = current;
    touched.push_back(j);
  }
  void axpy(Index j, Scalar delta) {
    if (stamp[j] == current) {
      val[j] += delta;
    } else {
      set(j, delta);
    }
  }
};

/// Sorted by magnitude descending (index ascending on ties), then kept
/// entries are re-sorted by index for compressed storage.
template <typename Scalar>
void drop_and_cap(std::vector<std::pair<Index, Scalar>>& entries, Scalar threshold, Index cap) {
  std::erase_if(entries, [&](const auto& e) { return std::abs(e.second) < threshold; });
  if (cap >= 0 && static_cast<Index>(entries.size()) > cap) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      const Scalar ma = std::abs(a.second), mb = std::abs(b.second);
      if (ma != mb) return ma > mb;
      return a.first < b.first;
    });
    entries.resize(static_cast<std::size_t>(cap));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

}  // namespace detail

/// Crout ILU: L built by columns, U by rows. Per step k, candidates with
/// magnitude below tol times the 2-norm of the corresponding row/column of A
/// are dropped, and only the ceil(nnz(A)/(2n) * m) largest survivors are kept.
/// tol = 0 with m = infinity yields the complete LU factorization.
template <typename Scalar>
FactorTriple<Scalar> crout_ilu(const SparseMatrix<Scalar>& A, Scalar tol, double fill_ratio_m) {
  const Index n = static_cast<Index>(A.rows());
  if (!(tol >= Scalar(0))) throw std::invalid_argument("crout_ilu: tol must be >= 0");
  if (!(fill_ratio_m >= 1.0)) {
    throw std::invalid_argument("crout_ilu: fill_ratio_m must be >= 1 (or infinity)");
  }

  const bool unlimited = std::isinf(fill_ratio_m);
  const Index cap =
      unlimited ? -1
                : static_cast<Index>(std::min<double>(
                      std::ceil(static_cast<double>(A.nonZeros()) / (2.0 * n) * fill_ratio_m),
                      static_cast<double>(n)));

  // Column access to A comes from the transpose, materialized once.
  SparseMatrix<Scalar> At = A.transpose();

  Vector<Scalar> row_norm(n), col_norm(n);
  for (Index i = 0; i < n; ++i) {
    Scalar r2 = 0, c2 = 0;
    for (typename SparseMatrix<Scalar>::InnerIterator it(A, i); it; ++it) {
      r2 += it.value() * it.value();
    }
    for (typename SparseMatrix<Scalar>::InnerIterator it(At, i); it; ++it) {
      c2 += it.value() * it.value();
    }
    row_norm(i) = std::sqrt(r2);
    col_norm(i) = std::sqrt(c2);
  }

  // U rows and L columns, both appended in step order.
  detail::RowAccumulator<Scalar> U, Lc;
  Vector<Scalar> diag(n);

  // u_head[c]: rows whose next unconsumed strictly-upper entry sits in column c.
  // l_head[r]: columns whose next unconsumed strictly-lower entry sits in row r.
  std::vector<Index> u_head(n, -1), u_link(n, -1), u_cursor(n, 0);
  std::vector<Index> l_head(n, -1), l_link(n, -1), l_cursor(n, 0);

  detail::CroutWorkRow<Scalar> z(n), w(n);
  std::vector<std::pair<Index, Scalar>> candidates;

  const Index* a_ptr = A.outerIndexPtr();
  const Index* a_col = A.innerIndexPtr();
  const Scalar* a_val = A.valuePtr();
  const Index* t_ptr = At.outerIndexPtr();
  const Index* t_col = At.innerIndexPtr();
  const Scalar* t_val = At.valuePtr();

  for (Index k = 0; k < n; ++k) {
    // --- row k of U and the pivot ---
    z.reset(k);
    bool diag_seen = false;
    for (Index t = a_ptr[k]; t < a_ptr[k + 1]; ++t) {
      if (a_col[t] < k) continue;
      z.set(a_col[t], a_val[t]);
      diag_seen |= a_col[t] == k;
    }
    if (!diag_seen) {
      throw std::invalid_argument("crout_ilu: row " + std::to_string(k) +
                                  " has no diagonal entry");
    }
    for (Index i = l_head[k]; i != -1;) {
      const Index next_i = l_link[i];
      const Scalar factor = Lc.vals[l_cursor[i]] / diag(i);
      for (Index t = u_cursor[i]; t < U.ptr[i + 1]; ++t) {
        z.axpy(U.cols[t], -factor * U.vals[t]);
      }
      if (++l_cursor[i] < Lc.ptr[i + 1]) {
        const Index r = Lc.cols[l_cursor[i]];
        l_link[i] = l_head[r];
        l_head[r] = i;
      }
      i = next_i;
    }

    const Scalar dkk = z.val[k];
    if (!(std::abs(dkk) >= Scalar(kPivotFloor)) || !std::isfinite(dkk)) {
      throw BreakdownError(k, "crout_ilu breakdown: pivot " + std::to_string(dkk) + " in row " +
                                  std::to_string(k));
    }
    diag(k) = dkk;

    candidates.clear();
    for (Index j : z.touched) {
      if (j > k) candidates.emplace_back(j, z.val[j]);
    }
    detail::drop_and_cap(candidates, tol * row_norm(k), cap);
    for (const auto& [c, v] : candidates) U.push(c, v);
    U.close_row();
    u_cursor[k] = U.ptr[k];
    if (u_cursor[k] < U.ptr[k + 1]) {
      const Index c = U.cols[u_cursor[k]];
      u_link[k] = u_head[c];
      u_head[c] = k;
    }

    // --- column k of L ---
    w.reset(k);
    for (Index t = t_ptr[k]; t < t_ptr[k + 1]; ++t) {
      if (t_col[t] > k) w.set(t_col[t], t_val[t]);
    }
    for (Index i = u_head[k]; i != -1;) {
      const Index next_i = u_link[i];
      const Scalar factor = U.vals[u_cursor[i]] / diag(i);
      for (Index t = l_cursor[i]; t < Lc.ptr[i + 1]; ++t) {
        w.axpy(Lc.cols[t], -factor * Lc.vals[t]);
      }
      if (++u_cursor[i] < U.ptr[i + 1]) {
        const Index c = U.cols[u_cursor[i]];
        u_link[i] = u_head[c];
        u_head[c] = i;
      }
      i = next_i;
    }

    candidates.clear();
    for (Index j : w.touched) {
      if (j > k) candidates.emplace_back(j, w.val[j]);
    }
    detail::drop_and_cap(candidates, tol * col_norm(k), cap);
    for (const auto& [r, v] : candidates) Lc.push(r, v);
    Lc.close_row();
    l_cursor[k] = Lc.ptr[k];
    if (l_cursor[k] < Lc.ptr[k + 1]) {
      const Index r = Lc.cols[l_cursor[k]];
      l_link[k] = l_head[r];
      l_head[r] = k;
    }
  }

  FactorTriple<Scalar> F;
  F.diag = std::move(diag);
  {
    Eigen::Map<const Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>> lmap(
        n, n, static_cast<Index>(Lc.cols.size()), Lc.ptr.data(), Lc.cols.data(), Lc.vals.data());
    F.lower = SparseMatrix<Scalar>(lmap);
  }
  F.upper = U.to_matrix(n, n);
  return F;
}

/// Dispatch on FactorizationConfig, validating its invariants.
template <typename Scalar>
FactorTriple<Scalar> factorize(const SparseMatrix<Scalar>& A, const FactorizationConfig& cfg) {
  switch (cfg.variant) {
    case FactorVariant::Ilu0:
      return ilu0(A);
    case FactorVariant::ShiftedIlu0:
      return shifted_ilu0(A, Scalar(cfg.alpha));
    case FactorVariant::Milu0:
      return milu0(A, Scalar(cfg.omega));
    case FactorVariant::LevelIlu:
      return level_ilu(A, cfg.level_p, cfg.max_pattern_nnz);
    case FactorVariant::CroutIlu:
      return crout_ilu(A, Scalar(cfg.tol), cfg.fill_ratio_m);
  }
  throw std::invalid_argument("factorize: unknown variant");
}

}  // namespace a2ilu
