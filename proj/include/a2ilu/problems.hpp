#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "a2ilu/sparse_kernels.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu {

/// A generated linear system. Matrices are 7-point stencils on the unit cube
/// with m lattice points per axis (n = m^3), mesh size h = 1/(m+1), zero
/// Dirichlet boundary eliminated. Grid indexing is lexicographic with x
/// fastest: idx = (i-1) + (j-1) m + (k-1) m^2 for the point (i h, j h, k h).
template <typename Scalar>
struct Problem {
  SparseMatrix<Scalar> matrix;
  Vector<Scalar> rhs;
};

namespace detail {

inline void check_grid(Index m) {
  if (m < 2) throw std::invalid_argument("grid: m must be >= 2");
  // 256^3 already needs several GB for the matrix plus factors
  if (m > 256) {
    throw ResourceError("grid: m = " + std::to_string(m) +
                        " exceeds the desk-scale budget (256 points per axis)");
  }
}

/// kappa of the jump problem evaluated at lattice point (i h, j h, k h),
/// lattice indices in 0..m+1 so boundary points are included.
template <typename Scalar>
Scalar jump_coefficient(Index i, Index j, Index k, Scalar h, Scalar contrast) {
  const Scalar x = i * h, y = j * h, z = k * h;
  const bool inside = Scalar(0.25) <= x && x <= Scalar(0.75) && Scalar(0.25) <= y &&
                      y <= Scalar(0.75) && Scalar(0.25) <= z && z <= Scalar(0.75);
  return inside ? contrast : Scalar(1);
}

template <typename Scalar>
Scalar harmonic_mean(Scalar a, Scalar b) {
  return Scalar(2) * a * b / (a + b);
}

}  // namespace detail

/// Finite-volume discretization of -div(kappa grad u) = f on (0,1)^3 with
/// u = 0 on the boundary, f(x,y,z) = x + y + z, and kappa jumping to
/// `contrast` inside [1/4, 3/4]^3. Face coefficients are harmonic means of
/// the point values; entries carry the h^3 / h^2 volume form, so the
/// kappa = 1 interior row is h * [6, -1 x neighbors]. SPD.
template <typename Scalar = double>
Problem<Scalar> gen_poisson_jump(Index m, Scalar contrast = Scalar(1000)) {
  detail::check_grid(m);
  const Index n = m * m * m;
  const Scalar h = Scalar(1) / Scalar(m + 1);
  const Scalar face = h;           // kappa_face * h^2 / h
  const Scalar volume = h * h * h;

  Problem<Scalar> out;
  out.matrix.resize(n, n);
  out.matrix.reserve(Eigen::Matrix<Index, Eigen::Dynamic, 1>::Constant(n, 7));
  out.rhs.resize(n);

  auto kappa = [&](Index i, Index j, Index k) {
    return detail::jump_coefficient(i, j, k, h, contrast);
  };
  auto idx = [m](Index i, Index j, Index k) { return (i - 1) + (j - 1) * m + (k - 1) * m * m; };

  for (Index k = 1; k <= m; ++k) {
    for (Index j = 1; j <= m; ++j) {
      for (Index i = 1; i <= m; ++i) {
        const Index row = idx(i, j, k);
        const Scalar kc = kappa(i, j, k);
        const Scalar kzm = detail::harmonic_mean(kc, kappa(i, j, k - 1)) * face;
        const Scalar kym = detail::harmonic_mean(kc, kappa(i, j - 1, k)) * face;
        const Scalar kxm = detail::harmonic_mean(kc, kappa(i - 1, j, k)) * face;
        const Scalar kxp = detail::harmonic_mean(kc, kappa(i + 1, j, k)) * face;
        const Scalar kyp = detail::harmonic_mean(kc, kappa(i, j + 1, k)) * face;
        const Scalar kzp = detail::harmonic_mean(kc, kappa(i, j, k + 1)) * face;

        if (k > 1) out.matrix.insert(row, idx(i, j, k - 1)) = -kzm;
        if (j > 1) out.matrix.insert(row, idx(i, j - 1, k)) = -kym;
        if (i > 1) out.matrix.insert(row, idx(i - 1, j, k)) = -kxm;
        out.matrix.insert(row, row) = kzm + kym + kxm + kxp + kyp + kzp;
        if (i < m) out.matrix.insert(row, idx(i + 1, j, k)) = -kxp;
        if (j < m) out.matrix.insert(row, idx(i, j + 1, k)) = -kyp;
        if (k < m) out.matrix.insert(row, idx(i, j, k + 1)) = -kzp;

        out.rhs(row) = (i * h + j * h + k * h) * volume;
      }
    }
  }
  out.matrix.makeCompressed();
  return out;
}

/// 7-point Helmholtz: the kappa = 1 Laplacian minus shift * h^3 on the
/// diagonal (volume form). rhs = A e. The shift must keep the matrix
/// positive definite for CG runs (shift < 3 pi^2 suffices on this grid).
template <typename Scalar = double>
Problem<Scalar> gen_helmholtz(Index m, Scalar shift) {
  Problem<Scalar> out = gen_poisson_jump<Scalar>(m, Scalar(1));
  const Scalar h = Scalar(1) / Scalar(m + 1);
  const Scalar diag_shift = shift * h * h * h;
  for (Index i = 0; i < out.matrix.rows(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(out.matrix, i); it; ++it) {
      if (it.col() == i) {
        it.valueRef() -= diag_shift;
        break;
      }
      if (it.col() > i) break;
    }
  }
  out.rhs = build_rhs_ones(out.matrix);
  return out;
}

/// 7-point diffusion (kappa = 1) plus first-order upwind advection in
/// conservative flux form: interior advection row sums vanish. Nonsymmetric
/// for nonzero velocity; velocity = 0 reproduces the Poisson generator
/// output exactly.
template <typename Scalar = double>
Problem<Scalar> gen_advection_diffusion(Index m, std::array<Scalar, 3> velocity) {
  Problem<Scalar> out = gen_poisson_jump<Scalar>(m, Scalar(1));
  const Scalar h = Scalar(1) / Scalar(m + 1);
  const Scalar area = h * h;

  auto idx = [m](Index i, Index j, Index k) { return (i - 1) + (j - 1) * m + (k - 1) * m * m; };

  // per axis: stride of the neighbor index and the lattice coordinate
  for (Index k = 1; k <= m; ++k) {
    for (Index j = 1; j <= m; ++j) {
      for (Index i = 1; i <= m; ++i) {
        const Index row = idx(i, j, k);
        const std::array<Index, 3> coord{i, j, k};
        const std::array<Index, 3> stride{1, m, m * m};
        for (int axis = 0; axis < 3; ++axis) {
          const Scalar vel = velocity[static_cast<std::size_t>(axis)];
          if (vel == Scalar(0)) continue;
          const Scalar flux = std::abs(vel) * area;
          // outflow face always charges the row's own unknown (upwind value)
          out.matrix.coeffRef(row, row) += flux;
          // inflow face carries the upwind neighbor, absent on the boundary
          const bool from_low = vel > Scalar(0);
          const Index nb_coord = from_low ? coord[static_cast<std::size_t>(axis)] - 1
                                          : coord[static_cast<std::size_t>(axis)] + 1;
          if (nb_coord >= 1 && nb_coord <= m) {
            const Index nb = from_low ? row - stride[static_cast<std::size_t>(axis)]
                                      : row + stride[static_cast<std::size_t>(axis)];
            out.matrix.coeffRef(row, nb) -= flux;
          }
        }
      }
    }
  }
  out.matrix.makeCompressed();
  return out;
}

}  // namespace a2ilu
