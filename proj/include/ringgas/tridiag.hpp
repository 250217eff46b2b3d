#pragma once
// ============================================================================
// Symmetric tridiagonal eigensolver: Sturm-count bisection for eigenvalues
// (all, by index range, or by value window) and inverse iteration for
// eigenvectors.  Both are O(n) per eigenpair, which is what makes spectra
// with n ~ 10^5..10^6 rows affordable on one core; dense QL would cost
// O(n^3) for the same job.
//
// The Sturm count uses the standard LDL^T recurrence with a pivot floor, so
// it is robust at shift values equal to eigenvalues.  Inverse iteration
// factors (T - lambda I) with partial pivoting and reorthogonalises vectors
// whose eigenvalues lie closer than 1e-6 * ||T|| to each other (isolated
// eigenvalues come out orthogonal automatically, to ~eps ||T|| / gap).
// ============================================================================

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "ringgas/common.hpp"
#include "ringgas/hamiltonian.hpp"

namespace ringgas {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

namespace detail {

inline double tridiag_norm_inf(const VectorRef& diag, const VectorRef& off) {
  const Eigen::Index n = diag.size();
  double norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = std::abs(diag(i));
    if (i > 0) row += std::abs(off(i - 1));
    if (i + 1 < n) row += std::abs(off(i));
    norm = std::max(norm, row);
  }
  return norm;
}

inline double sturm_pivmin(const VectorRef& off) {
  const double safe_min = std::numeric_limits<double>::min();
  double max_off2 = 1.0;
  for (Eigen::Index i = 0; i < off.size(); ++i) {
    max_off2 = std::max(max_off2, off(i) * off(i));
  }
  return safe_min * max_off2;
}

}  // namespace detail

/* Number of eigenvalues of the tridiagonal (diag, off) strictly below x. */
inline Eigen::Index count_below(const VectorRef& diag, const VectorRef& off,
                                double x) {
  const Eigen::Index n = diag.size();
  RG_REQUIRE(off.size() == n - 1 || (n == 0 && off.size() == 0),
             "count_below: inconsistent sizes");
  const double pivmin = detail::sturm_pivmin(off);
  Eigen::Index count = 0;
  double d = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off2 = (i > 0) ? off(i - 1) * off(i - 1) : 0.0;
    d = diag(i) - x - off2 / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

/* Eigenvalues with 0-based indices i0..i1 (inclusive, ascending). */
inline Eigen::VectorXd tridiag_eigenvalues_by_index(const VectorRef& diag,
                                                    const VectorRef& off,
                                                    Eigen::Index i0,
                                                    Eigen::Index i1) {
  const Eigen::Index n = diag.size();
  RG_REQUIRE(0 <= i0 && i0 <= i1 && i1 < n,
             "tridiag_eigenvalues_by_index: bad index range [", i0, ", ", i1,
             "] for dimension ", n);
  // Gershgorin enclosure
  double lo = diag(0), hi = diag(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off(i - 1));
    if (i + 1 < n) r += std::abs(off(i));
    lo = std::min(lo, diag(i) - r);
    hi = std::max(hi, diag(i) + r);
  }
  const double pivmin = detail::sturm_pivmin(off);
  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::VectorXd vals(i1 - i0 + 1);
  for (Eigen::Index k = i0; k <= i1; ++k) {
    double a = lo, b = hi;
    // invariant: count(a) <= k < count(b)
    for (int it = 0; it < 120; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;  // floating-point resolution reached
      if (count_below(diag, off, mid) <= k) {
        a = mid;
      } else {
        b = mid;
      }
      if (b - a <= 2.0 * eps * std::max(std::abs(a), std::abs(b)) + 2.0 * pivmin) {
        break;
      }
    }
    vals(k - i0) = 0.5 * (a + b);
  }
  return vals;
}

inline Eigen::VectorXd tridiag_eigenvalues(const VectorRef& diag,
                                           const VectorRef& off) {
  return tridiag_eigenvalues_by_index(diag, off, 0, diag.size() - 1);
}

/* All eigenvalues in the half-open window [lo, hi). */
inline Eigen::VectorXd tridiag_eigenvalues_in_range(const VectorRef& diag,
                                                    const VectorRef& off,
                                                    double lo, double hi) {
  RG_REQUIRE(lo <= hi, "tridiag_eigenvalues_in_range: lo > hi");
  const Eigen::Index k_lo = count_below(diag, off, lo);
  const Eigen::Index k_hi = count_below(diag, off, hi);
  if (k_lo == k_hi) return Eigen::VectorXd();
  return tridiag_eigenvalues_by_index(diag, off, k_lo, k_hi - 1);
}

/* Inverse-iteration eigenvectors for the given (ascending) eigenvalues.
 * Column j of the result belongs to vals(j). */
inline Eigen::MatrixXd tridiag_eigenvectors(const VectorRef& diag,
                                            const VectorRef& off,
                                            const VectorRef& vals) {
  const Eigen::Index n = diag.size();
  const Eigen::Index m = vals.size();
  const double norm = detail::tridiag_norm_inf(diag, off);
  const double eps = std::numeric_limits<double>::epsilon();
  const double cluster_gap = 1e-6 * std::max(norm, 1.0);
  Eigen::MatrixXd vecs(n, m);

  // partial-pivoting LU work arrays for (T - lambda I)
  Eigen::VectorXd u0(n), u1(std::max<Eigen::Index>(n - 1, 0)),
      u2(std::max<Eigen::Index>(n - 2, 0)), lmul(std::max<Eigen::Index>(n - 1, 0));
  std::vector<bool> swapped(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)));
  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  Eigen::Index cluster_start = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (j > 0) {
      RG_REQUIRE(vals(j) >= vals(j - 1), "tridiag_eigenvectors: eigenvalues "
                                         "must be ascending");
      if (vals(j) - vals(j - 1) > cluster_gap) cluster_start = j;
    }
    const double lambda = vals(j);

    // factor T - lambda I  (rows may be swapped with the one below)
    for (Eigen::Index i = 0; i < n; ++i) u0(i) = diag(i) - lambda;
    if (n > 1) {
      u1.setZero();
      u2.setZero();
      for (Eigen::Index i = 0; i < n - 1; ++i) u1(i) = off(i);
      for (Eigen::Index i = 0; i < n - 1; ++i) {
        const double sub = off(i);
        if (std::abs(u0(i)) >= std::abs(sub)) {
          swapped[static_cast<std::size_t>(i)] = false;
          double piv = u0(i);
          if (piv == 0.0) piv = eps * norm;
          const double l = sub / piv;
          lmul(i) = l;
          u0(i) = piv;
          u0(i + 1) -= l * u1(i);
          // u2 untouched (zero fill-in without swap)
        } else {
          swapped[static_cast<std::size_t>(i)] = true;
          const double l = u0(i) / sub;
          lmul(i) = l;
          // swapped row i holds (sub, u0(i+1), next off)
          const double r1 = u0(i + 1);
          const double r2 = (i + 2 < n) ? off(i + 1) : 0.0;
          u0(i) = sub;
          const double old_u1 = u1(i);
          u1(i) = r1;
          if (i + 2 < n) u2(i) = r2;
          u0(i + 1) = old_u1 - l * r1;
          // the swapped-down row had nothing at column i+2
          if (i + 2 < n) u1(i + 1) = -l * r2;
        }
      }
      if (u0(n - 1) == 0.0) u0(n - 1) = eps * norm;
    } else if (u0(0) == 0.0) {
      u0(0) = eps * norm;
    }

    auto solve_inplace = [&](Eigen::VectorXd& x) {
      // forward: apply L^{-1} with the recorded row swaps
      for (Eigen::Index i = 0; i < n - 1; ++i) {
        if (swapped[static_cast<std::size_t>(i)]) std::swap(x(i), x(i + 1));
        x(i + 1) -= lmul(i) * x(i);
      }
      // back substitution with three bands
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = x(i);
        if (i + 1 < n) s -= u1(i) * x(i + 1);
        if (i + 2 < n) s -= u2(i) * x(i + 2);
        x(i) = s / u0(i);
      }
    };

    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = uni(rng);
    x.normalize();
    bool ok = false;
    for (int iter = 0; iter < 8 && !ok; ++iter) {
      solve_inplace(x);
      // reorthogonalise inside the cluster
      for (Eigen::Index p = cluster_start; p < j; ++p) {
        x -= vecs.col(p).dot(x) * vecs.col(p);
      }
      const double len = x.norm();
      RG_REQUIRE(len > 0.0, "tridiag_eigenvectors: breakdown at eigenvalue ",
                 lambda);
      x /= len;
      if (iter >= 1) {
        // residual check through the matvec
        double res = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          double r = (diag(i) - lambda) * x(i);
          if (i > 0) r += off(i - 1) * x(i - 1);
          if (i + 1 < n) r += off(i) * x(i + 1);
          res = std::max(res, std::abs(r));
        }
        ok = res <= 1e3 * eps * std::max(norm, 1.0) * std::sqrt(double(n));
      }
    }
    RG_REQUIRE(ok, "tridiag_eigenvectors: no convergence at eigenvalue ",
               lambda);
    // deterministic sign: largest-magnitude entry positive
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    if (x(imax) < 0.0) x = -x;
    vecs.col(j) = x;
  }
  return vecs;
}

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column i <-> values(i); 0x0 when not requested
};

inline EigenPairs eigen_decomposition(const TridiagonalHamiltonian& h,
                                      bool with_vectors) {
  EigenPairs out;
  out.values = tridiag_eigenvalues(h.diag, h.off);
  if (with_vectors) {
    out.vectors = tridiag_eigenvectors(h.diag, h.off, out.values);
  }
  return out;
}

}  // namespace ringgas
