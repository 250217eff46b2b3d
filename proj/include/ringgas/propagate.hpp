#pragma once
// ============================================================================
// Time evolution  psi(t) = exp(-i H t) psi(0)  under a real symmetric sector
// Hamiltonian, two ways:
//
//  * SpectralPropagator -- exact synthesis V exp(-i Lambda t) V^T psi from a
//    full eigendecomposition.  Costly setup, then O(dim^2) per sample with
//    no time-stepping error; the right tool when many samples share one H.
//    The eigenbasis is real, so each application is four real mat-vecs.
//
//  * krylov_propagate -- short-iterative Lanczos: project H onto the Krylov
//    space of psi, exponentiate the small tridiagonal projection exactly,
//    substep adaptively until the target time is covered.  Linear memory,
//    from-scratch cost per target time; the right tool for a few samples of
//    a large sparse H, and an independent cross-check of the spectral route.
//
// Both conserve the norm and the energy to machine precision; tests pin
// those invariants.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "ringgas/common.hpp"
#include "ringgas/hamiltonian.hpp"
#include "ringgas/tridiag.hpp"

namespace ringgas {

class SpectralPropagator {
 public:
  SpectralPropagator(Eigen::VectorXd values, Eigen::MatrixXd vectors)
      : values_(std::move(values)), vectors_(std::move(vectors)) {
    RG_REQUIRE(values_.size() > 0, "SpectralPropagator: empty spectrum");
    RG_REQUIRE(vectors_.rows() == values_.size() &&
                   vectors_.cols() == values_.size(),
               "SpectralPropagator: needs the full eigenvector matrix, got ",
               vectors_.rows(), "x", vectors_.cols(), " for ", values_.size(),
               " values");
  }

  explicit SpectralPropagator(EigenPairs pairs)
      : SpectralPropagator(std::move(pairs.values), std::move(pairs.vectors)) {}

  explicit SpectralPropagator(const TridiagonalHamiltonian& h)
      : SpectralPropagator(eigen_decomposition(h, true)) {}

  Eigen::Index dim() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  /* psi(t) = V diag(exp(-i E t)) V^T psi.  Real V: the complex rotation is
   * carried by the phase factors alone. */
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const {
    RG_REQUIRE(psi.size() == dim(), "SpectralPropagator::apply: state size ",
               psi.size(), " != ", dim());
    Eigen::VectorXd cr = vectors_.transpose() * psi.real();
    Eigen::VectorXd ci = vectors_.transpose() * psi.imag();
    const Eigen::ArrayXd c = (values_.array() * t).cos();
    const Eigen::ArrayXd s = (values_.array() * t).sin();
    // (cr + i ci) (cos - i sin)
    const Eigen::VectorXd dr = cr.array() * c + ci.array() * s;
    const Eigen::VectorXd di = ci.array() * c - cr.array() * s;
    Eigen::VectorXcd out(dim());
    out.real() = vectors_ * dr;
    out.imag() = vectors_ * di;
    return out;
  }

  Eigen::VectorXcd apply(const Eigen::VectorXd& psi, double t) const {
    return apply(Eigen::VectorXcd(psi.cast<std::complex<double>>()), t);
  }

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

struct KrylovOptions {
  double tolerance = 1e-12;     // total error budget relative to ||psi||
  Eigen::Index max_basis = 40;  // Lanczos vectors per substep
  int max_retries = 40;         // step-size reductions before giving up
};

/* exp(-i H t) psi by adaptive short-iterative Lanczos.  `h` needs a
 * .multiply(const VectorXcd&, VectorXcd&) mat-vec and a .dim(); H must be
 * real symmetric (the Krylov projection is then real tridiagonal, built with
 * full reorthogonalisation).  Negative t runs the evolution backwards.
 * Throws on failure to meet the error budget; never weakens it silently. */
template <class Op>
Eigen::VectorXcd krylov_propagate(const Op& h, const Eigen::VectorXcd& psi,
                                  double t, const KrylovOptions& opt = {}) {
  const Eigen::Index dim = psi.size();
  RG_REQUIRE(dim == h.dim(), "krylov_propagate: state size ", psi.size(),
             " != operator dimension ", h.dim());
  RG_REQUIRE(opt.max_basis >= 2, "krylov_propagate: max_basis must be >= 2");
  RG_REQUIRE(opt.tolerance > 0.0, "krylov_propagate: tolerance must be > 0");

  const double norm0 = psi.norm();
  if (t == 0.0 || norm0 == 0.0) return psi;

  const double direction = t > 0.0 ? 1.0 : -1.0;
  const double t_total = std::abs(t);
  const double budget_rate = opt.tolerance * norm0 / t_total;  // per unit time

  Eigen::VectorXcd state = psi;
  const Eigen::Index m_cap = std::min<Eigen::Index>(opt.max_basis, dim);
  Eigen::MatrixXcd basis(dim, m_cap);
  Eigen::VectorXd alpha(m_cap), beta(m_cap);
  Eigen::VectorXcd w(dim);

  double done = 0.0;
  while (done < t_total) {
    const double remaining = t_total - done;
    const double norm = state.norm();

    // --- Lanczos sweep from the current state ------------------------------
    basis.col(0) = state / norm;
    double scale = 0.0;
    Eigen::Index m = 0;
    bool exhausted = false;  // Krylov space is H-invariant: projection exact
    while (m < m_cap) {
      h.multiply(basis.col(m), w);
      const double a = basis.col(m).dot(w).real();
      alpha(m) = a;
      scale = std::max({scale, std::abs(a), w.norm()});
      w -= a * basis.col(m);
      if (m >= 1) w -= beta(m - 1) * basis.col(m - 1);
      // one extra orthogonalisation pass keeps the basis clean
      auto v = basis.leftCols(m + 1);
      w.noalias() -= v * (v.adjoint() * w);
      ++m;
      const double b = w.norm();
      if (b <= 1e-12 * scale || m == dim) {
        exhausted = true;
        beta(m - 1) = 0.0;
        break;
      }
      if (m == m_cap) {
        beta(m - 1) = b;  // residual coupling, drives the error estimate
        break;
      }
      beta(m - 1) = b;
      basis.col(m) = w / b;
    }

    // --- exact exponential of the projection -------------------------------
    const Eigen::VectorXd ritz =
        tridiag_eigenvalues(alpha.head(m), beta.head(m - 1));
    const Eigen::MatrixXd s =
        tridiag_eigenvectors(alpha.head(m), beta.head(m - 1), ritz);
    const Eigen::VectorXd weights = s.row(0).transpose();  // S^T e_1

    double tau = remaining;
    Eigen::VectorXcd u(m);
    for (int attempt = 0;; ++attempt) {
      const Eigen::ArrayXd phase = ritz.array() * (direction * tau);
      u = (s * (phase.cos() * weights.array()).matrix())
              .cast<std::complex<double>>();
      u.imag() = -(s * (phase.sin() * weights.array()).matrix());
      // Residual-coupling error estimate for this substep (exact when the
      // Krylov space closed on itself).  The estimate is itself synthesised
      // in floating point, so acceptance has a roundoff floor: demanding
      // less than ~eps of the state norm per substep is meaningless.
      const double err = exhausted ? 0.0 : beta(m - 1) * std::abs(u(m - 1));
      const double floor =
          32.0 * std::numeric_limits<double>::epsilon() * norm;
      if (err * norm <= std::max(budget_rate * tau, floor) || exhausted) break;
      RG_REQUIRE(attempt < opt.max_retries,
                 "krylov_propagate: step control failed to meet the error "
                 "budget at t = ",
                 direction * done, " (step ", tau, ", estimate ", err * norm,
                 ")");
      const double shrink =
          0.9 * std::pow(budget_rate * tau / (err * norm),
                         1.0 / static_cast<double>(m));
      tau *= std::min(0.7, shrink);
      RG_REQUIRE(tau >= 1e-12 * t_total,
                 "krylov_propagate: substep collapsed at t = ",
                 direction * done);
    }

    state.noalias() = basis.leftCols(m) * (norm * u);
    done += tau;
  }
  return state;
}

}  // namespace ringgas
