#pragma once
// ============================================================================
// Sector Hamiltonians.
//
// H = sum_k k^2 n_k - (g/4) sum_{k1+k2=k3+k4} a+_{k1} a+_{k2} a_{k3} a_{k4},
// restricted to |k| <= mode cutoff, conserves particle number N and total
// momentum K, so it is built per (N, K) sector.
//
// Two storage schemes:
//  * TridiagonalHamiltonian -- the (N, K=0) sector of the 3-mode model,
//    where basis states are pair states |m, N-2m, m> and the interaction
//    couples only neighbouring pair counts:
//       diag(m) = 2m - (g/4) [ n0(n0-1) + 2m(m-1) + 8 m n0 + 4 m^2 ],
//       off(m)  = -(g/2) (m+1) sqrt( (N-2m)(N-2m-1) ),      n0 = N - 2m.
//  * SparseHamiltonian -- any cutoff and momentum, built by direct quartet
//    enumeration over the sector basis.
// ============================================================================

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "ringgas/common.hpp"
#include "ringgas/model.hpp"

namespace ringgas {

struct TridiagonalHamiltonian {
  Eigen::VectorXd diag;  // dim entries
  Eigen::VectorXd off;   // dim - 1 entries, sub/super diagonal

  Eigen::Index dim() const { return diag.size(); }

  /* y = H x; works for real and complex vectors. */
  template <class VecIn, class VecOut>
  void multiply(const VecIn& x, VecOut& y) const {
    const Eigen::Index n = dim();
    RG_REQUIRE(x.size() == n, "TridiagonalHamiltonian: size mismatch");
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto acc = diag(i) * x(i);
      if (i > 0) acc += off(i - 1) * x(i - 1);
      if (i + 1 < n) acc += off(i) * x(i + 1);
      y(i) = acc;
    }
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      h(i, i) = diag(i);
      if (i + 1 < dim()) h(i, i + 1) = h(i + 1, i) = off(i);
    }
    return h;
  }
};

/* 3-mode, K = 0 sector; index i is the pair count m. */
inline TridiagonalHamiltonian tridiagonal_hamiltonian(const ModelParams& params) {
  RG_REQUIRE(params.mode_cutoff == 1,
             "tridiagonal_hamiltonian: only the 3-mode model is tridiagonal");
  const std::int64_t n = params.n_particles;
  const double g = params.coupling_bare;
  const Eigen::Index dim = static_cast<Eigen::Index>(n / 2) + 1;
  TridiagonalHamiltonian h;
  h.diag.resize(dim);
  h.off.resize(dim - 1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double m = static_cast<double>(i);
    const double n0 = static_cast<double>(n) - 2.0 * m;
    h.diag(i) = 2.0 * m - 0.25 * g * (n0 * (n0 - 1.0) + 2.0 * m * (m - 1.0) +
                                      8.0 * m * n0 + 4.0 * m * m);
    if (i + 1 < dim) {
      h.off(i) = -0.5 * g * (m + 1.0) * std::sqrt(n0 * (n0 - 1.0));
    }
  }
  return h;
}

struct SparseHamiltonian {
  FockBasis basis;
  Eigen::SparseMatrix<double> matrix;  // full symmetric matrix

  Eigen::Index dim() const { return matrix.rows(); }

  void multiply(const Eigen::Ref<const Eigen::VectorXd>& x,
                Eigen::VectorXd& y) const {
    y.noalias() = matrix * x;
  }
  void multiply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    y.resize(x.size());
    y.real() = matrix * x.real();
    y.imag() = matrix * x.imag();
  }
};

/* Quartet-enumeration build of the (N, K) sector for either cutoff.  Every
 * ordered quadruple (k1, k2, k3, k4) with k1 + k2 = k3 + k4 contributes
 * -g/4; momentum conservation keeps every image state inside the sector
 * basis, which is asserted. */
inline SparseHamiltonian sparse_hamiltonian(const ModelParams& params,
                                            std::int64_t momentum) {
  SparseHamiltonian out{build_basis(params, momentum), {}};
  const FockBasis& basis = out.basis;
  const int kmax = params.mode_cutoff;
  const int modes = params.n_modes();
  const double g = params.coupling_bare;
  const Eigen::Index dim = basis.dim();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(dim) * (kmax == 1 ? 8 : 24));
  std::vector<std::int64_t> occ(static_cast<std::size_t>(modes));

  for (Eigen::Index col = 0; col < dim; ++col) {
    // kinetic term
    double kin = 0.0;
    for (int k = -kmax; k <= kmax; ++k) {
      kin += static_cast<double>(k) * static_cast<double>(k) *
             static_cast<double>(basis.occ(col, k));
    }
    if (kin != 0.0) trip.emplace_back(col, col, kin);
    if (g == 0.0) continue;

    // interaction quartets: annihilate k4 then k3, create k2 then k1
    for (int k4 = -kmax; k4 <= kmax; ++k4) {
      if (basis.occ(col, k4) == 0) continue;
      for (int k3 = -kmax; k3 <= kmax; ++k3) {
        for (int k1 = -kmax; k1 <= kmax; ++k1) {
          const int k2 = k3 + k4 - k1;
          if (k2 < -kmax || k2 > kmax) continue;
          for (int j = 0; j < modes; ++j) occ[j] = basis.occ(col, j - kmax);
          double amp = 1.0;
          amp *= static_cast<double>(occ[k4 + kmax]);
          occ[k4 + kmax] -= 1;
          amp *= static_cast<double>(occ[k3 + kmax]);
          occ[k3 + kmax] -= 1;
          if (amp == 0.0) continue;
          occ[k2 + kmax] += 1;
          amp *= static_cast<double>(occ[k2 + kmax]);
          occ[k1 + kmax] += 1;
          amp *= static_cast<double>(occ[k1 + kmax]);
          const Eigen::Index row = basis.index_of(occ.data());
          RG_REQUIRE(row >= 0, "sparse_hamiltonian: quartet left the sector");
          trip.emplace_back(row, col, -0.25 * g * std::sqrt(amp));
        }
      }
    }
  }

  out.matrix.resize(dim, dim);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

}  // namespace ringgas
