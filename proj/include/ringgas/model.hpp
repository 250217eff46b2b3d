#pragma once

/* Truncated momentum-mode model of attractive bosons on a unit ring.
 *
 * The retained modes are k = -mode_cutoff .. +mode_cutoff and the Hamiltonian is
 *
 *   H = sum_k k^2 a_k^dag a_k
 *       - (g/4) sum_{k1+k2=k3+k4} a_{k1}^dag a_{k2}^dag a_{k3} a_{k4},
 *
 * with bare coupling g >= 0 and every quartet of mode indices that conserves
 * momentum counted once (ordered tuples). The -g/4 prefactor follows from the
 * ring contact interaction
 *
 *   -(pi g / 2) \int_0^{2pi} dtheta  psi^dag psi^dag psi psi,
 *   psi(theta) = (2pi)^{-1/2} sum_k a_k e^{i k theta}:
 *
 * the integral produces a factor 2pi * (2pi)^{-2} = (2pi)^{-1} in front of the
 * momentum-conserving quartet sum, and -(pi g/2) * (2pi)^{-1} = -g/4.
 *
 * Both N = sum_k n_k and K = sum_k k n_k commute with H, so all computations
 * run inside one (N, K) sector. The semiclassical treatment works with the
 * particle scale n_tilde = N + 3/2 (three half-quanta from symmetric ordering
 * of the three k = 0, +-1 modes) and the scaled coupling alpha = g * n_tilde;
 * the critical point of the infinite-N model sits at alpha = 1.
 */

#include <cstdint>
#include <optional>
#include <ostream>
#include <unordered_map>

#include <Eigen/Dense>

#include "ringgas/common.hpp"

namespace ringgas {

struct ModelParams {
  std::int64_t n_particles = 1;
  double coupling_bare = 0.0;  // g >= 0
  int mode_cutoff = 1;         // 1 -> 3 modes, 2 -> 5 modes
  double n_tilde = 2.5;        // N + 3/2 unless explicitly overridden

  ModelParams() = default;

  ModelParams(std::int64_t n, double bare, int cutoff = 1,
              std::optional<double> n_tilde_override = std::nullopt)
      : n_particles(n), coupling_bare(bare), mode_cutoff(cutoff) {
    RG_REQUIRE(n >= 1, "ModelParams: need at least one particle, got ", n);
    RG_REQUIRE(bare >= 0.0, "ModelParams: coupling must be >= 0, got ", bare);
    RG_REQUIRE(cutoff == 1 || cutoff == 2,
               "ModelParams: mode cutoff must be 1 or 2, got ", cutoff);
    n_tilde = n_tilde_override ? *n_tilde_override
                               : static_cast<double>(n) + 1.5;
    RG_REQUIRE(n_tilde > 0.0, "ModelParams: n_tilde must be positive");
  }

  /* Fix the scaled coupling alpha = g * n_tilde instead of g itself. */
  static ModelParams from_scaled(std::int64_t n, double alpha, int cutoff = 1,
                                 std::optional<double> n_tilde_override = std::nullopt) {
    ModelParams p(n, 0.0, cutoff, n_tilde_override);
    RG_REQUIRE(alpha >= 0.0, "ModelParams: alpha must be >= 0, got ", alpha);
    p.coupling_bare = alpha / p.n_tilde;
    return p;
  }

  double scaled_coupling() const { return coupling_bare * n_tilde; }
  int n_modes() const { return 2 * mode_cutoff + 1; }
};

struct FockState {
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> occ;  // entry i <-> mode k = i - mode_cutoff
  int mode_cutoff = 1;

  std::int64_t n(int k) const { return occ(k + mode_cutoff); }

  std::int64_t particles() const { return occ.sum(); }

  std::int64_t momentum() const {
    std::int64_t s = 0;
    for (int k = -mode_cutoff; k <= mode_cutoff; ++k) s += k * n(k);
    return s;
  }
};

/* Occupation basis of one (N, K) sector, ordered lexicographically in the
 * occupation vector read from k = -mode_cutoff upward. For the 3-mode K = 0
 * sector the states are (m, N-2m, m), so the basis index equals the number of
 * +-1 pairs m and the dimension is floor(N/2) + 1. */
class FockBasis {
 public:
  /* Row-major so one basis state occupies contiguous storage. */
  using OccMatrix =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FockBasis(const ModelParams& params, std::int64_t momentum)
      : n_particles_(params.n_particles),
        momentum_(momentum),
        mode_cutoff_(params.mode_cutoff) {
    enumerate();
    RG_REQUIRE(occ_.rows() > 0, "FockBasis: sector N=", n_particles_, " K=",
               momentum_, " k_max=", mode_cutoff_, " is empty");
    index_.reserve(static_cast<std::size_t>(occ_.rows()));
    for (Eigen::Index i = 0; i < occ_.rows(); ++i)
      index_.emplace(pack(occ_.row(i).data()), i);
  }

  Eigen::Index dim() const { return occ_.rows(); }
  std::int64_t n_particles() const { return n_particles_; }
  std::int64_t momentum() const { return momentum_; }
  int mode_cutoff() const { return mode_cutoff_; }
  int n_modes() const { return 2 * mode_cutoff_ + 1; }

  /* Occupation of mode k in basis state i. */
  std::int64_t occ(Eigen::Index i, int k) const {
    return occ_(i, k + mode_cutoff_);
  }

  const OccMatrix& occupations() const { return occ_; }

  FockState state(Eigen::Index i) const {
    FockState s;
    s.occ = occ_.row(i).transpose().array();
    s.mode_cutoff = mode_cutoff_;
    return s;
  }

  /* Index of the state with the given occupations (array over modes ordered
   * from k = -mode_cutoff), or -1 when it lies outside this sector. */
  Eigen::Index index_of(const std::int64_t* occ) const {
    for (int j = 0; j < n_modes(); ++j)
      if (occ[j] < 0) return -1;
    auto it = index_.find(pack(occ));
    return it == index_.end() ? -1 : it->second;
  }

  /* k = 0 occupations of every basis state, as doubles (diagonal of n_0). */
  Eigen::VectorXd mode0_occupations() const {
    return occ_.col(mode_cutoff_).cast<double>();
  }

  void dump_csv(std::ostream& os) const {
    os << "index";
    for (int k = -mode_cutoff_; k <= mode_cutoff_; ++k) os << ",n[" << k << "]";
    os << "\n";
    for (Eigen::Index i = 0; i < dim(); ++i) {
      os << i;
      for (int j = 0; j < n_modes(); ++j) os << "," << occ_(i, j);
      os << "\n";
    }
  }

 private:
  /* Pack an occupation vector into one 64-bit key. 21 bits per mode for the
   * 3-mode model (N < 2^21), 12 bits per mode for the 5-mode model. */
  int pack_bits() const { return mode_cutoff_ == 1 ? 21 : 12; }

  std::uint64_t pack(const std::int64_t* occ) const {
    const int bits = pack_bits();
    std::uint64_t key = 0;
    for (int j = 0; j < n_modes(); ++j) {
      key = (key << bits) | static_cast<std::uint64_t>(occ[j]);
    }
    return key;
  }

  void enumerate() {
    const std::int64_t limit = std::int64_t{1} << pack_bits();
    RG_REQUIRE(n_particles_ < limit, "FockBasis: N=", n_particles_,
               " exceeds the supported range for k_max=", mode_cutoff_);

    const int modes = n_modes();
    const int kmax = mode_cutoff_;
    std::vector<std::array<std::int64_t, 5>> rows;
    std::array<std::int64_t, 5> cur{};

    /* Loop over the occupations of all modes except the last two; those are
     * then fixed by the particle-number and momentum constraints:
     *   n_{kmax-1} + n_{kmax} = R,  (kmax-1) n_{kmax-1} + kmax n_{kmax} = S
     * has the unique solution n_{kmax} = S - (kmax-1) R. Ascending loops give
     * lexicographic order directly. */
    auto place = [&](auto&& self, int j, std::int64_t n_rem,
                     std::int64_t k_rem) -> void {
      if (j == modes - 2) {
        const std::int64_t n_top = k_rem - (kmax - 1) * n_rem;
        const std::int64_t n_next = n_rem - n_top;
        if (n_top < 0 || n_next < 0) return;
        cur[static_cast<std::size_t>(modes - 2)] = n_next;
        cur[static_cast<std::size_t>(modes - 1)] = n_top;
        rows.push_back(cur);
        return;
      }
      const int k = j - kmax;
      for (std::int64_t n = 0; n <= n_rem; ++n) {
        const std::int64_t nr = n_rem - n;
        const std::int64_t kr = k_rem - k * n;
        /* Remaining modes k+1..kmax bound the reachable momentum. */
        if (kr < (k + 1) * nr || kr > kmax * nr) continue;
        cur[static_cast<std::size_t>(j)] = n;
        self(self, j + 1, nr, kr);
      }
    };
    place(place, 0, n_particles_, momentum_);

    occ_.resize(static_cast<Eigen::Index>(rows.size()), modes);
    for (Eigen::Index i = 0; i < occ_.rows(); ++i)
      for (int j = 0; j < modes; ++j)
        occ_(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  std::int64_t n_particles_;
  std::int64_t momentum_;
  int mode_cutoff_;
  OccMatrix occ_;
  std::unordered_map<std::uint64_t, Eigen::Index> index_;
};

inline FockBasis build_basis(const ModelParams& params, std::int64_t momentum) {
  return FockBasis(params, momentum);
}

}  // namespace ringgas
