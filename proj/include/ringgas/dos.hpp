#pragma once
/* Near-separatrix level statistics of the three-mode ring model.
 *
 * For alpha > 1 the reduced phase space carries a separatrix at omega = 0
 * joining the two hyperbolic points at phi = +-acos(1/sqrt(alpha)).  A
 * circulating orbit passes both of them once per period, so the period
 * diverges as (1/lambda) log(1/|omega|) with
 *
 *     lambda = sqrt(alpha - 1),
 *
 * half the single-point repulsion rate 2*sqrt(alpha - 1) that governs the
 * early-time dynamics (see stability_exponent in classical.hpp; the factor
 * of two between the two constants is deliberate and load-bearing).  Through
 * T = 2*pi * d(action)/d(omega) the mean density of states per unit energy
 * inherits a logarithmic divergence at the separatrix energy,
 *
 *     rho(E) = -(1/(2 pi lambda)) log(|E - E_sep| / N~) + O(1),
 *
 * and its integral from E_sep, the expected number of levels within x of the
 * separatrix on one side, is
 *
 *     Phi(x) = (1/(2 pi lambda)) x (1 + log(N~ / x)).
 *
 * Around E_sep a group of ~log N~ levels becomes asymptotically equidistant
 * with spacing delta_E = 2*pi/tau, where tau = (1/lambda) log N~ is the
 * characteristic traversal time of the separatrix region.  The O(1) pieces
 * of rho and tau depend on the flow away from the hyperbolic points; they
 * are exposed as explicit offset parameters and never hard-coded.
 *
 * The ladder builder returns the 2*window + 1 levels nearest E_sep via one
 * of two routes:
 *   - quadrature: the physical torus-quantized levels, root-solved from the
 *     action integral around the separatrix action a_sep;
 *   - asymptotic: the symmetric idealization with one level pinned at E_sep
 *     and the |k|-th neighbour at Phi(x) = |k| on either side.
 * The physical ladder is a uniform grid in action crossing a_sep with an
 * arbitrary fractional phase; the idealization fixes that phase so the
 * sequence is exactly k -> -k symmetric.  Level positions relative to E_sep
 * therefore differ between the routes by up to half a spacing, while the
 * spacing sequences agree; compare spacings, not levels.  The quadrature
 * route degrades once an orbit sits at |omega| < 1e-8 (the action offset
 * from a_sep falls below quadrature resolution) and the builder then
 * switches to the asymptotic inversion, which is also the only route left
 * when N~ is too large for level indices to be representable in doubles. */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ringgas/action.hpp"
#include "ringgas/classical.hpp"
#include "ringgas/ebk.hpp"
#include "ringgas/common.hpp"
#include "ringgas/fit.hpp"
#include "ringgas/model.hpp"

namespace ringgas {

/* Decay/bunching rate entering the near-separatrix DOS and the log time. */
inline double dos_lambda(double alpha) {
  RG_REQUIRE(alpha > 1.0, "dos_lambda: requires alpha > 1, got ", alpha);
  return std::sqrt(alpha - 1.0);
}

/* Mean density of states per unit energy near E_sep.  The undetermined O(1)
 * constant is the caller-supplied `offset` (default 0).  Returns +infinity
 * exactly at E = E_sep. */
inline double dos_asymptotic(double energy, double alpha,
                             const ModelParams& params, double offset = 0.0) {
  const double lambda = dos_lambda(alpha);
  const double e_sep = separatrix_energy(alpha, params).energy;
  const double x = std::abs(energy - e_sep);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  constexpr double two_pi = 6.283185307179586476925286766559;
  return -std::log(x / params.n_tilde) / (two_pi * lambda) + offset;
}

struct LogTime {
  double tau = 0.0;      // traversal (log) time
  double delta_e = 0.0;  // limiting level spacing 2*pi/tau
};

/* tau = (1/lambda) log N~ + offset and the associated spacing 2*pi/tau. */
inline LogTime log_time(double alpha, const ModelParams& params,
                        double offset = 0.0) {
  const double lambda = dos_lambda(alpha);
  const double tau = std::log(params.n_tilde) / lambda + offset;
  RG_REQUIRE(tau > 0.0, "log_time: offset ", offset,
             " drives the time scale nonpositive (tau = ", tau, ")");
  constexpr double two_pi = 6.283185307179586476925286766559;
  return LogTime{tau, two_pi / tau};
}

namespace detail {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/* Expected number of levels between E_sep and E_sep + x (one side). */
inline double integrated_dos(double x, double lambda, double n_tilde) {
  RG_REQUIRE(x >= 0.0, "integrated_dos: negative offset ", x);
  if (x == 0.0) return 0.0;
  return x * (1.0 + std::log(n_tilde / x)) / (kTwoPi * lambda);
}

/* Inverse of integrated_dos on its increasing branch (x < N~). */
inline double invert_integrated_dos(double count, double lambda,
                                    double n_tilde) {
  RG_REQUIRE(count > 0.0, "invert_integrated_dos: count must be positive");
  const auto f = [=](double x) {
    return integrated_dos(x, lambda, n_tilde) - count;
  };
  // Phi(x) >= x/(2 pi lambda) for x <= n_tilde, so the solution is bracketed
  // by [0, 2 pi lambda count]; grow the lower end from a safe underestimate.
  double hi = kTwoPi * lambda * count;
  RG_REQUIRE(hi < n_tilde, "invert_integrated_dos: count ", count,
             " beyond the near-separatrix regime for n_tilde = ", n_tilde);
  double lo = hi / (1.0 + std::log(n_tilde / hi));
  double f_lo = f(lo);
  while (f_lo > 0.0) {  // loose estimate; back off geometrically
    lo *= 0.5;
    RG_REQUIRE(lo > 1e-300, "invert_integrated_dos: bracketing failed");
    f_lo = f(lo);
  }
  const double f_hi = f(hi);
  if (f_hi <= 0.0) return hi;  // count == Phi(hi) to roundoff
  return brent_root(f, lo, hi, f_lo, f_hi, 1e-15 * hi);
}

}  // namespace detail

enum class LadderRoute { Quadrature, AsymptoticDos };

inline const char* ladder_route_name(LadderRoute r) {
  return r == LadderRoute::Quadrature ? "quadrature" : "asymptotic";
}

struct SeparatrixLadder {
  double alpha = 0.0;
  double n_tilde = 0.0;
  double lambda = 0.0;  // sqrt(alpha - 1)
  double e_sep = 0.0;
  double tau = 0.0;           // zero-offset log time
  double delta_e_limit = 0.0; // asymptotic spacing 2*pi/tau
  int window = 0;
  LadderRoute route = LadderRoute::Quadrature;

  /* Levels are stored relative to E_sep: offsets[i] = E_[i-window] - E_sep,
   * ascending, size 2*window + 1.  The absolute scale is ~ -alpha*N~/4 while
   * spacings shrink like 1/log N~, so for very large N~ the difference
   * E - E_sep is the only representation that keeps any resolution. */
  std::vector<double> offsets;

  /* E_[k] - E_sep by signed index k in [-window, window]; k = 0 is the level
   * nearest E_sep. */
  double offset(int k) const {
    RG_REQUIRE(k >= -window && k <= window, "SeparatrixLadder::offset: k=", k,
               " outside [-", window, ", ", window, "]");
    return offsets[static_cast<std::size_t>(k + window)];
  }

  /* Absolute level E_sep + offset(k).  Exact only while the offset survives
   * the addition; beyond n_tilde ~ 1e15 use offset() directly. */
  double level(int k) const { return e_sep + offset(k); }

  /* Spacing E_[k] - E_[k-1]; defined for k in (-window, window]. */
  double spacing(int k) const {
    RG_REQUIRE(k > -window && k <= window, "SeparatrixLadder::spacing: k=", k,
               " outside (-", window, ", ", window, "]");
    return offsets[static_cast<std::size_t>(k + window)] -
           offsets[static_cast<std::size_t>(k + window - 1)];
  }

  /* All 2*window spacings, ordered by k = -window+1 .. window. */
  std::vector<double> spacings() const {
    std::vector<double> out;
    out.reserve(offsets.size() - 1);
    for (std::size_t i = 1; i < offsets.size(); ++i) {
      out.push_back(offsets[i] - offsets[i - 1]);
    }
    return out;
  }
};

/* The 2*window + 1 levels nearest the separatrix energy.  Route selection is
 * automatic unless forced: physical quadrature levels while every orbit in
 * the window keeps |omega| >= 1e-8 and the level index N~*a_sep is exactly
 * representable, the symmetric asymptotic inversion otherwise.  Forcing the
 * quadrature route where it is unusable is an error. */
inline SeparatrixLadder separatrix_ladder(
    double alpha, const ModelParams& params, int window,
    std::optional<LadderRoute> force_route = std::nullopt,
    const QuadratureOptions& opt = {}) {
  RG_REQUIRE(alpha > 1.0, "separatrix_ladder: requires alpha > 1, got ",
             alpha);
  RG_REQUIRE(window >= 1, "separatrix_ladder: window must be >= 1, got ",
             window);

  SeparatrixLadder lad;
  lad.alpha = alpha;
  lad.n_tilde = params.n_tilde;
  lad.lambda = dos_lambda(alpha);
  lad.e_sep = separatrix_energy(alpha, params).energy;
  const LogTime lt = log_time(alpha, params);
  lad.tau = lt.tau;
  lad.delta_e_limit = lt.delta_e;
  lad.window = window;
  const std::size_t count = static_cast<std::size_t>(2 * window + 1);

  // Fractional level indices need ~window of slack below 2^53; beyond that
  // only the asymptotic construction is meaningful.
  bool use_asym = force_route ? (*force_route == LadderRoute::AsymptoticDos)
                              : (params.n_tilde > 1e14);

  if (!use_asym) {
    const double a_sep = separatrix_action(alpha, opt);
    const double pos = params.n_tilde * a_sep - 0.5;  // index coordinate of a_sep
    const double m_last = std::floor(pos);
    RG_REQUIRE(m_last >= 0.0,
               "separatrix_ladder: no quantized level below the separatrix at "
               "alpha=", alpha, ", n_tilde=", params.n_tilde);
    const double delta_below = pos - m_last;  // action distance, grid units
    const std::int64_t m0 =
        static_cast<std::int64_t>(m_last) + (delta_below <= 0.5 ? 0 : 1);
    RG_REQUIRE(m0 - window >= 0 && m0 + window <= params.n_particles / 2,
               "separatrix_ladder: window of ", window,
               " exceeds the available levels around the separatrix");

    std::vector<double> offsets;
    offsets.reserve(count);
    bool too_close = false;
    for (std::int64_t m = m0 - window; m <= m0 + window; ++m) {
      const double target = (static_cast<double>(m) + 0.5) / params.n_tilde;
      const double w = omega_at_action(target, alpha, opt);
      if (std::abs(w) < 1e-8) {
        too_close = true;
        break;
      }
      // E(omega) is linear in omega, so the distance from E_sep = E(0) is
      // exactly n_tilde * omega -- no cancellation against the bulk scale.
      offsets.push_back(params.n_tilde * w);
    }
    if (!too_close) {
      for (std::size_t i = 1; i < offsets.size(); ++i) {
        RG_REQUIRE(offsets[i] > offsets[i - 1],
                   "separatrix_ladder: quadrature levels out of order");
      }
      lad.route = LadderRoute::Quadrature;
      lad.offsets = std::move(offsets);
      return lad;
    }
    RG_REQUIRE(!force_route,
               "separatrix_ladder: quadrature route unusable, an orbit in the "
               "window sits at |omega| < 1e-8");
    use_asym = true;
  }

  // Symmetric asymptotic construction: level k at Phi(|E - E_sep|) = |k|.
  // The outermost level must stay well inside the classical band, where the
  // near-separatrix form of the DOS is the only thing we know.
  const double band =
      params.n_tilde * std::min(-omega_min(alpha), omega_max(alpha));
  lad.route = LadderRoute::AsymptoticDos;
  lad.offsets.assign(count, 0.0);
  for (int k = 1; k <= window; ++k) {
    const double x = detail::invert_integrated_dos(static_cast<double>(k),
                                                   lad.lambda, params.n_tilde);
    RG_REQUIRE(x <= 0.5 * band, "separatrix_ladder: window of ", window,
               " leaves the near-separatrix band (offset ", x, " vs band ",
               band, ")");
    lad.offsets[static_cast<std::size_t>(window + k)] = x;
    lad.offsets[static_cast<std::size_t>(window - k)] = -x;
  }
  return lad;
}

/* Lowest semiclassical excitation gap E_1 - E_0 at the given coupling. */
inline double semiclassical_gap(std::int64_t n, double alpha,
                                const QuadratureOptions& opt = {}) {
  const ModelParams params = ModelParams::from_scaled(n, alpha);
  return ebk_level(params, 1, opt).energy - ebk_level(params, 0, opt).energy;
}

struct GapScalingPoint {
  std::int64_t n = 0;
  double alpha_min = 0.0;  // coupling of the minimal gap
  double e_gap = 0.0;      // the minimal gap
};

struct GapScalingFit {
  std::vector<GapScalingPoint> points;
  double exponent_alpha = 0.0;  // d log(alpha_min - 1) / d log N
  double exponent_e = 0.0;      // d log(e_gap) / d log N
  double stderr_alpha = 0.0;
  double stderr_e = 0.0;
  double r_squared_alpha = 0.0;
  double r_squared_e = 0.0;
};

/* Location and size of the minimal gap for one particle number: the gap
 * E_1 - E_0 of the semiclassical spectrum is scanned over alpha_grid (which
 * must be sorted, all > 1) and the grid minimum refined by golden section
 * between its neighbours.  A minimum on the grid boundary is an error. */
inline GapScalingPoint gap_scaling_point(std::int64_t n,
                                         const std::vector<double>& grid,
                                         const QuadratureOptions& opt = {}) {
  RG_REQUIRE(grid.size() >= 3 && std::is_sorted(grid.begin(), grid.end()) &&
                 grid.front() > 1.0,
             "gap_scaling_point: need a sorted alpha grid above 1");
  const auto gap = [n, &opt](double alpha) {
    return semiclassical_gap(n, alpha, opt);
  };
  std::size_t best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double g = gap(grid[j]);
    if (g < best_gap) {
      best_gap = g;
      best = j;
    }
  }
  RG_REQUIRE(best > 0 && best + 1 < grid.size(),
             "gap_scaling_point: gap minimum for N=", n,
             " sits on the alpha-grid boundary; widen the grid");
  const double a = grid[best - 1];
  const double b = grid[best + 1];
  const double alpha_min = golden_minimize(gap, a, b, 1e-10 * std::max(1.0, b));
  return GapScalingPoint{n, alpha_min, gap(alpha_min)};
}

/* Log-log slopes of (alpha_min - 1) and E_gap against N from precomputed
 * per-size minima. */
inline GapScalingFit gap_scaling_fit(std::vector<GapScalingPoint> points) {
  RG_REQUIRE(points.size() >= 3, "gap_scaling_fit: need at least 3 points");
  GapScalingFit out;
  out.points = std::move(points);

  Eigen::VectorXd log_n(static_cast<Eigen::Index>(out.points.size()));
  Eigen::VectorXd log_da(log_n.size());
  Eigen::VectorXd log_gap(log_n.size());
  for (Eigen::Index i = 0; i < log_n.size(); ++i) {
    const GapScalingPoint& p = out.points[static_cast<std::size_t>(i)];
    RG_REQUIRE(p.alpha_min > 1.0, "gap_scaling_fit: minimum at alpha <= 1");
    log_n(i) = std::log(static_cast<double>(p.n));
    log_da(i) = std::log(p.alpha_min - 1.0);
    log_gap(i) = std::log(p.e_gap);
  }
  const LinearFit fa = linear_fit(log_n, log_da);
  const LinearFit fe = linear_fit(log_n, log_gap);
  out.exponent_alpha = fa.slope;
  out.stderr_alpha = fa.stderr_slope;
  out.r_squared_alpha = fa.r_squared;
  out.exponent_e = fe.slope;
  out.stderr_e = fe.stderr_slope;
  out.r_squared_e = fe.r_squared;
  return out;
}

/* Finite-size scaling of the minimal gap over a set of particle numbers. */
inline GapScalingFit gap_scaling_fit(const std::vector<double>& alpha_grid,
                                     const std::vector<std::int64_t>& n_grid,
                                     const QuadratureOptions& opt = {}) {
  RG_REQUIRE(alpha_grid.size() >= 3,
             "gap_scaling_fit: need at least 3 grid couplings, got ",
             alpha_grid.size());
  RG_REQUIRE(n_grid.size() >= 3,
             "gap_scaling_fit: need at least 3 particle numbers, got ",
             n_grid.size());
  std::vector<double> grid = alpha_grid;
  std::sort(grid.begin(), grid.end());
  const auto [n_lo, n_hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  RG_REQUIRE(*n_hi >= 100 * *n_lo,
             "gap_scaling_fit: N grid must span at least two decades");

  std::vector<GapScalingPoint> points;
  points.reserve(n_grid.size());
  for (const std::int64_t n : n_grid)
    points.push_back(gap_scaling_point(n, grid, opt));
  return gap_scaling_fit(std::move(points));
}

}  // namespace ringgas
