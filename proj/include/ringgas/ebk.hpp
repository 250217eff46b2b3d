#pragma once
// ============================================================================
// Semiclassical quantisation of the reduced phase space.
//
// Levels are labelled by the pair count m = 0 .. floor(N/2) and satisfy
//
//     a(omega_m) = (m + 1/2) / n_tilde,
//
// with a(omega) the orbit action of action.hpp.  Since a(omega_max) = 1/2
// and the largest target is (floor(N/2) + 1/2)/(N + 3/2) < 1/2, every level
// is solvable.  At alpha = 0 the action is omega/2, so omega_m =
// (2m + 1)/n_tilde and E = n_tilde * omega - 1 reproduces E_m = 2m exactly.
// Above the transition the targets below the separatrix action a_sep are
// island (vibration) levels and those above are rotation levels; the level
// density peaks logarithmically where the ladders meet.
// ============================================================================

#include <cmath>
#include <vector>

#include "ringgas/action.hpp"
#include "ringgas/classical.hpp"
#include "ringgas/common.hpp"
#include "ringgas/model.hpp"

namespace ringgas {

struct EbkLevel {
  long m = 0;                  // pair quantum number
  double action_target = 0.0;  // (m + 1/2) / n_tilde
  double omega = 0.0;          // root of a(omega) = action_target
  double energy = 0.0;         // spectrum energy at that omega
  OrbitClass orbit_class = OrbitClass::Rotation;
};

namespace detail {

// Classic Brent root finder on a bracketing interval [a, b].
template <class F>
double brent_root(const F& f, double a, double b, double fa, double fb,
                  double xtol) {
  RG_REQUIRE(fa * fb <= 0.0, "brent_root: interval [", a, ", ", b,
             "] does not bracket a root (f = ", fa, ", ", fb, ")");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  const double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 0; it < 200; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic interpolation (secant when only two points differ)
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw error(cat("brent_root: no convergence near x = ", b));
}

}  // namespace detail

/* Inverts the action: returns omega with a(omega) = target, 0 < target < 1/2.
 * For alpha > 1 the side of the separatrix is chosen by comparing the target
 * with a_sep.  Targets that land inside the unresolvable band |omega| below
 * twice the separatrix tolerance are pinned to the band edge. */
inline double omega_at_action(double target, double alpha,
                              const QuadratureOptions& opt = {}) {
  RG_REQUIRE(target > 0.0 && target < 0.5,
             "omega_at_action: target action ", target, " outside (0, 1/2)");
  const double xtol = 1e-14;
  const double tol = separatrix_tolerance(alpha);
  const auto f = [&](double w) {
    return action_integral(w, alpha, opt).action - target;
  };

  if (alpha > 1.0 && target < separatrix_action(alpha, opt)) {
    // island level
    const double bottom = omega_min(alpha);
    RG_REQUIRE(-bottom > 4.0 * tol,
               "omega_at_action: island at alpha=", alpha,
               " is too shallow to resolve");
    const double lo = bottom + std::max(1e-13, 1e-13 * -bottom);
    const double hi = -2.0 * tol;
    const double f_hi = f(hi);
    if (f_hi <= 0.0) return hi;  // pinned to the separatrix band edge
    return detail::brent_root(f, lo, hi, f(lo), f_hi, xtol);
  }

  // rotation level (the only kind for alpha <= 1)
  const double lo = 2.0 * tol;
  const double hi = omega_max(alpha);
  const double f_lo = f(lo);
  if (f_lo >= 0.0) return lo;  // pinned to the separatrix band edge
  return detail::brent_root(f, lo, hi, f_lo, f(hi), xtol);
}

inline EbkLevel ebk_level(const ModelParams& params, long m,
                          const QuadratureOptions& opt = {}) {
  const long m_max = params.n_particles / 2;
  RG_REQUIRE(m >= 0 && m <= m_max, "ebk_level: m=", m, " outside [0, ", m_max,
             "]");
  EbkLevel lvl;
  lvl.m = m;
  lvl.action_target = (static_cast<double>(m) + 0.5) / params.n_tilde;
  const double alpha = params.scaled_coupling();
  lvl.omega = omega_at_action(lvl.action_target, alpha, opt);
  lvl.energy = energy_from_omega(lvl.omega, params);
  lvl.orbit_class = classify_orbit(lvl.omega, alpha);
  return lvl;
}

/* Full semiclassical ladder m = 0 .. floor(N/2).  Cost is linear in N with
 * ~15 action integrals per level; intended for moderate particle numbers. */
inline std::vector<EbkLevel> ebk_spectrum(const ModelParams& params,
                                          const QuadratureOptions& opt = {}) {
  const long m_max = params.n_particles / 2;
  std::vector<EbkLevel> out;
  out.reserve(static_cast<std::size_t>(m_max) + 1);
  for (long m = 0; m <= m_max; ++m) {
    out.push_back(ebk_level(params, m, opt));
    if (m > 0) {
      RG_REQUIRE(out[m].energy > out[m - 1].energy,
                 "ebk_spectrum: levels out of order at m=", m);
    }
  }
  return out;
}

}  // namespace ringgas
