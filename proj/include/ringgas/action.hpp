#pragma once
// ============================================================================
// Orbit actions on the reduced (z, phi) phase space.
//
// For a fixed orbit value omega the curve u(phi), u = 1 - z, solves the
// quadratic
//
//     A(phi) u^2 + B(phi) u = omega,
//     A = alpha (cos^2 phi - 1/8),   B = 1 - alpha cos^2 phi,
//
// and the action is the phase-space area of one pi-period of the orbit
// divided by 2 pi (everything is pi-periodic in phi):
//
//     rotations:   a(omega) = (1/2pi) int_0^pi   u(phi) dphi
//     vibrations:  a(omega) = (1/pi)  int_0^phi_t [u_+(phi) - u_-(phi)] dphi
//
// The vibration integral is the enclosed area of the island orbit (the two
// branches u_-, u_+ coalesce at the turning angle phi_t).  Both expressions
// meet at the separatrix, where the rotation branch develops a kink at
// phi* = acos(1/sqrt(alpha)).  With this normalisation a(omega) = omega/2
// exactly at alpha = 0, a(omega_max) = 1/2 for every alpha, and a -> 0 at
// the bottom of the island.  Quantisation a(omega_m) = (m + 1/2)/n_tilde
// then reproduces the free spectrum E_m = 2m at alpha = 0.
// ============================================================================

#include <cmath>
#include <limits>

#include "ringgas/classical.hpp"
#include "ringgas/common.hpp"
#include "ringgas/quadrature.hpp"

namespace ringgas {

struct ActionResult {
  double omega_value = 0.0;
  double action = 0.0;
  OrbitClass orbit_class = OrbitClass::Rotation;
  // Vibrations: turning angle phi_t in (0, phi*).  Separatrix: phi*.
  // Rotations: quiet NaN (the orbit spans the full period).
  double phi_turn = std::numeric_limits<double>::quiet_NaN();
  double quad_error = 0.0;  // accumulated quadrature error estimate
};

namespace detail {

// The rotation branch u(phi) in [0, 1].  For 0 < omega <= omega_max exactly
// one root of A u^2 + B u = omega lies in the physical strip; the companion
// root is either negative or beyond u = 1.  Roots are formed with the
// cancellation-free q formula, and the near-degenerate angle cos^2 phi = 1/8
// falls back to the linear solution u = omega / B.
inline double rotation_branch(double omega_value, double cos2, double alpha) {
  const double a = alpha * (cos2 - 0.125);
  const double b = 1.0 - alpha * cos2;
  if (std::abs(a) < 1e-14 * std::max(1.0, alpha)) {
    return omega_value / b;
  }
  const double disc = std::max(b * b + 4.0 * a * omega_value, 0.0);
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double r1 = q / a;
  const double r2 = (q != 0.0) ? -omega_value / q : 0.0;
  // Pick the larger of the roots that fall inside the (slightly padded)
  // physical range; the pad absorbs roundoff at the range endpoints.
  const double pad = 1e-9;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double r : {r1, r2}) {
    if (r >= -pad && r <= 1.0 + pad && r > best) {
      best = r;
      found = true;
    }
  }
  RG_REQUIRE(found, "rotation_branch: no root in [0,1] at omega=", omega_value,
             ", cos^2 phi=", cos2, ", alpha=", alpha);
  return std::min(std::max(best, 0.0), 1.0);
}

// Branch separation u_+ - u_- = sqrt(B^2 + 4 A omega) / A inside the island
// (there A > 0 throughout, since cos^2 phi >= cos^2 phi_t > 1/alpha > 1/8).
inline double branch_gap(double omega_value, double cos2, double alpha) {
  const double a = alpha * (cos2 - 0.125);
  const double b = 1.0 - alpha * cos2;
  const double disc = std::max(b * b + 4.0 * a * omega_value, 0.0);
  return std::sqrt(disc) / a;
}

}  // namespace detail

/* Turning angle of a vibrational orbit, omega in (omega_min, 0): the angle
 * where the two u branches coalesce.  The discriminant B^2 + 4 A omega is a
 * quadratic in c = cos^2 phi with roots
 *
 *     c = [(1 - 2 omega) +- sqrt(omega (4 omega + alpha/2 - 4))] / alpha;
 *
 * the island lives above the larger root c_t, so phi_t = acos(sqrt(c_t)).
 * As omega -> 0^- the turning angle tends to phi* = acos(1/sqrt(alpha)); at
 * omega = omega_min it closes onto the elliptic point (c_t = 1, phi_t = 0). */
inline double vibration_turning_angle(double omega_value, double alpha) {
  RG_REQUIRE(alpha > 1.0,
             "vibration_turning_angle: no island for alpha=", alpha);
  RG_REQUIRE(omega_value <= 0.0 && omega_value >= omega_min(alpha) - 1e-12,
             "vibration_turning_angle: omega=", omega_value,
             " outside [omega_min, 0] at alpha=", alpha);
  const double inner =
      std::max(omega_value * (4.0 * omega_value + 0.5 * alpha - 4.0), 0.0);
  double ct = ((1.0 - 2.0 * omega_value) + std::sqrt(inner)) / alpha;
  ct = std::min(std::max(ct, 0.0), 1.0);
  return std::acos(std::sqrt(ct));
}

/* Action of the orbit at the given omega.  Throws ringgas::error (via
 * classify_orbit) when omega lies outside the physical range. */
inline ActionResult action_integral(double omega_value, double alpha,
                                    const QuadratureOptions& opt = {}) {
  // Above alpha = 4 a second island opens around phi = pi/2 (the branch
  // u = 4/alpha becomes physical there) and orbits are no longer uniquely
  // labelled by omega; that regime is far from the transition and is not
  // supported.
  RG_REQUIRE(alpha >= 0.0 && alpha < 4.0,
             "action_integral: requires 0 <= alpha < 4, got ", alpha);
  ActionResult out;
  out.omega_value = omega_value;
  out.orbit_class = classify_orbit(omega_value, alpha);

  if (out.orbit_class == OrbitClass::Vibration) {
    const double phi_t = vibration_turning_angle(omega_value, alpha);
    out.phi_turn = phi_t;
    if (phi_t <= 0.0) return out;  // island closed onto the elliptic point
    // sqrt substitution at the right endpoint: the gap vanishes like
    // sqrt(phi_t - phi) at the turning angle.
    const auto gap = [omega_value, alpha](double phi) {
      const double c = std::cos(phi);
      return detail::branch_gap(omega_value, c * c, alpha);
    };
    const QuadratureResult r = integrate_sqrt_right(gap, 0.0, phi_t, opt);
    out.action = r.value / pi;
    out.quad_error = r.error_estimate / pi;
    return out;
  }

  if (out.orbit_class == OrbitClass::Separatrix) {
    // On the separatrix the outer branch is u = (alpha c - 1)/(alpha (c - 1/8))
    // for c > 1/alpha and u = 0 beyond phi*; only [0, phi*] contributes.
    const double phi_star = std::acos(1.0 / std::sqrt(alpha));
    out.phi_turn = phi_star;
    const auto u_sep = [alpha](double phi) {
      const double c2 = std::cos(phi) * std::cos(phi);
      return (alpha * c2 - 1.0) / (alpha * (c2 - 0.125));
    };
    const QuadratureResult r = integrate_adaptive(u_sep, 0.0, phi_star, opt);
    out.action = r.value / pi;
    out.quad_error = r.error_estimate / pi;
    return out;
  }

  // Rotation: u(phi) is symmetric about phi = pi/2, so integrate half of the
  // pi-period.  Above the transition the branch has a boundary layer near
  // phi* inherited from the separatrix kink; splitting there keeps the
  // adaptive refinement local.
  const auto u = [omega_value, alpha](double phi) {
    const double c = std::cos(phi);
    return detail::rotation_branch(omega_value, c * c, alpha);
  };
  double value = 0.0;
  double err = 0.0;
  if (alpha > 1.0) {
    const double phi_star = std::acos(1.0 / std::sqrt(alpha));
    const QuadratureResult r1 = integrate_adaptive(u, 0.0, phi_star, opt);
    const QuadratureResult r2 = integrate_adaptive(u, phi_star, 0.5 * pi, opt);
    value = r1.value + r2.value;
    err = r1.error_estimate + r2.error_estimate;
  } else {
    const QuadratureResult r = integrate_adaptive(u, 0.0, 0.5 * pi, opt);
    value = r.value;
    err = r.error_estimate;
  }
  out.action = value / pi;
  out.quad_error = err / pi;
  return out;
}

/* Separatrix action a_sep = a(omega = 0) for alpha > 1: the area enclosed by
 * the island boundary divided by 2 pi.  This is where the rotation and
 * vibration ladders meet. */
inline double separatrix_action(double alpha, const QuadratureOptions& opt = {}) {
  RG_REQUIRE(alpha > 1.0, "separatrix_action: requires alpha > 1, got ", alpha);
  return action_integral(0.0, alpha, opt).action;
}

}  // namespace ringgas
