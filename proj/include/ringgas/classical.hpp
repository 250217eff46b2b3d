#pragma once

/* Classical phase space of the 3-mode model reduced to the K = 0 shell.
 *
 * With z = n_0 / n_tilde, the conjugate angle phi, and scaled coupling
 * alpha = g * n_tilde, the reduced energy surface is
 *
 *   omega(z, phi) = (1 - z) * [ 1 - alpha * ( (1 - z)/8 + z cos^2(phi) ) ],
 *
 * and the total energy maps affinely onto omega:
 *
 *   E / n_tilde = omega + alpha * ( -1/4 + 3/(2 n_tilde) - 9/(8 n_tilde^2) )
 *                 - 1 / n_tilde.
 *
 * The dynamics is pi-periodic in phi. For alpha > 1 the surface develops a
 * self-trapping island around phi = 0 bounded by the separatrix omega = 0:
 * an interior minimum on the phi = 0 axis and two hyperbolic points on the
 * z = 1 line at phi = +-acos(1/sqrt(alpha)) with stability exponent
 * lambda_s = 2 sqrt(alpha - 1). For alpha <= 1 every orbit is a rotation.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ringgas/common.hpp"
#include "ringgas/model.hpp"

namespace ringgas {

struct ClassicalPoint {
  double z = 0.0;
  double phi = 0.0;
};

/* Reduce an angle to the fundamental domain [0, pi). */
inline double reduce_phi(double phi) {
  double r = std::fmod(phi, pi);
  if (r < 0.0) r += pi;
  return r;
}

/* Reduced energy surface. Polynomial in z, so evaluation outside the physical
 * strip z in [0,1] is allowed (diagnostics on unphysical branch roots). */
inline double omega(double z, double phi, double alpha) {
  const double u = 1.0 - z;
  const double c = std::cos(phi);
  return u * (1.0 - alpha * (u / 8.0 + z * c * c));
}

inline double omega(const ClassicalPoint& p, double alpha) {
  return omega(p.z, p.phi, alpha);
}

/* Total energy from omega, E = n_tilde * omega + alpha * (-n_tilde/4 + 3/2
 * - 9/(8 n_tilde)) - 1, and its exact inverse. */
inline double energy_from_omega(double omega_value, const ModelParams& params) {
  const double nt = params.n_tilde;
  const double alpha = params.scaled_coupling();
  return nt * omega_value + alpha * (-nt / 4.0 + 1.5 - 9.0 / (8.0 * nt)) - 1.0;
}

inline double omega_from_energy(double energy, const ModelParams& params) {
  const double nt = params.n_tilde;
  const double alpha = params.scaled_coupling();
  return (energy - alpha * (-nt / 4.0 + 1.5 - 9.0 / (8.0 * nt)) + 1.0) / nt;
}

inline double energy_per_particle(double omega_value, const ModelParams& params) {
  return energy_from_omega(omega_value, params) / params.n_tilde;
}

/* Range of omega over the physical strip. The upper edge z = 0 carries
 * omega = 1 - alpha/8 for every phi; the minimum sits on the phi = 0 axis for
 * alpha > 1 and at the z = 1 line (omega = 0) otherwise. */
inline double omega_max(double alpha) {
  RG_REQUIRE(alpha >= 0.0 && alpha < 8.0, "omega_max: need 0 <= alpha < 8, got ", alpha);
  return 1.0 - alpha / 8.0;
}

inline double omega_min(double alpha) {
  RG_REQUIRE(alpha >= 0.0 && alpha < 8.0, "omega_min: need 0 <= alpha < 8, got ", alpha);
  if (alpha <= 1.0) return 0.0;
  const double d = alpha - 1.0;
  return -2.0 * d * d / (7.0 * alpha);
}

/* Absolute tolerance below which omega counts as sitting on the separatrix. */
inline double separatrix_tolerance(double alpha) {
  return 1e-12 * std::max(1.0, alpha);
}

struct FixedPoint {
  ClassicalPoint at;
  double omega_value = 0.0;
  double stability_exponent = 0.0;  // lambda_s for hyperbolic points, 0 otherwise
};

struct FixedPointSet {
  std::optional<FixedPoint> minimum;   // present only for alpha > 1
  std::vector<FixedPoint> hyperbolic;  // nonempty iff alpha > 1
};

inline FixedPointSet fixed_points(double alpha) {
  RG_REQUIRE(alpha >= 0.0 && alpha < 8.0, "fixed_points: need 0 <= alpha < 8, got ", alpha);
  FixedPointSet fp;
  if (alpha <= 1.0) return fp;

  const double u_star = 4.0 * (alpha - 1.0) / (7.0 * alpha);
  fp.minimum = FixedPoint{{1.0 - u_star, 0.0}, omega_min(alpha), 0.0};

  const double phi_star = std::acos(1.0 / std::sqrt(alpha));
  const double lambda_s = 2.0 * std::sqrt(alpha - 1.0);
  fp.hyperbolic.push_back(FixedPoint{{1.0, phi_star}, 0.0, lambda_s});
  fp.hyperbolic.push_back(FixedPoint{{1.0, pi - phi_star}, 0.0, lambda_s});
  return fp;
}

/* Linearized repulsion rate lambda_s = 2 sqrt(alpha - 1) at either
 * hyperbolic point.  Early-time commutator growth runs at 2 lambda_s; the
 * level-statistics rate is lambda_s / 2 because a circuit near the
 * separatrix passes both hyperbolic points per period (see dos.hpp). */
inline double stability_exponent(double alpha) {
  RG_REQUIRE(alpha > 1.0, "stability_exponent: requires alpha > 1, got ",
             alpha);
  return 2.0 * std::sqrt(alpha - 1.0);
}

struct SeparatrixEnergy {
  double omega_value = 0.0;  // zero by definition
  double energy = 0.0;       // total E at omega = 0
};

inline SeparatrixEnergy separatrix_energy(double alpha, const ModelParams& params) {
  RG_REQUIRE(alpha > 1.0, "separatrix_energy: no separatrix for alpha <= 1, got ", alpha);
  ModelParams p = ModelParams::from_scaled(params.n_particles, alpha,
                                           params.mode_cutoff, params.n_tilde);
  return SeparatrixEnergy{0.0, energy_from_omega(0.0, p)};
}

inline SeparatrixEnergy separatrix_energy(const ModelParams& params) {
  return separatrix_energy(params.scaled_coupling(), params);
}

/* One root of the constant-omega condition at fixed phi. */
struct ZBranch {
  double z = 0.0;
  bool physical = false;  // z in [0, 1] (tiny slack for roundoff)
};

/* All real z solving omega(z, phi, alpha) = omega_value at this angle. In
 * u = 1 - z the condition is the quadratic
 *   alpha (c - 1/8) u^2 + (1 - alpha c) u - omega_value = 0,  c = cos^2(phi),
 * solved in the cancellation-stable form and polished by one Newton step.
 * Both roots are returned, sorted by z; callers filter on `physical`. */
inline std::vector<ZBranch> z_branches(double omega_value, double phi, double alpha) {
  const double c0 = std::cos(phi);
  const double c = c0 * c0;
  const double a = alpha * (c - 0.125);
  const double b = 1.0 - alpha * c;

  std::vector<double> roots;
  if (std::abs(a) < 1e-14 * std::max(1.0, alpha)) {
    if (std::abs(b) > 0.0) roots.push_back(omega_value / b);
  } else {
    const double disc = b * b + 4.0 * a * omega_value;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      if (q != 0.0) {
        roots.push_back(q / a);
        roots.push_back(-omega_value / q);
      } else {
        roots.push_back(0.0);  // b = 0 and omega_value = 0: double root
      }
    }
  }

  std::vector<ZBranch> out;
  for (double u : roots) {
    const double fp = 2.0 * a * u + b;
    if (std::abs(fp) > 1e-300) {
      const double f = (a * u + b) * u - omega_value;
      u -= f / fp;
    }
    const double z = 1.0 - u;
    out.push_back(ZBranch{z, z >= -1e-12 && z <= 1.0 + 1e-12});
  }
  std::sort(out.begin(), out.end(),
            [](const ZBranch& l, const ZBranch& r) { return l.z < r.z; });
  return out;
}

enum class OrbitClass { Rotation, Vibration, Separatrix };

inline const char* orbit_class_name(OrbitClass c) {
  switch (c) {
    case OrbitClass::Rotation: return "rotation";
    case OrbitClass::Vibration: return "vibration";
    case OrbitClass::Separatrix: return "separatrix";
  }
  return "?";
}

inline OrbitClass classify_orbit(double omega_value, double alpha) {
  const double tol = separatrix_tolerance(alpha);
  const double hi = omega_max(alpha);
  const double lo = omega_min(alpha);
  RG_REQUIRE(omega_value >= lo - tol && omega_value <= hi + tol,
             "classify_orbit: omega=", omega_value, " outside [", lo, ", ", hi,
             "] at alpha=", alpha);
  if (alpha > 1.0) {
    if (std::abs(omega_value) < tol) return OrbitClass::Separatrix;
    if (omega_value < 0.0) return OrbitClass::Vibration;
    return OrbitClass::Rotation;
  }
  RG_REQUIRE(omega_value > tol,
             "classify_orbit: omega=", omega_value,
             " is not an orbit for alpha <= 1");
  return OrbitClass::Rotation;
}

/* omega sampled on a uniform grid, rows z in [0,1] (n_z points, inclusive),
 * columns phi in [0, pi) (n_phi points, endpoint excluded by periodicity). */
inline Eigen::MatrixXd phase_portrait_grid(double alpha, Eigen::Index n_z,
                                           Eigen::Index n_phi) {
  RG_REQUIRE(n_z >= 2 && n_phi >= 1, "phase_portrait_grid: grid too small");
  Eigen::MatrixXd grid(n_z, n_phi);
  for (Eigen::Index i = 0; i < n_z; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(n_z - 1);
    for (Eigen::Index j = 0; j < n_phi; ++j) {
      const double phi = pi * static_cast<double>(j) / static_cast<double>(n_phi);
      grid(i, j) = omega(z, phi, alpha);
    }
  }
  return grid;
}

}  // namespace ringgas
