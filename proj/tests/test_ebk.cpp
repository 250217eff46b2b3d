// Semiclassical quantisation tests.  Anchors: the free ladder E_m = 2m is
// reproduced exactly, quantisation residuals vanish, island/rotation levels
// sort around the separatrix, and the whole ladder converges to the exact
// quantum spectrum (ladder-operator oracle) as N grows.
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ringgas/ebk.hpp"

using namespace ringgas;

namespace {

Eigen::VectorXd quantum_levels(std::int64_t n, double alpha) {
  const ModelParams params = ModelParams::from_scaled(n, alpha, 1);
  const auto states = oracle::sector_states(n, 0, 1);
  const Eigen::MatrixXd h =
      oracle::ladder_hamiltonian(n, 1, params.coupling_bare, states);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  return solver.eigenvalues();
}

}  // namespace

TEST_CASE("free ladder is exact: E_m = 2m") {
  const ModelParams params(1000, 0.0);
  const auto levels = ebk_spectrum(params);
  REQUIRE(levels.size() == 501);
  for (const auto& lvl : levels) {
    CHECK(std::abs(lvl.energy - 2.0 * static_cast<double>(lvl.m)) < 1e-10);
    CHECK(lvl.omega == doctest::Approx((2.0 * lvl.m + 1.0) / params.n_tilde)
                           .epsilon(1e-12));
    CHECK(lvl.orbit_class == OrbitClass::Rotation);
  }
}

TEST_CASE("quantisation residuals vanish") {
  const ModelParams params = ModelParams::from_scaled(50, 2.0, 1);
  const double alpha = params.scaled_coupling();
  for (const auto& lvl : ebk_spectrum(params)) {
    const double a = action_integral(lvl.omega, alpha).action;
    CHECK(std::abs(a - lvl.action_target) < 1e-12);
    CHECK(lvl.energy ==
          doctest::Approx(energy_from_omega(lvl.omega, params)).epsilon(1e-15));
  }
}

TEST_CASE("ladder size follows the pair count") {
  CHECK(ebk_spectrum(ModelParams(7, 0.05)).size() == 4);
  CHECK(ebk_spectrum(ModelParams(8, 0.05)).size() == 5);
  CHECK_THROWS_AS(ebk_level(ModelParams(8, 0.05), 5), ringgas::error);
  CHECK_THROWS_AS(ebk_level(ModelParams(8, 0.05), -1), ringgas::error);
}

TEST_CASE("island and rotation levels split at the separatrix") {
  const ModelParams params = ModelParams::from_scaled(20, 2.0, 1);
  const double alpha = params.scaled_coupling();
  const double a_sep = separatrix_action(alpha);
  const double e_sep = separatrix_energy(params).energy;
  const auto levels = ebk_spectrum(params);
  REQUIRE(levels.size() == 11);
  for (const auto& lvl : levels) {
    const bool below = lvl.action_target < a_sep;
    CHECK(lvl.orbit_class ==
          (below ? OrbitClass::Vibration : OrbitClass::Rotation));
    CHECK((lvl.energy < e_sep) == below);
  }
  // with n_tilde = 21.5 and a_sep(2) ~ 0.1064 exactly two island levels fit
  CHECK(levels[0].orbit_class == OrbitClass::Vibration);
  CHECK(levels[1].orbit_class == OrbitClass::Vibration);
  CHECK(levels[2].orbit_class == OrbitClass::Rotation);
}

TEST_CASE("energies increase and bunch at the separatrix") {
  const ModelParams params = ModelParams::from_scaled(2000, 2.0, 1);
  const auto levels = ebk_spectrum(params);
  const double e_sep = separatrix_energy(params).energy;
  long tightest = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double gap = levels[i].energy - levels[i - 1].energy;
    CHECK(gap > 0.0);
    if (gap < min_gap) {
      min_gap = gap;
      tightest = static_cast<long>(i);
    }
  }
  // the smallest gap straddles the separatrix energy
  CHECK(levels[tightest - 1].energy < e_sep);
  CHECK(levels[tightest].energy > e_sep);
  // and is logarithmically suppressed relative to the free spacing 2
  CHECK(min_gap < 0.75);
  CHECK(min_gap > 0.05);
}

TEST_CASE("ladder matches the exact spectrum and improves with N") {
  // smooth regime: semiclassical error should be far below the level spacing
  // and shrink with N
  const double alpha = 0.5;
  double worst40 = 0.0, worst80 = 0.0;
  {
    const Eigen::VectorXd exact = quantum_levels(40, alpha);
    const auto levels = ebk_spectrum(ModelParams::from_scaled(40, alpha, 1));
    REQUIRE(exact.size() == static_cast<Eigen::Index>(levels.size()));
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      worst40 = std::max(worst40, std::abs(levels[i].energy - exact[i]));
    }
  }
  {
    const Eigen::VectorXd exact = quantum_levels(80, alpha);
    const auto levels = ebk_spectrum(ModelParams::from_scaled(80, alpha, 1));
    REQUIRE(exact.size() == static_cast<Eigen::Index>(levels.size()));
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      worst80 = std::max(worst80, std::abs(levels[i].energy - exact[i]));
    }
  }
  CHECK(worst40 < 0.25);           // level spacing is ~2
  CHECK(worst80 < 0.6 * worst40);  // systematic error shrinks with N
}

TEST_CASE("action inversion pins degenerate targets to the separatrix band") {
  // a target equal to a_sep within the tolerance band resolves to a band edge
  const double alpha = 2.0;
  const double a_sep = separatrix_action(alpha);
  const double w = omega_at_action(a_sep, alpha);
  CHECK(std::abs(w) <= 4.0 * separatrix_tolerance(alpha));
  CHECK_THROWS_AS(omega_at_action(0.5, alpha), ringgas::error);
  CHECK_THROWS_AS(omega_at_action(0.0, alpha), ringgas::error);
}
