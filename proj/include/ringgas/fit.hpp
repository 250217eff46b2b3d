#pragma once
/* Small fitting utilities shared by the spectral-statistics and dynamics
 * layers: ordinary least squares for a straight line (slope errors and
 * goodness of fit included) and a derivative-free golden-section minimizer
 * for locating gap minima and avoided crossings on a bracketed interval. */

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "ringgas/common.hpp"

namespace ringgas {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;      // standard error of the slope estimate
  double stderr_intercept = 0.0;  // standard error of the intercept estimate
  double r_squared = 1.0;
};

/* Least-squares fit y = intercept + slope * x.  Standard errors follow the
 * usual unbiased residual-variance estimate (zero when n <= 2, where the fit
 * interpolates and no residual information is available). */
inline LinearFit linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  RG_REQUIRE(n == y.size(), "linear_fit: size mismatch: ", n, " vs ", y.size());
  RG_REQUIRE(n >= 2, "linear_fit: need at least two points, got ", n);

  const double x_bar = x.mean();
  const double y_bar = y.mean();
  const Eigen::VectorXd dx = x.array() - x_bar;
  const Eigen::VectorXd dy = y.array() - y_bar;
  const double s_xx = dx.squaredNorm();
  RG_REQUIRE(s_xx > 0.0, "linear_fit: degenerate abscissa (all x equal)");

  LinearFit out;
  out.slope = dx.dot(dy) / s_xx;
  out.intercept = y_bar - out.slope * x_bar;

  const double ss_tot = dy.squaredNorm();
  const double ss_res =
      (y.array() - out.intercept - out.slope * x.array()).matrix().squaredNorm();
  out.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double var = ss_res / static_cast<double>(n - 2);
    out.stderr_slope = std::sqrt(var / s_xx);
    out.stderr_intercept =
        std::sqrt(var * (1.0 / static_cast<double>(n) + x_bar * x_bar / s_xx));
  }
  return out;
}

/* Golden-section search for the minimum of f on [a, b].  Assumes a single
 * interior minimum (callers bracket with a coarse grid first).  Returns the
 * midpoint of the final interval. */
template <class F>
double golden_minimize(F&& f, double a, double b, double xtol,
                       int max_iterations = 200) {
  RG_REQUIRE(a < b, "golden_minimize: empty interval [", a, ", ", b, "]");
  RG_REQUIRE(xtol > 0.0, "golden_minimize: xtol must be positive");
  constexpr double inv_phi = 0.6180339887498949;  // 1/golden ratio
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iterations && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ringgas
