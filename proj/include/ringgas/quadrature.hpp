#pragma once

/* Adaptive Gauss-Legendre panels with recursive bisection. The panel error is
 * estimated by comparing one full-panel rule against the two half-panel
 * rules; refinement stops when the difference meets the local tolerance.
 * Square-root endpoint behavior (turning points of an orbit integrand) is
 * handled by an explicit substitution x = b - s^2 rather than by refinement.
 */

#include <cmath>
#include <map>
#include <vector>

#include "ringgas/common.hpp"

namespace ringgas {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;  // positive, sum to 2
};

/* n-point rule, nodes found by Newton iteration on the Legendre recurrence. */
inline const GaussLegendreRule& gauss_legendre(int n) {
  RG_REQUIRE(n >= 2 && n <= 64, "gauss_legendre: order out of range: ", n);
  static std::map<int, GaussLegendreRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      /* Evaluate P_n(x) and P_n'(x) by upward recurrence. */
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] =
        2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int order = 21;
  int max_depth = 48;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long panels = 0;
};

namespace detail {

template <class F>
double gl_panel(const F& f, double a, double b, const GaussLegendreRule& rule) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

template <class F>
void gl_adaptive(const F& f, double a, double b, double whole, double tol,
                 const GaussLegendreRule& rule, int depth,
                 const QuadratureOptions& opt, QuadratureResult& out) {
  const double mid = 0.5 * (a + b);
  const double left = gl_panel(f, a, mid, rule);
  const double right = gl_panel(f, mid, b, rule);
  const double diff = std::abs(left + right - whole);
  if (diff <= tol || depth >= opt.max_depth) {
    if (diff > tol) {
      out.value += left + right;
      out.error_estimate += diff;
      out.panels += 2;
      throw error(cat("integrate_adaptive: tolerance not reached at depth ",
                      depth, "; achieved error estimate ", diff, " on [", a,
                      ", ", b, "]"));
    }
    out.value += left + right;
    out.error_estimate += diff;
    out.panels += 2;
    return;
  }
  gl_adaptive(f, a, mid, left, 0.5 * tol, rule, depth + 1, opt, out);
  gl_adaptive(f, mid, b, right, 0.5 * tol, rule, depth + 1, opt, out);
}

}  // namespace detail

template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (a == b) return out;
  const GaussLegendreRule& rule = gauss_legendre(opt.order);
  const double whole = detail::gl_panel(f, a, b, rule);
  const double tol =
      std::max(opt.abs_tol, opt.rel_tol * std::abs(whole));
  detail::gl_adaptive(f, a, b, whole, tol, rule, 0, opt, out);
  return out;
}

/* Integral of f over [a, b] where f behaves like sqrt(b - x) near x = b:
 * substituting x = b - s^2 gives the smooth integrand 2 s f(b - s^2). */
template <class F>
QuadratureResult integrate_sqrt_right(const F& f, double a, double b,
                                      const QuadratureOptions& opt = {}) {
  RG_REQUIRE(b >= a, "integrate_sqrt_right: empty interval");
  const double smax = std::sqrt(b - a);
  return integrate_adaptive(
      [&](double s) { return 2.0 * s * f(b - s * s); }, 0.0, smax, opt);
}

}  // namespace ringgas
