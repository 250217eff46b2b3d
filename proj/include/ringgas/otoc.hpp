#pragma once
// ============================================================================
// Out-of-time-order correlator of the condensate occupation, and the one-body
// entropy, after the quench that puts every particle in the k = 0 mode.
//
//     C(t)  = || [n0, n0(t)] psi ||^2 / N^4,     n0(t) = e^{iHt} n0 e^{-iHt},
//     psi   = (a0+)^N |0> / sqrt(N!)             (one basis state),
//     S(t)  = -sum_j p_j log p_j,                p_j = <n_j>(t) / N.
//
// The quench state is an n0 eigenstate with eigenvalue N, which collapses the
// commutator to a single evolution chain:
//
//     [n0, n0(t)] psi = (n0 - N) e^{iHt} n0 e^{-iHt} psi,
//
// so one sample costs two propagations and two diagonal multiplies -- six
// real mat-vecs on the spectral route.  C(0) = 0 holds exactly and every
// sample is >= 0 by construction; t = 0 short-circuits to exact zero so the
// leading grid point never carries roundoff.
//
// In a fixed-momentum sector <a_j+ a_k> vanishes for j != k (the operator
// shifts the total momentum), so the one-body matrix is diagonal and its
// entropy needs only the mean occupations.
//
// Route selection: the dedicated pair-ladder overload always synthesises
// from the tridiagonal eigendecomposition; the generic sector overload
// diagonalises densely up to `spectral_cap` and falls back to per-sample
// Krylov propagation beyond it (O(t) work per sample, exact restarts, no
// accumulated drift).
// ============================================================================

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ringgas/common.hpp"
#include "ringgas/fit.hpp"
#include "ringgas/hamiltonian.hpp"
#include "ringgas/model.hpp"
#include "ringgas/propagate.hpp"

namespace ringgas {

/* Uniform sampling times i * t_max / n_steps, i = 0..n_steps. */
struct TimeGrid {
  double t_max = 0.0;
  Eigen::Index n_steps = 0;

  Eigen::Index size() const { return n_steps + 1; }
  double time(Eigen::Index i) const {
    return t_max * static_cast<double>(i) / static_cast<double>(n_steps);
  }
};

struct OtocSeries {
  std::vector<double> times;
  std::vector<double> c_values;
  std::vector<double> entropy;  // filled only when requested
};

struct OtocOptions {
  bool with_entropy = false;
  Eigen::Index spectral_cap = 6000;  // dense-eigensolver limit for sectors
  KrylovOptions krylov;              // stepping control beyond the cap
};

/* The all-condensate quench state of a sector basis. */
inline Eigen::VectorXcd quench_state(const FockBasis& basis) {
  RG_REQUIRE(basis.momentum() == 0,
             "quench_state: the condensate lives in the K = 0 sector, not K = ",
             basis.momentum());
  std::vector<std::int64_t> occ(static_cast<std::size_t>(basis.n_modes()), 0);
  occ[static_cast<std::size_t>(basis.mode_cutoff())] = basis.n_particles();
  const Eigen::Index i0 = basis.index_of(occ.data());
  RG_REQUIRE(i0 >= 0, "quench_state: condensate state missing from the basis");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
  psi(i0) = 1.0;
  return psi;
}

/* Mean-occupation (diagonal one-body) entropy of a sector state. */
inline double one_body_entropy(const Eigen::VectorXcd& state,
                               const Eigen::MatrixXd& occupations,
                               double n_particles) {
  RG_REQUIRE(occupations.cols() == state.size(),
             "one_body_entropy: occupation table has ", occupations.cols(),
             " columns for a state of size ", state.size());
  const Eigen::VectorXd weight = state.cwiseAbs2();
  double s = 0.0;
  for (Eigen::Index j = 0; j < occupations.rows(); ++j) {
    const double p = occupations.row(j).dot(weight) / n_particles;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

/* Occupations of the 3-mode pair basis |m, N - 2m, m>, rows k = -1, 0, +1. */
inline Eigen::MatrixXd pair_basis_occupations(const ModelParams& params) {
  RG_REQUIRE(params.mode_cutoff == 1,
             "pair_basis_occupations: defined for the 3-mode model");
  const Eigen::Index dim =
      static_cast<Eigen::Index>(params.n_particles / 2) + 1;
  Eigen::MatrixXd occ(3, dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    occ(0, m) = static_cast<double>(m);
    occ(1, m) = static_cast<double>(params.n_particles) - 2.0 * double(m);
    occ(2, m) = static_cast<double>(m);
  }
  return occ;
}

inline Eigen::MatrixXd sector_occupations(const FockBasis& basis) {
  return basis.occupations().cast<double>().transpose();
}

namespace detail {

/* Shared spectral engine.  `mode0` holds <i|n0|i> over the basis, `i0` the
 * quench state's index (an n0 eigenstate with eigenvalue N). */
inline OtocSeries otoc_spectral(const Eigen::VectorXd& values,
                                const Eigen::MatrixXd& vectors,
                                const Eigen::VectorXd& mode0,
                                const Eigen::MatrixXd& occupations,
                                Eigen::Index i0, double n_particles,
                                const TimeGrid& grid, bool with_entropy) {
  const Eigen::Index dim = values.size();
  RG_REQUIRE(grid.n_steps >= 1, "otoc_series: need at least one time step");
  RG_REQUIRE(grid.t_max > 0.0, "otoc_series: t_max must be positive");

  OtocSeries out;
  out.times.reserve(static_cast<std::size_t>(grid.size()));
  out.c_values.reserve(static_cast<std::size_t>(grid.size()));
  if (with_entropy) out.entropy.reserve(static_cast<std::size_t>(grid.size()));

  const double n4 = std::pow(n_particles, 4);
  const Eigen::VectorXd c0 = vectors.row(i0).transpose();  // V^T psi
  const Eigen::ArrayXd shifted = mode0.array() - n_particles;

  Eigen::VectorXd ur(dim), ui(dim), wr(dim), wi(dim), yr(dim), yi(dim);
  for (Eigen::Index s = 0; s < grid.size(); ++s) {
    const double t = grid.time(s);
    out.times.push_back(t);
    if (t == 0.0) {
      // [n0, n0] = 0: exact, no synthesis roundoff on the first sample.
      out.c_values.push_back(0.0);
      if (with_entropy) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
        psi(i0) = 1.0;
        out.entropy.push_back(
            one_body_entropy(psi, occupations, n_particles));
      }
      continue;
    }
    const Eigen::ArrayXd cos_t = (values.array() * t).cos();
    const Eigen::ArrayXd sin_t = (values.array() * t).sin();

    // u = e^{-iHt} psi
    ur.noalias() = vectors * (c0.array() * cos_t).matrix();
    ui.noalias() = vectors * (-c0.array() * sin_t).matrix();
    // w = n0 u
    wr = mode0.array() * ur.array();
    wi = mode0.array() * ui.array();
    // v = e^{+iHt} w, synthesised through the eigenbasis
    yr.noalias() = vectors.transpose() * wr;
    yi.noalias() = vectors.transpose() * wi;
    const Eigen::ArrayXd vr = yr.array() * cos_t - yi.array() * sin_t;
    const Eigen::ArrayXd vi = yi.array() * cos_t + yr.array() * sin_t;
    yr.noalias() = vectors * vr.matrix();
    yi.noalias() = vectors * vi.matrix();
    // C = ||(n0 - N) v||^2 / N^4
    const double c = ((shifted * yr.array()).square() +
                      (shifted * yi.array()).square())
                         .sum() /
                     n4;
    out.c_values.push_back(c);
    if (with_entropy) {
      Eigen::VectorXcd u(dim);
      u.real() = ur;
      u.imag() = ui;
      out.entropy.push_back(one_body_entropy(u, occupations, n_particles));
    }
  }
  return out;
}

/* Per-sample Krylov engine: two fresh propagations per time, no drift. */
template <class Op>
OtocSeries otoc_krylov(const Op& h, const Eigen::VectorXd& mode0,
                       const Eigen::MatrixXd& occupations, Eigen::Index i0,
                       double n_particles, const TimeGrid& grid,
                       const OtocOptions& opt) {
  const Eigen::Index dim = h.dim();
  RG_REQUIRE(grid.n_steps >= 1, "otoc_series: need at least one time step");
  RG_REQUIRE(grid.t_max > 0.0, "otoc_series: t_max must be positive");

  OtocSeries out;
  out.times.reserve(static_cast<std::size_t>(grid.size()));
  out.c_values.reserve(static_cast<std::size_t>(grid.size()));
  if (opt.with_entropy)
    out.entropy.reserve(static_cast<std::size_t>(grid.size()));

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(i0) = 1.0;
  const double n4 = std::pow(n_particles, 4);
  const Eigen::ArrayXd shifted = mode0.array() - n_particles;

  for (Eigen::Index s = 0; s < grid.size(); ++s) {
    const double t = grid.time(s);
    out.times.push_back(t);
    if (t == 0.0) {
      out.c_values.push_back(0.0);
      if (opt.with_entropy) {
        out.entropy.push_back(
            one_body_entropy(psi, occupations, n_particles));
      }
      continue;
    }
    const Eigen::VectorXcd u = krylov_propagate(h, psi, t, opt.krylov);
    const Eigen::VectorXcd w = mode0.array() * u.array();
    const Eigen::VectorXcd v = krylov_propagate(h, w, -t, opt.krylov);
    out.c_values.push_back((shifted * v.array()).matrix().squaredNorm() / n4);
    if (opt.with_entropy) {
      out.entropy.push_back(one_body_entropy(u, occupations, n_particles));
    }
  }
  return out;
}

}  // namespace detail

/* OTOC of the pair ladder (3-mode, K = 0) from a precomputed decomposition;
 * useful when the same spectrum also feeds level statistics. */
inline OtocSeries otoc_series(const EigenPairs& pairs,
                              const ModelParams& params, const TimeGrid& grid,
                              const OtocOptions& opt = {}) {
  RG_REQUIRE(pairs.values.size() == params.n_particles / 2 + 1,
             "otoc_series: decomposition of dimension ", pairs.values.size(),
             " does not match N = ", params.n_particles);
  RG_REQUIRE(pairs.vectors.rows() == pairs.values.size(),
             "otoc_series: decomposition lacks eigenvectors");
  Eigen::VectorXd mode0(pairs.values.size());
  for (Eigen::Index m = 0; m < mode0.size(); ++m) {
    mode0(m) = static_cast<double>(params.n_particles) - 2.0 * double(m);
  }
  const Eigen::MatrixXd occupations =
      opt.with_entropy ? pair_basis_occupations(params) : Eigen::MatrixXd();
  return detail::otoc_spectral(pairs.values, pairs.vectors, mode0, occupations,
                               0, static_cast<double>(params.n_particles),
                               grid, opt.with_entropy);
}

/* OTOC of the pair ladder (3-mode, K = 0): always spectral. */
inline OtocSeries otoc_series(const TridiagonalHamiltonian& h,
                              const ModelParams& params, const TimeGrid& grid,
                              const OtocOptions& opt = {}) {
  RG_REQUIRE(h.dim() == params.n_particles / 2 + 1,
             "otoc_series: Hamiltonian dimension ", h.dim(),
             " does not match N = ", params.n_particles);
  return otoc_series(eigen_decomposition(h, true), params, grid, opt);
}

/* OTOC of a general sector: dense spectral up to opt.spectral_cap, Krylov
 * stepping beyond. */
inline OtocSeries otoc_series(const SparseHamiltonian& h, const TimeGrid& grid,
                              const OtocOptions& opt = {}) {
  const FockBasis& basis = h.basis;
  const Eigen::VectorXcd psi = quench_state(basis);
  Eigen::Index i0 = 0;
  psi.cwiseAbs().maxCoeff(&i0);
  const Eigen::VectorXd mode0 = basis.mode0_occupations();
  const Eigen::MatrixXd occupations =
      opt.with_entropy ? sector_occupations(basis) : Eigen::MatrixXd();
  const double n = static_cast<double>(basis.n_particles());

  if (h.dim() <= opt.spectral_cap) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Eigen::MatrixXd(h.matrix));
    RG_REQUIRE(es.info() == Eigen::Success,
               "otoc_series: dense eigensolver failed");
    return detail::otoc_spectral(es.eigenvalues(), es.eigenvectors(), mode0,
                                 occupations, i0, n, grid, opt.with_entropy);
  }
  return detail::otoc_krylov(h, mode0, occupations, i0, n, grid, opt);
}

// ---------------------------------------------------------------------------
// Fits on a computed series.
// ---------------------------------------------------------------------------

struct GrowthFit {
  double rate = 0.0;           // slope of log C(t)
  double log_intercept = 0.0;  // log C extrapolated to t = 0
  double r_squared = 0.0;
  Eigen::Index n_points = 0;
};

/* Least-squares slope of log C over samples with t0 <= t <= t1.  Demands
 * strictly positive values across the window: a non-positive sample means
 * the window does not sit in the growth regime, which is the caller's error
 * to fix, not this function's to paper over. */
inline GrowthFit fit_growth_rate(const OtocSeries& series, double t0,
                                 double t1) {
  RG_REQUIRE(t0 < t1, "fit_growth_rate: empty window [", t0, ", ", t1, "]");
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t0 || t > t1) continue;
    RG_REQUIRE(series.c_values[i] > 0.0,
               "fit_growth_rate: non-positive sample at t = ", t,
               " inside the fit window");
    ts.push_back(t);
    logs.push_back(std::log(series.c_values[i]));
  }
  RG_REQUIRE(ts.size() >= 3, "fit_growth_rate: only ", ts.size(),
             " samples in the window; need at least 3");
  const Eigen::Map<const Eigen::VectorXd> x(ts.data(),
                                            static_cast<Eigen::Index>(ts.size()));
  const Eigen::Map<const Eigen::VectorXd> y(
      logs.data(), static_cast<Eigen::Index>(logs.size()));
  const LinearFit fit = linear_fit(x, y);
  return GrowthFit{fit.slope, fit.intercept, fit.r_squared,
                   static_cast<Eigen::Index>(ts.size())};
}

struct RevivalOptions {
  double t_min = 0.0;       // ignore the initial growth up to here
  int smooth_window = 3;    // centred moving average width (odd)
  double threshold = 0.05;  // peak floor, fraction of the series maximum
};

struct RevivalFit {
  double period = 0.0;          // mean spacing of detected peaks
  double fourier_period = 0.0;  // dominant discrete-Fourier period
  std::vector<double> peak_times;
};

/* Revival period of an oscillating series: local maxima of the smoothed
 * signal above a floor, plus the dominant Fourier component of the same
 * window as an independent readout.  Throws when fewer than two peaks
 * survive -- no period can be quoted from less. */
inline RevivalFit fit_revival_period(const OtocSeries& series,
                                     const RevivalOptions& opt = {}) {
  RG_REQUIRE(opt.smooth_window >= 1 && opt.smooth_window % 2 == 1,
             "fit_revival_period: smoothing window must be odd and >= 1");
  RG_REQUIRE(opt.threshold >= 0.0 && opt.threshold < 1.0,
             "fit_revival_period: threshold must lie in [0, 1)");
  const std::ptrdiff_t n =
      static_cast<std::ptrdiff_t>(series.times.size());
  std::ptrdiff_t first = 0;
  while (first < n && series.times[static_cast<std::size_t>(first)] < opt.t_min)
    ++first;
  RG_REQUIRE(n - first >= 5, "fit_revival_period: only ", n - first,
             " samples past t_min = ", opt.t_min);

  // Centred moving average, window shrinking at the edges.
  const std::ptrdiff_t m = n - first;
  const std::ptrdiff_t half = opt.smooth_window / 2;
  std::vector<double> smooth(static_cast<std::size_t>(m));
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(m - 1, i + half);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      acc += series.c_values[static_cast<std::size_t>(first + j)];
    }
    smooth[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }

  const double floor =
      opt.threshold * *std::max_element(smooth.begin(), smooth.end());
  RevivalFit out;
  for (std::ptrdiff_t i = 1; i + 1 < m; ++i) {
    const double c = smooth[static_cast<std::size_t>(i)];
    if (c > smooth[static_cast<std::size_t>(i - 1)] &&
        c >= smooth[static_cast<std::size_t>(i + 1)] && c >= floor) {
      out.peak_times.push_back(series.times[static_cast<std::size_t>(first + i)]);
    }
  }
  RG_REQUIRE(out.peak_times.size() >= 2, "fit_revival_period: found ",
             out.peak_times.size(), " peaks past t_min = ", opt.t_min,
             "; need at least 2 to quote a period");
  double acc = 0.0;
  for (std::size_t i = 1; i < out.peak_times.size(); ++i) {
    acc += out.peak_times[i] - out.peak_times[i - 1];
  }
  out.period = acc / static_cast<double>(out.peak_times.size() - 1);

  // Dominant Fourier period of the mean-subtracted window (direct DFT; the
  // series are short enough that O(n^2) is irrelevant).
  const double mean =
      std::accumulate(smooth.begin(), smooth.end(), 0.0) /
      static_cast<double>(m);
  const double span = series.times[static_cast<std::size_t>(n - 1)] -
                      series.times[static_cast<std::size_t>(first)];
  double best_power = -1.0;
  std::ptrdiff_t best_k = 1;
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (std::ptrdiff_t k = 1; k <= m / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      const double arg =
          two_pi * static_cast<double>(k) * static_cast<double>(i) /
          static_cast<double>(m);
      const double v = smooth[static_cast<std::size_t>(i)] - mean;
      re += v * std::cos(arg);
      im -= v * std::sin(arg);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_k = k;
    }
  }
  out.fourier_period =
      span * static_cast<double>(m) /
      (static_cast<double>(m - 1) * static_cast<double>(best_k));
  return out;
}

}  // namespace ringgas
