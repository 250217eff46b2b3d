/* Experiment front end.
 *
 * Wires the library modules into figure-reproduction pipelines:
 *
 *   ringgas portrait  --config c.cfg   phase-space energy maps + orbit contours
 *   ringgas spectrum  --config c.cfg   exact vs semiclassical levels over alpha
 *   ringgas dos       --config c.cfg   near-separatrix density of states + gaps
 *   ringgas ladder    --config c.cfg   equidistant level ladders at huge sizes
 *   ringgas otoc      --config c.cfg   correlator growth/revival series + fits
 *   ringgas scaling   --config c.cfg   finite-size scaling of the minimal gap
 *
 * Every command reads a flat key = value config file, applies --set overrides
 * (later wins), rejects keys it does not understand, and emits plain CSV with
 * a '#'-prefixed provenance header.  Identical configs produce bitwise
 * identical files regardless of --threads: sweep points are dispatched to a
 * worker pool, but results land in preassigned slots and a single collector
 * writes them in order.
 *
 * Exit codes: 0 success, 1 solver/runtime failure, 2 configuration error.
 */

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ringgas/action.hpp"
#include "ringgas/classical.hpp"
#include "ringgas/config.hpp"
#include "ringgas/csv.hpp"
#include "ringgas/dos.hpp"
#include "ringgas/ebk.hpp"
#include "ringgas/hamiltonian.hpp"
#include "ringgas/model.hpp"
#include "ringgas/otoc.hpp"
#include "ringgas/tridiag.hpp"

namespace fs = std::filesystem;
using namespace ringgas;

namespace {

/* ---------------------------------------------------------------- plumbing */

/* Run fn(0..count-1) on `threads` workers.  Each call must touch only its
 * own result slot; the first exception wins and is rethrown after join. */
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (pool == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(pool));
  for (int w = 0; w < pool; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/* Shared provenance block: command, code version, and the full resolved
 * configuration (file values with overrides applied). */
CsvMetadata provenance(const std::string& command, const Config& cfg) {
  CsvMetadata meta;
  meta.add("command", command);
  meta.add("version", version_string);
  for (const auto& [key, value] : cfg.items()) meta.add("config." + key, value);
  return meta;
}

/* Filename token for a sweep value: shortest round-trip form, '+' dropped
 * ("1e+06" -> "1e06") so names stay shell-friendly. */
std::string size_token(double value) {
  std::string s = format_double(value);
  std::string out;
  for (const char c : s)
    if (c != '+') out.push_back(c);
  return out;
}

ModelParams params_for_size(double size, double alpha, int cutoff) {
  // Integer particle numbers keep the physical N + 3/2; beyond 2^53 (or a
  // non-integer config value) only the continuum size parameter matters.
  if (size <= 9.0e15 && size == std::floor(size))
    return ModelParams::from_scaled(static_cast<std::int64_t>(size), alpha,
                                    cutoff);
  return ModelParams::from_scaled(100, alpha, cutoff, size);
}

/* --------------------------------------------------------------- portrait */

int cmd_portrait(const Config& cfg, const fs::path& out, int threads) {
  const std::int64_t n = cfg.get_int("n", 20);
  std::vector<double> alphas{0.8, 1.0, 2.0};
  if (cfg.has("alphas")) alphas = cfg.get_double_list("alphas");
  const std::int64_t grid_z = cfg.get_int("grid_z", 201);
  const std::int64_t grid_phi = cfg.get_int("grid_phi", 200);
  cfg.require_all_consumed();
  RG_REQUIRE(grid_z >= 2 && grid_phi >= 2, "portrait: grid too small");

  struct Panel {
    double alpha = 0.0;
    Eigen::MatrixXd grid;
    std::vector<EbkLevel> orbits;
  };
  std::vector<Panel> panels(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    Panel& p = panels[i];
    p.alpha = alphas[i];
    p.grid = phase_portrait_grid(p.alpha, grid_z, grid_phi);
    const ModelParams mp = ModelParams::from_scaled(n, p.alpha);
    p.orbits = ebk_spectrum(mp);
  });

  for (const Panel& p : panels) {
    const std::string tok = size_token(p.alpha);
    CsvMetadata meta = provenance("portrait", cfg);
    meta.add("alpha", p.alpha);
    meta.add("n", n);

    CsvFile grid_file(out / ("portrait_alpha" + tok + ".csv"));
    grid_file.metadata(meta);
    grid_file.columns("z", "phi", "omega");
    for (Eigen::Index i = 0; i < p.grid.rows(); ++i) {
      const double z = static_cast<double>(i) / static_cast<double>(p.grid.rows() - 1);
      for (Eigen::Index j = 0; j < p.grid.cols(); ++j) {
        const double phi = pi * static_cast<double>(j) / static_cast<double>(p.grid.cols());
        grid_file.row(z, phi, p.grid(i, j));
      }
    }
    grid_file.close();

    // Quantized orbits m = 0..floor(N/2) plus, above the transition, the
    // separatrix contour itself under orbit_id = -1.
    CsvFile contours(out / ("contours_alpha" + tok + ".csv"));
    meta.add("n_orbits", static_cast<std::int64_t>(p.orbits.size()));
    contours.metadata(meta);
    contours.columns("orbit_id", "orbit_class", "omega", "phi", "z", "branch");
    const auto polyline = [&](std::int64_t id, double w, const char* cls) {
      for (std::int64_t j = 0; j < grid_phi; ++j) {
        const double phi = pi * static_cast<double>(j) / static_cast<double>(grid_phi);
        const std::vector<ZBranch> roots = z_branches(w, phi, p.alpha);
        for (std::size_t b = 0; b < roots.size(); ++b) {
          if (!roots[b].physical) continue;
          contours.row(id, cls, w, phi, roots[b].z, static_cast<std::int64_t>(b));
        }
      }
    };
    for (const EbkLevel& lvl : p.orbits)
      polyline(lvl.m, lvl.omega, orbit_class_name(lvl.orbit_class));
    if (p.alpha > 1.0)
      polyline(-1, 0.0, orbit_class_name(OrbitClass::Separatrix));
    contours.close();
  }
  return 0;
}

/* --------------------------------------------------------------- spectrum */

int cmd_spectrum(const Config& cfg, const fs::path& out, int threads) {
  const std::int64_t n = cfg.get_int("n", 300);
  const double alpha_min = cfg.get_double("alpha_min", 0.0);
  const double alpha_max = cfg.get_double("alpha_max", 2.0);
  const std::int64_t alpha_count = cfg.get_int("alpha_count", 81);
  const std::int64_t m_max_req = cfg.get_int("m_max", 50);
  cfg.require_all_consumed();
  RG_REQUIRE(alpha_count >= 2 && alpha_max > alpha_min,
             "spectrum: need an increasing alpha range with >= 2 points");
  const std::int64_t m_max = std::min<std::int64_t>(m_max_req, n / 2);

  struct Slice {
    double alpha = 0.0;
    Eigen::VectorXd exact;             // m_max + 1 lowest exact levels
    std::vector<EbkLevel> semiclassical;
    double e_sep_rel = std::numeric_limits<double>::quiet_NaN();
    double min_gap = 0.0;
    std::int64_t min_gap_m = 0;  // gap between m and m+1
  };
  std::vector<Slice> slices(static_cast<std::size_t>(alpha_count));
  parallel_for(slices.size(), threads, [&](std::size_t i) {
    Slice& s = slices[i];
    s.alpha = alpha_min + (alpha_max - alpha_min) * static_cast<double>(i) /
                              static_cast<double>(alpha_count - 1);
    const ModelParams p = ModelParams::from_scaled(n, s.alpha);
    const TridiagonalHamiltonian h = tridiagonal_hamiltonian(p);
    s.exact = tridiag_eigenvalues_by_index(h.diag, h.off, 0,
                                           static_cast<int>(m_max));
    s.semiclassical.reserve(static_cast<std::size_t>(m_max) + 1);
    for (std::int64_t m = 0; m <= m_max; ++m)
      s.semiclassical.push_back(ebk_level(p, m));
    if (s.alpha > 1.0)
      s.e_sep_rel = separatrix_energy(s.alpha, p).energy - s.exact(0);
    s.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m + 1 < s.exact.size(); ++m) {
      const double gap = s.exact(m + 1) - s.exact(m);
      if (gap < s.min_gap) {
        s.min_gap = gap;
        s.min_gap_m = m;
      }
    }
  });

  CsvMetadata meta = provenance("spectrum", cfg);
  meta.add("n", n);
  meta.add("m_max", m_max);

  CsvFile levels(out / "spectrum.csv");
  levels.metadata(meta);
  levels.columns("alpha", "m", "e_exact_rel", "e_semiclassical_rel", "omega_m",
                 "orbit_class");
  for (const Slice& s : slices) {
    const double e0_sc = s.semiclassical[0].energy;
    for (std::int64_t m = 0; m <= m_max; ++m) {
      const EbkLevel& lvl = s.semiclassical[static_cast<std::size_t>(m)];
      levels.row(s.alpha, m, s.exact(m) - s.exact(0), lvl.energy - e0_sc,
                 lvl.omega, orbit_class_name(lvl.orbit_class));
    }
  }
  levels.close();

  CsvFile gaps(out / "spectrum_meta.csv");
  gaps.metadata(meta);
  gaps.columns("alpha", "e0_exact", "e_sep_rel", "min_gap", "min_gap_m");
  for (const Slice& s : slices)
    gaps.row(s.alpha, s.exact(0), s.e_sep_rel, s.min_gap, s.min_gap_m);
  gaps.close();
  return 0;
}

/* -------------------------------------------------------------------- dos */

int cmd_dos(const Config& cfg, const fs::path& out, int threads) {
  const std::int64_t n = cfg.get_int("n", 10000);
  const double alpha = cfg.get_double("alpha", 2.0);
  const std::int64_t gaps_window = cfg.get_int("gaps_window", 25);
  const double omega_abs_min = cfg.get_double("omega_abs_min", 1e-6);
  const double omega_abs_max = cfg.get_double("omega_abs_max", 0.05);
  const std::int64_t omega_count = cfg.get_int("omega_count", 50);
  cfg.require_all_consumed();
  RG_REQUIRE(alpha > 1.0, "dos: the separatrix exists only for alpha > 1");
  RG_REQUIRE(omega_count >= 2 && omega_abs_min > 0.0 &&
                 omega_abs_max > omega_abs_min,
             "dos: need an increasing positive |omega| range");
  RG_REQUIRE(gaps_window >= 2, "dos: gaps_window must be >= 2");

  const ModelParams p = ModelParams::from_scaled(n, alpha);
  const double e_sep = separatrix_energy(alpha, p).energy;

  // Formula vs measured density on a log-spaced grid, both orbit sides.
  std::vector<double> omegas;
  for (std::int64_t i = omega_count; i-- > 0;)
    omegas.push_back(-std::exp(std::log(omega_abs_min) +
                               (std::log(omega_abs_max) - std::log(omega_abs_min)) *
                                   static_cast<double>(i) /
                                   static_cast<double>(omega_count - 1)));
  for (std::int64_t i = 0; i < omega_count; ++i)
    omegas.push_back(std::exp(std::log(omega_abs_min) +
                              (std::log(omega_abs_max) - std::log(omega_abs_min)) *
                                  static_cast<double>(i) /
                                  static_cast<double>(omega_count - 1)));
  const double omega_floor = omega_min(alpha);
  std::vector<std::array<double, 4>> curve(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) {
    const double w = omegas[i];
    RG_REQUIRE(w > omega_floor, "dos: omega ", w, " below the island floor ",
               omega_floor);
    const double rho_formula = dos_asymptotic(e_sep + p.n_tilde * w, alpha, p);
    const double h = std::abs(w) / 64.0;
    const double rho_measured =
        (action_integral(w + h, alpha).action - action_integral(w - h, alpha).action) /
        (2.0 * h);
    curve[i] = {w, p.n_tilde * w, rho_formula, rho_measured};
  });

  CsvMetadata meta = provenance("dos", cfg);
  meta.add("n", n);
  meta.add("alpha", alpha);
  meta.add("lambda", dos_lambda(alpha));
  meta.add("e_sep", e_sep);

  CsvFile curve_file(out / "dos_curve.csv");
  curve_file.metadata(meta);
  curve_file.columns("omega", "e_minus_e_sep", "rho_formula", "rho_measured");
  for (const auto& r : curve) curve_file.row(r[0], r[1], r[2], r[3]);
  curve_file.close();

  // Inverse exact gaps around the separatrix index (Sturm window).
  const TridiagonalHamiltonian h = tridiagonal_hamiltonian(p);
  const int k_sep = count_below(h.diag, h.off, e_sep);
  const int lo = std::max(0, k_sep - static_cast<int>(gaps_window));
  const int hi = std::min(static_cast<int>(h.dim()) - 1,
                          k_sep + static_cast<int>(gaps_window));
  const Eigen::VectorXd levels =
      tridiag_eigenvalues_by_index(h.diag, h.off, lo, hi);

  CsvFile gaps_file(out / "dos_gaps.csv");
  meta.add("k_sep", k_sep);
  gaps_file.metadata(meta);
  gaps_file.columns("k", "e_minus_e_sep", "gap", "inv_gap");
  for (Eigen::Index i = 0; i + 1 < levels.size(); ++i) {
    const double gap = levels(i + 1) - levels(i);
    const double mid = 0.5 * (levels(i) + levels(i + 1)) - e_sep;
    gaps_file.row(lo + i - k_sep, mid, gap, 1.0 / gap);
  }
  gaps_file.close();
  return 0;
}

/* ----------------------------------------------------------------- ladder */

int cmd_ladder(const Config& cfg, const fs::path& out, int threads) {
  std::vector<double> sizes{1e6, 1e9, 1e13, 1e23, 1e42};
  if (cfg.has("sizes")) sizes = cfg.get_double_list("sizes");
  const double alpha = cfg.get_double("alpha", 2.0);
  const std::int64_t window = cfg.get_int("window", 12);
  cfg.require_all_consumed();

  std::vector<SeparatrixLadder> ladders(sizes.size());
  parallel_for(sizes.size(), threads, [&](std::size_t i) {
    const ModelParams p = params_for_size(sizes[i], alpha, 1);
    ladders[i] = separatrix_ladder(alpha, p, static_cast<int>(window));
  });

  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const SeparatrixLadder& lad = ladders[i];
    CsvMetadata meta = provenance("ladder", cfg);
    meta.add("size", sizes[i]);
    meta.add("alpha", lad.alpha);
    meta.add("n_tilde", lad.n_tilde);
    meta.add("lambda", lad.lambda);
    meta.add("e_sep", lad.e_sep);
    meta.add("tau", lad.tau);
    meta.add("delta_e_limit", lad.delta_e_limit);
    meta.add("route", ladder_route_name(lad.route));

    CsvFile file(out / ("ladder_N" + size_token(sizes[i]) + ".csv"));
    file.metadata(meta);
    // Levels are emitted relative to e_sep: at the sizes this command targets
    // the absolute energies are not representable in doubles without
    // swallowing the spacings, while the offsets stay exact.
    file.columns("k", "e_minus_e_sep", "spacing", "delta_e_limit",
                 "spacing_times_tau_over_two_pi");
    for (int k = -lad.window; k <= lad.window; ++k) {
      const double spacing = k > -lad.window
                                 ? lad.spacing(k)
                                 : std::numeric_limits<double>::quiet_NaN();
      file.row(k, lad.offset(k), spacing, lad.delta_e_limit,
               spacing * lad.tau / (2.0 * pi));
    }
    file.close();
  }
  return 0;
}

/* ------------------------------------------------------------------- otoc */

struct OtocRun {
  std::string label;
  int cutoff = 1;
  double size = 0.0;
  double alpha = 0.0;
  TimeGrid grid;
  bool entropy = true;
  double fit_t0 = 0.0, fit_t1 = 0.0;  // growth window; skipped unless t1 > t0
  double rev_t_min = 0.0;             // revival fit switched on when > 0
  double rev_threshold = 0.05;
  std::int64_t rev_smooth = 3;
};

int cmd_otoc(const Config& cfg, const fs::path& out, int threads) {
  std::vector<double> pair_sizes{100, 1000, 10000};
  if (cfg.has("sizes")) pair_sizes = cfg.get_double_list("sizes");
  const double alpha = cfg.get_double("alpha", 2.0);
  const double t_max = cfg.get_double("t_max", 6.0);
  const std::int64_t n_steps = cfg.get_int("n_steps", 300);
  const bool entropy = cfg.get_bool("entropy", true);
  const double fit_t0 = cfg.get_double("fit_t0", 0.5);
  const double fit_t1 = cfg.get_double("fit_t1", 1.5);
  const double rev_t_min = cfg.get_double("revival_t_min", 0.0);
  const double rev_threshold = cfg.get_double("revival_threshold", 0.05);
  const std::int64_t rev_smooth = cfg.get_int("revival_smooth", 3);
  const std::int64_t spectral_cap = cfg.get_int("spectral_cap", 6000);
  const double krylov_tolerance = cfg.get_double("krylov_tolerance", 1e-12);

  const bool five_mode = cfg.get_bool("five_mode", true);
  const double five_n = cfg.get_double("five_n", 30);
  const double five_alpha = cfg.get_double("five_alpha", 1.05);
  const double five_t_max = cfg.get_double("five_t_max", 90.0);
  const std::int64_t five_n_steps = cfg.get_int("five_n_steps", 450);
  // Detector defaults target the beat envelope of the small-sector series:
  // heavy smoothing suppresses the half-period comb the squared commutator
  // rides on, so the surviving maxima trace the recurrence period.
  const double five_rev_t_min = cfg.get_double("five_revival_t_min", 5.0);
  const double five_rev_threshold = cfg.get_double("five_revival_threshold", 0.2);
  const std::int64_t five_rev_smooth = cfg.get_int("five_revival_smooth", 31);
  cfg.require_all_consumed();

  std::vector<OtocRun> runs;
  for (const double size : pair_sizes) {
    OtocRun r;
    r.label = "pair_N" + size_token(size);
    r.cutoff = 1;
    r.size = size;
    r.alpha = alpha;
    r.grid = TimeGrid{t_max, n_steps};
    r.entropy = entropy;
    r.fit_t0 = fit_t0;
    r.fit_t1 = fit_t1;
    r.rev_t_min = rev_t_min;
    r.rev_threshold = rev_threshold;
    r.rev_smooth = rev_smooth;
    runs.push_back(r);
  }
  if (five_mode) {
    OtocRun r;
    r.label = "five_N" + size_token(five_n);
    r.cutoff = 2;
    r.size = five_n;
    r.alpha = five_alpha;
    r.grid = TimeGrid{five_t_max, five_n_steps};
    r.entropy = entropy;
    r.rev_t_min = five_rev_t_min;
    r.rev_threshold = five_rev_threshold;
    r.rev_smooth = five_rev_smooth;
    runs.push_back(r);
  }

  struct Result {
    OtocSeries series;
    std::optional<GrowthFit> growth;
    std::optional<RevivalFit> revival;
  };
  std::vector<Result> results(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const OtocRun& r = runs[i];
    OtocOptions opt;
    opt.with_entropy = r.entropy;
    opt.spectral_cap = spectral_cap;
    opt.krylov.tolerance = krylov_tolerance;
    const ModelParams p = params_for_size(r.size, r.alpha, r.cutoff);
    if (r.cutoff == 1) {
      const TridiagonalHamiltonian h = tridiagonal_hamiltonian(p);
      results[i].series = otoc_series(h, p, r.grid, opt);
    } else {
      const SparseHamiltonian h = sparse_hamiltonian(p, 0);
      results[i].series = otoc_series(h, r.grid, opt);
    }
    if (r.fit_t1 > r.fit_t0)
      results[i].growth = fit_growth_rate(results[i].series, r.fit_t0, r.fit_t1);
    if (r.rev_t_min > 0.0) {
      RevivalOptions ro;
      ro.t_min = r.rev_t_min;
      ro.threshold = r.rev_threshold;
      ro.smooth_window = static_cast<int>(r.rev_smooth);
      results[i].revival = fit_revival_period(results[i].series, ro);
    }
  });

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const OtocRun& r = runs[i];
    const Result& res = results[i];
    CsvMetadata meta = provenance("otoc", cfg);
    meta.add("run", r.label);
    meta.add("mode_cutoff", r.cutoff);
    meta.add("size", r.size);
    meta.add("alpha", r.alpha);

    CsvFile file(out / ("otoc_" + r.label + ".csv"));
    file.metadata(meta);
    if (r.entropy) {
      file.columns("t", "c", "s");
      for (std::size_t j = 0; j < res.series.times.size(); ++j)
        file.row(res.series.times[j], res.series.c_values[j],
                 res.series.entropy[j]);
    } else {
      file.columns("t", "c");
      for (std::size_t j = 0; j < res.series.times.size(); ++j)
        file.row(res.series.times[j], res.series.c_values[j]);
    }
    file.close();

    // Key-value fit report; parseable by the same config reader.
    std::ofstream report(out / ("otoc_" + r.label + "_fit.txt"));
    RG_REQUIRE(report.good(), "cannot open fit report for ", r.label);
    for (const auto& [key, value] : meta.entries())
      report << "# " << key << " = " << value << "\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report << "rate = " << format_double(res.growth ? res.growth->rate : nan)
           << "\n";
    report << "r_squared = "
           << format_double(res.growth ? res.growth->r_squared : nan) << "\n";
    report << "period = "
           << format_double(res.revival ? res.revival->period : nan) << "\n";
    report << "fourier_period = "
           << format_double(res.revival ? res.revival->fourier_period : nan)
           << "\n";
    report << "peak_times =";
    if (res.revival) {
      for (std::size_t j = 0; j < res.revival->peak_times.size(); ++j)
        report << (j == 0 ? " " : ", ")
               << format_double(res.revival->peak_times[j]);
    }
    report << "\n";
    report.flush();
    RG_REQUIRE(report.good(), "write failure in fit report for ", r.label);
  }
  return 0;
}

/* ---------------------------------------------------------------- scaling */

int cmd_scaling(const Config& cfg, const fs::path& out, int threads) {
  std::vector<std::int64_t> sizes{100, 1000, 10000, 100000};
  if (cfg.has("sizes")) sizes = cfg.get_int_list("sizes");
  const double offset_lo = cfg.get_double("alpha_offset_lo", 3e-5);
  const double offset_hi = cfg.get_double("alpha_offset_hi", 0.45);
  const std::int64_t alpha_count = cfg.get_int("alpha_count", 48);
  cfg.require_all_consumed();
  RG_REQUIRE(alpha_count >= 3 && offset_lo > 0.0 && offset_hi > offset_lo,
             "scaling: need >= 3 grid points over a positive offset range");

  std::vector<double> grid;
  for (std::int64_t i = 0; i < alpha_count; ++i)
    grid.push_back(1.0 + std::exp(std::log(offset_lo) +
                                  (std::log(offset_hi) - std::log(offset_lo)) *
                                      static_cast<double>(i) /
                                      static_cast<double>(alpha_count - 1)));

  std::vector<GapScalingPoint> points(sizes.size());
  parallel_for(sizes.size(), threads, [&](std::size_t i) {
    points[i] = gap_scaling_point(sizes[i], grid);
  });
  const GapScalingFit fit = gap_scaling_fit(points);

  CsvMetadata meta = provenance("scaling", cfg);
  meta.add("exponent_alpha", fit.exponent_alpha);
  meta.add("stderr_alpha", fit.stderr_alpha);
  meta.add("ci95_alpha_lo", fit.exponent_alpha - 1.96 * fit.stderr_alpha);
  meta.add("ci95_alpha_hi", fit.exponent_alpha + 1.96 * fit.stderr_alpha);
  meta.add("r_squared_alpha", fit.r_squared_alpha);
  meta.add("exponent_e", fit.exponent_e);
  meta.add("stderr_e", fit.stderr_e);
  meta.add("ci95_e_lo", fit.exponent_e - 1.96 * fit.stderr_e);
  meta.add("ci95_e_hi", fit.exponent_e + 1.96 * fit.stderr_e);
  meta.add("r_squared_e", fit.r_squared_e);

  CsvFile file(out / "scaling.csv");
  file.metadata(meta);
  file.columns("n", "alpha_min", "e_gap");
  for (const GapScalingPoint& p : fit.points) file.row(p.n, p.alpha_min, p.e_gap);
  file.close();

  std::ofstream report(out / "scaling_fit.txt");
  RG_REQUIRE(report.good(), "cannot open scaling_fit.txt");
  for (const auto& [key, value] : meta.entries())
    if (key.rfind("config.", 0) == 0 || key == "command" || key == "version")
      report << "# " << key << " = " << value << "\n";
  report << "exponent_alpha = " << format_double(fit.exponent_alpha) << "\n"
         << "stderr_alpha = " << format_double(fit.stderr_alpha) << "\n"
         << "ci95_alpha_lo = "
         << format_double(fit.exponent_alpha - 1.96 * fit.stderr_alpha) << "\n"
         << "ci95_alpha_hi = "
         << format_double(fit.exponent_alpha + 1.96 * fit.stderr_alpha) << "\n"
         << "r_squared_alpha = " << format_double(fit.r_squared_alpha) << "\n"
         << "exponent_e = " << format_double(fit.exponent_e) << "\n"
         << "stderr_e = " << format_double(fit.stderr_e) << "\n"
         << "ci95_e_lo = "
         << format_double(fit.exponent_e - 1.96 * fit.stderr_e) << "\n"
         << "ci95_e_hi = "
         << format_double(fit.exponent_e + 1.96 * fit.stderr_e) << "\n"
         << "r_squared_e = " << format_double(fit.r_squared_e) << "\n";
  report.flush();
  RG_REQUIRE(report.good(), "write failure in scaling_fit.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ring-gas semiclassics and scrambling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 1;
  std::string out_dir = ".";

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file")
        ->required();
    sub->add_option("--set", overrides, "override, key=value (later wins)");
    sub->add_option("--threads", threads, "worker pool size for sweep points");
    sub->add_option("--out", out_dir, "output directory");
  };
  CLI::App* portrait = app.add_subcommand("portrait", "phase-space energy maps");
  CLI::App* spectrum = app.add_subcommand("spectrum", "exact vs semiclassical levels");
  CLI::App* dos = app.add_subcommand("dos", "near-separatrix density of states");
  CLI::App* ladder = app.add_subcommand("ladder", "equidistant level ladders");
  CLI::App* otoc = app.add_subcommand("otoc", "correlator growth and revivals");
  CLI::App* scaling = app.add_subcommand("scaling", "minimal-gap finite-size scaling");
  for (CLI::App* sub : {portrait, spectrum, dos, ladder, otoc, scaling})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;     // bad invocation is a configuration error
  }

  try {
    Config cfg = load_config(config_path);
    for (const std::string& assignment : overrides)
      apply_override(cfg, assignment);
    const fs::path out(out_dir);
    fs::create_directories(out);

    if (portrait->parsed()) return cmd_portrait(cfg, out, threads);
    if (spectrum->parsed()) return cmd_spectrum(cfg, out, threads);
    if (dos->parsed()) return cmd_dos(cfg, out, threads);
    if (ladder->parsed()) return cmd_ladder(cfg, out, threads);
    if (otoc->parsed()) return cmd_otoc(cfg, out, threads);
    if (scaling->parsed()) return cmd_scaling(cfg, out, threads);
    std::fprintf(stderr, "error: no command selected\n");
    return 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
