#include "higgsflow/runner.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "higgsflow/current.hpp"
#include "higgsflow/diagnostics.hpp"
#include "higgsflow/embed.hpp"
#include "higgsflow/field_state.hpp"
#include "higgsflow/flow.hpp"
#include "higgsflow/io.hpp"
#include "higgsflow/lattice.hpp"
#include "higgsflow/profile.hpp"
#include "higgsflow/util.hpp"

namespace higgsflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string now_iso() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Per-transverse-level magnetic flux of the (0,1)-plane curvature, reported as
// the worst deviation from 2π·q across levels.  For n = 2 there is one level.
double worst_flux_deviation(const TorusLattice& lat, const PlaqField& omega, int q) {
    const double target = kTwoPi * static_cast<double>(q);
    const double hh = lat.h * lat.h;
    const int levels = (lat.n == 3) ? lat.N[2] : 1;
    const int per = lat.N[0] * lat.N[1];
    double worst = 0.0;
    for (int lev = 0; lev < levels; ++lev) {
        const double flux = hh * pairwise_sum(omega[0].data() + lev * per,
                                              static_cast<std::size_t>(per));
        worst = std::max(worst, std::abs(flux - target));
    }
    return worst;
}

// Pointwise Euclidean-norm domination and mass/energy totals computed from an
// already-derived density set (avoids re-deriving inside the sample loop).
struct DominationSample {
    double max_excess = 0.0;    // max over sites of |J| − e
    double mass_over_2pi = 0.0;
    double energy_over_2pi = 0.0;
};

// Energy mass of the ball of radius r around a physical point, with wrapped
// coordinate differences.
double ball_energy(const TorusLattice& lat, const std::vector<double>& e,
                   const std::array<double, 3>& c, double r) {
    const double hn = std::pow(lat.h, lat.n);
    const double r_sq = r * r;
    double sum = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) {
        const std::array<int, 3> ix = lat.coords(x);
        double d_sq = 0.0;
        for (int ax = 0; ax < lat.n; ++ax) {
            const double dx = wrap_delta(ix[ax] * lat.h - c[ax], lat.L[ax]);
            d_sq += dx * dx;
        }
        if (d_sq <= r_sq) sum += e[x];
    }
    return hn * sum;
}

DominationSample domination_from_densities(const TorusLattice& lat, const DerivedDensities& d) {
    DominationSample out;
    const std::size_t ns = static_cast<std::size_t>(lat.num_sites);
    std::vector<double> mag(ns);
    for (std::size_t x = 0; x < ns; ++x) {
        double s2 = 0.0;
        for (int p = 0; p < lat.plane_count(); ++p) {
            const double v = d.J_site[p][x];
            s2 += v * v;
        }
        const double m = std::sqrt(s2);
        mag[x] = m;
        out.max_excess = std::max(out.max_excess, m - d.e[x]);
    }
    const double hn = std::pow(lat.h, lat.n);
    out.mass_over_2pi = hn * pairwise_sum(mag) / kTwoPi;
    out.energy_over_2pi = d.E / kTwoPi;
    return out;
}

struct SampleRecord {
    double t = 0.0;
    double energy = 0.0;
    double max_xi = 0.0;
    double max_abs_u = 0.0;
    double dissipation_cum = 0.0;
    double residual_cum = 0.0;
    double equipartition = 0.0;
    long marked_plaquettes = 0;
    double ring_radius = 0.0;   // 0 when not tracked / extinct
    double ring_spread = 0.0;
    double slice_degree = 0.0;  // twisted runs: mean section flux / 2π
    double mu_phi = 0.0;
    double excess = 0.0;        // pointwise |J| − e maximum
};

void put_check(RunManifest& man, const std::string& name, double value, bool pass,
               const std::string& note = {}) {
    man.checks.push_back({name, value, pass, note});
    std::string line = (pass ? "pass " : "fail ") + fmt(value);
    if (!note.empty()) line += "  # " + note;
    man.meta["check." + name] = line;
}

}  // namespace

bool RunManifest::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

RunManifest run_preset(const RunConfig& cfg) {
    validate_config(cfg);
    const auto wall_start = std::chrono::steady_clock::now();

    RunManifest man;
    man.directory = cfg.out_dir.empty() ? ("run_" + cfg.preset) : cfg.out_dir;
    std::filesystem::create_directories(man.directory);
    const std::filesystem::path dir(man.directory);

    for (const auto& [k, v] : config_entries(cfg)) man.meta["config." + k] = v;
    man.meta["run.format"] = "higgsflow-manifest 1";
    man.meta["run.start"] = now_iso();
    {
        std::ofstream echo(dir / "config.txt");
        echo << serialize_config(cfg);
    }

    // --- lattice, background profile, initial data -------------------------
    const long cut1 = (cfg.q != 0 && cfg.n == 3) ? twist_cut_index(cfg.sites) : 0;
    const TorusLattice lat = build_lattice(cfg.n, {cfg.sites, cfg.sites, cfg.sites},
                                           {cfg.extent, cfg.extent, cfg.extent}, cfg.q, cut1);

    CycleSpec spec;
    if (cfg.preset == "vacuum") {
        spec.kind = CycleKind::vacuum;
    } else if (cfg.preset == "planar_vortex") {
        spec.kind = CycleKind::planar_point;
        spec.degree = cfg.degree;
    } else if (cfg.preset == "line_twisted") {
        spec.kind = CycleKind::straight_line;
        spec.degree = cfg.degree;
    } else if (cfg.preset == "vortex_ring") {
        spec.kind = CycleKind::circle;
        spec.degree = cfg.degree;
        spec.radius = cfg.radius;
    } else {
        throw std::invalid_argument("run_preset: unknown preset '" + cfg.preset + "'");
    }
    EmbedPolicy policy;
    if (cfg.allow_tight_ring) policy.min_radius_in_eps = EmbedPolicy::hard_floor_in_eps;

    VortexProfile profile = (spec.kind == CycleKind::vacuum)
                                ? make_vacuum_branch_profile()
                                : solve_bogomolny(spec.degree);
    FieldState st = embed_cycle(lat, profile, spec, cfg.eps, policy);
    const std::array<double, 3> center = resolve_cycle_center(lat, spec);

    const bool twisted = (cfg.preset == "planar_vortex" || cfg.preset == "line_twisted");
    const bool ring = (cfg.preset == "vortex_ring");

    // Localization bump for the measure/force-balance probes.
    const double sigma = cfg.extent / 8.0;
    const std::vector<double> phi = gaussian_bump(lat, center, sigma);
    const double phi_rate = test_function_rate(lat, phi);

    // Backward-heat weight horizon: rings use the predicted extinction time so
    // the weight tracks the collapsing core; other presets look just past the
    // end of the run.
    const double heat_T = ring ? 0.5 * cfg.radius * cfg.radius : cfg.t_end + cfg.sample_every;

    // --- recording state ----------------------------------------------------
    std::vector<SampleRecord> rows;
    std::vector<double> times, mu_series, rhs_series;       // force-balance pairing
    std::vector<double> gauss_s, gauss_base;                // backward-heat integrals
    std::vector<RingLawPoint> ring_series;
    SpacetimeCurrent current;
    std::vector<FieldState> retained;   // decimated copies for the clearing probe
    std::vector<double> retained_t;
    double worst_flux_dev = 0.0;
    double max_abs_u_all = 0.0;
    double max_excess_all = 0.0;
    double worst_mass_gap = 0.0;        // mass/2π − energy/2π maximum
    double post_t0_max_xi = 0.0;
    double post_t0_xi_increase = 0.0;   // largest upward step of max ξ after t0
    double prev_max_xi = -1.0;
    long degenerate_samples = 0;
    std::vector<double> slice_degrees;  // twisted: per-sample mean section flux / 2π
    std::vector<double> decay_slopes, decay_r2;
    long decay_fits = 0, decay_empty = 0, decay_skipped = 0;
    bool wrote_midrun_image = false;

    std::vector<std::string> series_cols = {
        "t", "energy", "max_xi", "max_abs_u", "dissipation_cum", "residual_cum",
        "equipartition", "marked_plaquettes", "ring_radius", "ring_spread",
        "slice_degree", "mu_phi", "pointwise_excess"};
    CsvWriter series_csv((dir / "series.csv").string(), series_cols);
    std::optional<CsvWriter> decay_csv;
    if (cfg.diag_decay)
        decay_csv.emplace((dir / "decay.csv").string(),
                          std::vector<std::string>{"t", "slope", "intercept", "r2", "points",
                                                   "floor", "window_lo", "window_hi"});

    long snap_count = 0;
    const double grid_tol = 1e-9 * (1.0 + std::abs(cfg.t_end));

    SampleSink sink = [&](const FieldState& s, const RhsFields& vel, const EvolveTotals& tot) {
        const double t = s.time;
        const DerivedDensities d = derive_densities(lat, s);

        const bool on_grid = [&] {
            if (times.empty()) return true;
            const double rel = (t - times.front()) / cfg.sample_every;
            return std::abs(rel - std::llround(rel)) * cfg.sample_every <= grid_tol;
        }();

        SampleRecord r;
        r.t = t;
        r.energy = d.E;
        r.max_xi = d.max_xi;
        r.max_abs_u = d.max_abs_u;
        r.dissipation_cum = tot.dissipation_cum;
        r.residual_cum = tot.residual_cum;
        {
            const double hn = std::pow(lat.h, lat.n);
            std::vector<double> absXi(d.Xi_defect.size());
            for (std::size_t i = 0; i < absXi.size(); ++i) absXi[i] = std::abs(d.Xi_defect[i]);
            r.equipartition = hn * pairwise_sum(absXi);
        }
        max_abs_u_all = std::max(max_abs_u_all, d.max_abs_u);
        worst_flux_dev = std::max(worst_flux_dev, worst_flux_deviation(lat, d.omega, lat.bg.q));

        const DominationSample dom = domination_from_densities(lat, d);
        r.excess = dom.max_excess;
        max_excess_all = std::max(max_excess_all, dom.max_excess);
        worst_mass_gap = std::max(worst_mass_gap, dom.mass_over_2pi - dom.energy_over_2pi);

        // Vortex set and geometry.
        const VortexSet vs = extract_vortex_set(lat, s);
        r.marked_plaquettes = static_cast<long>(vs.marked.size());
        for (const auto& p : vs.marked) degenerate_samples += p.degenerate ? 1 : 0;
        if (ring) {
            const RingRadiusEstimate est = ring_radius_estimate(lat, vs, center);
            r.ring_radius = est.mean_radius;
            r.ring_spread = est.spread;
            ring_series.push_back({t, est.mean_radius, est.spread, est.count});
        }

        // Measure and force-balance series (uniform-cadence consumers).
        if (on_grid) {
            times.push_back(t);
            r.mu_phi = localized_mass(lat, s, phi);
            mu_series.push_back(r.mu_phi);
            if (cfg.diag_brakke) rhs_series.push_back(brakke_rhs(lat, s, vel, phi));
            if (cfg.diag_current) {
                const SpacetimeSample cs = sample_current(lat, s, vel);
                if (twisted) {
                    const double deg = [&] {
                        // mean section flux of the (0,1)-plane component / 2π
                        const double hh = lat.h * lat.h;
                        const int levels = (lat.n == 3) ? lat.N[2] : 1;
                        const int per = lat.N[0] * lat.N[1];
                        double acc = 0.0;
                        for (int lev = 0; lev < levels; ++lev)
                            acc += hh * pairwise_sum(cs.J_spatial[0].data() + lev * per,
                                                     static_cast<std::size_t>(per));
                        return acc / (kTwoPi * static_cast<double>(levels));
                    }();
                    r.slice_degree = deg;
                    slice_degrees.push_back(deg);
                }
                current.append(cs);
            }
            if (cfg.diag_monotonicity && t > 1e-12 && t < heat_T - 0.5 * cfg.sample_every &&
                heat_T - t <= 0.25 * std::pow(lat.L[0], 2)) {
                const std::vector<double> K = heat_kernel_field(lat, heat_T - t, center);
                std::vector<double> Ke(K.size());
                for (std::size_t i = 0; i < K.size(); ++i) Ke[i] = K[i] * d.e[i];
                const double hn = std::pow(lat.h, lat.n);
                gauss_s.push_back(t);
                gauss_base.push_back(hn * pairwise_sum(Ke));
            }
            if (cfg.diag_clearing && (times.size() - 1) % 4 == 0) {
                retained.push_back(s);
                retained_t.push_back(t);
            }
        }

        // Discrepancy trend bookkeeping past the transient.
        if (t >= cfg.t0 - 1e-12) {
            post_t0_max_xi = std::max(post_t0_max_xi, d.max_xi);
            if (prev_max_xi >= 0.0)
                post_t0_xi_increase = std::max(post_t0_xi_increase, d.max_xi - prev_max_xi);
            prev_max_xi = d.max_xi;
        }

        // Exponential-decay fit away from the vortex region.
        if (cfg.diag_decay && t >= cfg.t0 - 1e-12) {
            const DecayFit f = decay_fit(lat, s, cfg.beta);
            if (f.decayed_everywhere) {
                ++decay_empty;
            } else if (f.points >= 4) {
                ++decay_fits;
                decay_slopes.push_back(f.fit.slope);
                decay_r2.push_back(f.fit.r2);
                decay_csv->write_row(std::array<double, 8>{
                    t, f.fit.slope, f.fit.intercept, f.fit.r2,
                    static_cast<double>(f.points), f.floor, f.window_lo, f.window_hi});
            } else {
                ++decay_skipped;
            }
        }

        series_csv.write_row(std::array<double, 13>{
            r.t, r.energy, r.max_xi, r.max_abs_u, r.dissipation_cum, r.residual_cum,
            r.equipartition, static_cast<double>(r.marked_plaquettes), r.ring_radius,
            r.ring_spread, r.slice_degree, r.mu_phi, r.excess});
        rows.push_back(r);

        if (cfg.snapshot_every > 0 &&
            (rows.size() - 1) % static_cast<std::size_t>(cfg.snapshot_every) == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "state_%04ld.bin", snap_count++);
            write_snapshot((dir / name).string(), lat, s);
        }
        if (cfg.write_images && !wrote_midrun_image && t >= 0.5 * cfg.t_end) {
            write_pgm_slice((dir / "energy_mid.pgm").string(), lat, d.e,
                            lat.n == 3 ? lat.N[2] / 2 : 0);
            wrote_midrun_image = true;
        }
    };

    // --- evolve -------------------------------------------------------------
    FlowParams fp;
    fp.dt_factor = cfg.dt_factor;
    fp.t_end = cfg.t_end;
    fp.sample_every = cfg.sample_every;
    fp.integrator = (cfg.integrator == "rk4") ? FlowParams::Integrator::rk4
                                              : FlowParams::Integrator::euler;

    try {
        evolve(lat, st, fp, sink);
    } catch (const FlowAbort& abort) {
        man.aborted = true;
        man.meta["run.aborted"] = "true";
        man.meta["run.abort_reason"] = abort.what();
        man.meta["run.end"] = now_iso();
        series_csv.close();
        if (decay_csv) decay_csv->close();
        write_manifest((dir / "manifest.txt").string(), man.meta);
        throw;
    }
    man.meta["run.aborted"] = "false";

    write_snapshot((dir / "state_final.bin").string(), lat, st);
    const DerivedDensities df = derive_densities(lat, st);
    if (cfg.write_images)
        write_pgm_slice((dir / "energy_final.pgm").string(), lat, df.e,
                        lat.n == 3 ? lat.N[2] / 2 : 0);

    const double E0 = rows.front().energy;
    const double Ef = rows.back().energy;
    man.meta["result.energy_initial"] = fmt(E0);
    man.meta["result.energy_final"] = fmt(Ef);
    man.meta["result.samples"] = std::to_string(rows.size());

    // --- post-run checks ----------------------------------------------------

    // Energy bookkeeping: dissipation accounting closes to machine-level
    // quadrature error, and the energy never increases between samples.
    put_check(man, "dissipation_residual", rows.back().residual_cum,
              rows.back().residual_cum <= 1e-6 * std::max(E0, 1.0),
              "|E(0)-E(t)-cumulative dissipation|");
    {
        double worst_rise = 0.0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            worst_rise = std::max(worst_rise, rows[k].energy - rows[k - 1].energy);
        put_check(man, "energy_nonincreasing", worst_rise,
                  worst_rise <= 1e-10 * std::max(E0, 1.0));
    }

    // Gauge invariance spot check with a rough random site-wise phase.
    {
        SplitMix64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
        std::vector<double> chi(st.u.size());
        for (double& c : chi) c = rng.uniform(-3.0, 3.0);
        FieldState gt = gauge_transform(lat, st, chi);
        const DerivedDensities dg = derive_densities(lat, gt);
        const double rel = std::abs(dg.E - df.E) / std::max(1.0, df.E);
        put_check(man, "gauge_invariance", rel, rel <= 1e-10);
    }

    put_check(man, "max_principle", max_abs_u_all, max_abs_u_all <= 1.0 + 1e-8,
              "sup |u| over all samples");
    put_check(man, "flux_quantization", worst_flux_dev, worst_flux_dev <= 1e-9,
              "per-section magnetic flux vs 2*pi*q");
    put_check(man, "pointwise_domination", max_excess_all, max_excess_all <= 1e-8,
              "max over sites of |J| - e");
    put_check(man, "mass_domination", worst_mass_gap, worst_mass_gap <= 1e-10,
              "total |J|/2pi minus energy/2pi");

    // Localized measure decays up to the controlled rate.
    {
        const SemidecreasingReport sr =
            semidecreasing_probe(times, mu_series, phi_rate * std::max(E0, 1e-12),
                                 1e-3 * std::max(E0, 1e-12));
        put_check(man, "semidecreasing_measure", sr.max_violation, sr.ok,
                  "mu(phi) + rate*t nonincreasing");
    }

    if (cfg.diag_brakke && rhs_series.size() >= 3) {
        const BrakkeResidualReport br = eps_brakke_residual(
            times, mu_series, rhs_series, 1e-6 * (1.0 + E0));
        put_check(man, "brakke_residual", br.max_residual, br.max_residual <= 3e-2,
                  "d/dt mu(phi) vs dissipation + stress transport");
        man.meta["result.brakke_residual"] = fmt(br.max_residual);
    }

    if (cfg.diag_monotonicity) {
        if (gauss_s.size() >= 4) {
            const MonotonicityReport mr = monotonicity_report(
                gauss_s, gauss_base, heat_T, E0, cfg.c_grid);
            put_check(man, "almost_monotonicity",
                      mr.found ? mr.C : -1.0, mr.found,
                      mr.found ? ("C = " + fmt_short(mr.C)) : "no admissible constant");
            if (mr.found) man.meta["result.monotonicity_C"] = fmt(mr.C);
        } else {
            put_check(man, "almost_monotonicity", 0.0, true, "too few weighted samples; skipped");
        }
    }

    // Scenario-specific checks.
    if (cfg.preset == "vacuum") {
        put_check(man, "vacuum_energy", Ef, Ef <= 1e-12, "energy of the vacuum branch");
    }
    if (cfg.preset == "planar_vortex") {
        const double deg_e = Ef / kTwoPi;
        put_check(man, "planar_energy_level", deg_e,
                  std::abs(deg_e - static_cast<double>(cfg.degree)) <= 1e-2 * cfg.degree,
                  "final energy / 2pi vs degree");
        put_check(man, "planar_xi_decreasing", post_t0_xi_increase,
                  post_t0_xi_increase <= 1e-3 * std::max(post_t0_max_xi, 1e-12),
                  "max xi nonincreasing after the transient");
    }
    if (twisted && cfg.diag_quantization) {
        const QuantizationReport qr = transverse_quantization(lat, st);
        CsvWriter qcsv((dir / "quantization.csv").string(),
                       std::vector<std::string>{"level", "flux_degree", "energy_degree",
                                                "winding", "skipped_tangent"});
        for (const auto& sec : qr.sections)
            qcsv.write_row(std::array<double, 5>{
                static_cast<double>(sec.index), sec.flux_degree, sec.energy_degree,
                static_cast<double>(sec.winding), sec.skipped_tangent ? 1.0 : 0.0});
        qcsv.close();
        put_check(man, "section_flux_degree", qr.max_flux_deviation,
                  qr.max_flux_deviation <= 1e-3, "|flux/2pi - q| worst section");
        put_check(man, "section_energy_degree", qr.max_energy_deviation,
                  qr.max_energy_deviation <= 5e-2 * std::max(cfg.q, 1),
                  "|energy/2pi - q| worst section");
        if (!slice_degrees.empty()) {
            double dev = 0.0;
            for (double v : slice_degrees) dev = std::max(dev, std::abs(v - lat.bg.q));
            put_check(man, "slice_degree_constancy", dev, dev <= 1e-3,
                      "Jacobian section degree across all samples");
        }
    }
    if (ring) {
        CsvWriter rcsv((dir / "ring.csv").string(),
                       std::vector<std::string>{"t", "radius", "spread", "count", "law"});
        for (const auto& p : ring_series) {
            const double law2 = cfg.radius * cfg.radius - 2.0 * p.t;
            rcsv.write_row(std::array<double, 5>{p.t, p.radius, p.spread,
                                                 static_cast<double>(p.count),
                                                 law2 > 0.0 ? std::sqrt(law2) : 0.0});
        }
        rcsv.close();
        const RingLawReport rl = ring_law_check(ring_series, cfg.radius, 4.0 * cfg.eps);
        put_check(man, "ring_radius_law", rl.max_rel_error,
                  rl.checked == 0 || rl.max_rel_error <= 5e-2,
                  rl.checked == 0 ? "no samples above the comparison floor"
                                  : "max relative radius error while r >= 4*eps");
        const double t_pred = rl.predicted_extinction;
        if (cfg.t_end >= 1.1 * t_pred) {
            const bool found = rl.extinct;
            const double err = found ? std::abs(rl.extinction_time - t_pred) / t_pred : 1.0;
            put_check(man, "ring_extinction", found ? rl.extinction_time : -1.0,
                      found && err <= 0.1,
                      "extinction vs r0^2/2 = " + fmt_short(t_pred));
        }
        man.meta["result.ring_checked"] = std::to_string(rl.checked);
    }

    if (cfg.diag_current && current.samples().size() >= 3) {
        const double t_lo = std::max(times.front(), cfg.t0);
        const ClosednessReport cl = closedness_residual(lat, current, t_lo, times.back());
        put_check(man, "current_closedness", cl.max_residual, cl.max_residual <= 5e-2,
                  "spacetime cube sums, centered time window");
        man.meta["result.closedness"] = fmt(cl.max_residual);
        const double curv_cl = curvature_closedness(lat, st);
        put_check(man, "curvature_closedness", curv_cl, curv_cl <= 1e-10,
                  "pure-space exterior derivative of the total curvature");

        // Spacetime mass in disjoint time windows against the length bound.
        if (times.back() - t_lo > 8.0 * cfg.sample_every) {
            const double S = times.back() - t_lo;
            CsvWriter wcsv((dir / "windows.csv").string(),
                           std::vector<std::string>{"t_lo", "t_hi", "length", "mass_over_2pi",
                                                    "bound", "pairs"});
            bool all_ok = true;
            double worst_gap = -1e300;
            int used = 0;
            for (int k = 0; k < 4; ++k) {
                const std::array<double, 2> win{t_lo + (0.1 + 0.2 * k) * S,
                                                t_lo + (0.2 + 0.2 * k) * S};
                const WindowMassReport wm =
                    window_mass_check(lat, current, std::span(&win, 1), E0);
                wcsv.write_row(std::array<double, 6>{win[0], win[1], wm.length,
                                                     wm.mass_over_2pi, wm.bound,
                                                     static_cast<double>(wm.pairs)});
                if (!wm.skipped) {
                    ++used;
                    all_ok = all_ok && wm.pass;
                    worst_gap = std::max(worst_gap, wm.mass_over_2pi - wm.bound);
                }
            }
            wcsv.close();
            put_check(man, "window_mass_bound", used > 0 ? worst_gap : 0.0,
                      all_ok && used > 0,
                      "spacetime current mass vs length bound, 4 disjoint windows");
        }
        if (ring && lat.n == 3) {
            const double before = disk_crossing_degree(lat, current, t_lo, center);
            const double after = disk_crossing_degree(lat, current, times.back(), center);
            put_check(man, "ring_disk_crossing", before,
                      std::abs(before - 1.0) <= 0.2 && std::abs(after) <= 0.2,
                      "transverse half-plane crossing before vs after extinction (after = " +
                          fmt_short(after) + ")");
        }
        {
            CsvWriter jcsv((dir / "jacobian_sparse.csv").string(),
                           std::vector<std::string>{"t", "plane", "i0", "i1", "i2", "value"});
            append_sparse_plaquettes(jcsv, lat, times.back(),
                                     current.samples().back().J_spatial);
            jcsv.close();
        }
    }

    if (cfg.diag_decay) {
        decay_csv->close();
        if (decay_fits > 0) {
            const double worst_slope = *std::max_element(decay_slopes.begin(), decay_slopes.end());
            const double worst_r2 = *std::min_element(decay_r2.begin(), decay_r2.end());
            put_check(man, "decay_slope", worst_slope, worst_slope <= -0.4,
                      "log-energy slope per unit distance/eps, worst sample");
            put_check(man, "decay_fit_quality", worst_r2, worst_r2 >= 0.9);
            double mean_slope = 0.0;
            for (double v : decay_slopes) mean_slope += v;
            mean_slope /= static_cast<double>(decay_slopes.size());
            man.meta["result.decay_slope_mean"] = fmt(mean_slope);
        } else {
            put_check(man, "decay_slope", 0.0, true,
                      decay_empty > 0 ? "field decayed everywhere; nothing to fit"
                                      : "no usable fit windows");
        }
        man.meta["result.decay_fits"] = std::to_string(decay_fits);
        man.meta["result.decay_skipped"] = std::to_string(decay_skipped);
    }

    if (cfg.diag_clearing && retained.size() >= 3) {
        std::vector<double> radii;
        for (double r = 2.0 * lat.h; r <= 0.25 * lat.L[0] + 1e-12; r += 2.0 * lat.h)
            radii.push_back(r);
        const ClearingOutReport cr = clearing_out_probe(
            lat, retained, retained_t, cfg.eta_grid, cfg.c_grid, radii, 64, cfg.seed);
        put_check(man, "clearing_out", cr.frontier_eta, true,
                  cr.any_conclusive ? "largest fully-conclusive density threshold"
                                    : "no conclusive row at this scale");
        man.meta["result.clearing_frontier"] = fmt(cr.frontier_eta);
    }

    // Summary values consumed by compare_runs.
    man.meta["result.max_xi_post_t0"] = fmt(post_t0_max_xi);
    man.meta["result.equipartition_final"] = fmt(rows.back().equipartition);
    {
        // Final-state density concentration: sup over ball radii of
        // mass(B_r)/r^(n-2) divided by the total energy.
        double sup_ratio = 0.0;
        const double denom = std::max(Ef, 1e-12);
        for (double r = 2.0 * lat.h; r <= 0.25 * lat.L[0] + 1e-12; r += 2.0 * lat.h) {
            const double m = ball_energy(lat, df.e, center, r);
            const double scale = (lat.n == 3) ? r : 1.0;
            sup_ratio = std::max(sup_ratio, m / (scale * denom));
        }
        man.meta["result.density_sup_ratio"] = fmt(sup_ratio);
    }
    man.meta["result.degenerate_plaquettes"] = std::to_string(degenerate_samples);

    const auto wall_end = std::chrono::steady_clock::now();
    man.meta["run.wall_seconds"] =
        fmt_short(std::chrono::duration<double>(wall_end - wall_start).count());
    man.meta["run.end"] = now_iso();
    man.meta["run.all_pass"] = man.all_pass() ? "true" : "false";

    series_csv.close();
    write_manifest((dir / "manifest.txt").string(), man.meta);
    return man;
}

// ---------------------------------------------------------------------------
// Cross-run comparison

namespace {

double meta_num(const std::map<std::string, std::string>& m, const std::string& key,
                const std::string& path) {
    const auto it = m.find(key);
    if (it == m.end())
        throw std::runtime_error("compare_runs: manifest " + path + " lacks " + key);
    return std::stod(it->second);
}

std::string meta_str(const std::map<std::string, std::string>& m, const std::string& key,
                     const std::string& path) {
    const auto it = m.find(key);
    if (it == m.end())
        throw std::runtime_error("compare_runs: manifest " + path + " lacks " + key);
    return it->second;
}

}  // namespace

CompareReport compare_runs(std::span<const std::string> manifest_paths) {
    if (manifest_paths.size() < 2)
        throw std::invalid_argument("compare_runs: need at least two manifests");

    CompareReport rep;
    std::vector<std::map<std::string, std::string>> metas;
    for (const auto& p : manifest_paths) {
        metas.push_back(read_manifest(p));
        rep.manifest_paths.push_back(p);
    }

    // Scenario keys must match; resolution keys must differ pairwise.
    const std::array<const char*, 5> must_match = {
        "config.scenario.preset", "config.scenario.degree", "config.lattice.q",
        "config.lattice.extent", "config.lattice.n"};
    for (const char* key : must_match) {
        const std::string ref = meta_str(metas[0], key, manifest_paths[0]);
        for (std::size_t i = 1; i < metas.size(); ++i)
            if (meta_str(metas[i], key, manifest_paths[i]) != ref)
                throw std::runtime_error("compare_runs: scenario mismatch on " +
                                         std::string(key) + " between " +
                                         manifest_paths[0] + " and " + manifest_paths[i]);
    }
    for (std::size_t i = 0; i < metas.size(); ++i) {
        rep.eps_values.push_back(meta_num(metas[i], "config.flow.eps", manifest_paths[i]));
        rep.sites_values.push_back(
            static_cast<int>(meta_num(metas[i], "config.lattice.sites", manifest_paths[i])));
    }
    for (std::size_t i = 0; i < metas.size(); ++i)
        for (std::size_t j = i + 1; j < metas.size(); ++j)
            if (rep.eps_values[i] == rep.eps_values[j] &&
                rep.sites_values[i] == rep.sites_values[j])
                throw std::runtime_error(
                    "compare_runs: " + manifest_paths[i] + " and " + manifest_paths[j] +
                    " share the same resolution (eps, sites); nothing to compare");

    for (std::size_t i = 0; i < metas.size(); ++i) {
        rep.max_xi_values.push_back(
            meta_num(metas[i], "result.max_xi_post_t0", manifest_paths[i]));
        rep.equipartition_values.push_back(
            meta_num(metas[i], "result.equipartition_final", manifest_paths[i]));
        rep.density_ratio_values.push_back(
            meta_num(metas[i], "result.density_sup_ratio", manifest_paths[i]));
        if (metas[i].count("result.decay_slope_mean"))
            rep.decay_slope_values.push_back(
                meta_num(metas[i], "result.decay_slope_mean", manifest_paths[i]));
    }

    {
        std::vector<UniformityEntry> entries;
        for (std::size_t i = 0; i < metas.size(); ++i)
            entries.push_back({rep.eps_values[i], rep.max_xi_values[i]});
        const UniformityReport ur = discrepancy_uniformity(entries);
        rep.uniformity_ratio = ur.worst_ratio;
        rep.uniformity_pass = ur.comparable && ur.worst_ratio <= 2.0;
    }

    // Equipartition trend, coarse → fine by lattice spacing.
    {
        std::vector<std::size_t> order(metas.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const double extent = meta_num(metas[0], "config.lattice.extent", manifest_paths[0]);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return extent / rep.sites_values[a] > extent / rep.sites_values[b];
        });
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const double coarse = rep.equipartition_values[order[k]];
            const double fine = rep.equipartition_values[order[k + 1]];
            rep.equipartition_ratios.push_back(fine / std::max(coarse, 1e-300));
        }
    }

    if (rep.decay_slope_values.size() >= 2) {
        double lo = 1e300, hi = 0.0;
        for (double s : rep.decay_slope_values) {
            lo = std::min(lo, std::abs(s));
            hi = std::max(hi, std::abs(s));
        }
        rep.decay_slope_spread = hi / std::max(lo, 1e-300);
    }

    std::ostringstream out;
    out << "comparison of " << metas.size() << " runs, preset "
        << meta_str(metas[0], "config.scenario.preset", manifest_paths[0]) << "\n\n";
    out << "  run  sites  eps        eps/h     max_xi       equip        density    decay\n";
    for (std::size_t i = 0; i < metas.size(); ++i) {
        const double extent = meta_num(metas[i], "config.lattice.extent", manifest_paths[i]);
        const double h = extent / rep.sites_values[i];
        char line[200];
        std::snprintf(line, sizeof(line),
                      "  %-4zu %-6d %-10.4g %-9.3g %-12.5g %-12.5g %-10.4g %s\n", i,
                      rep.sites_values[i], rep.eps_values[i], rep.eps_values[i] / h,
                      rep.max_xi_values[i], rep.equipartition_values[i],
                      rep.density_ratio_values[i],
                      i < rep.decay_slope_values.size()
                          ? fmt_short(rep.decay_slope_values[i]).c_str()
                          : "-");
        out << line;
    }
    out << "\n  discrepancy uniformity ratio: " << fmt_short(rep.uniformity_ratio)
        << (rep.uniformity_pass ? "  (within factor 2)" : "  (EXCEEDS factor 2)") << "\n";
    if (!rep.equipartition_ratios.empty()) {
        out << "  equipartition refinement ratios (fine/coarse):";
        for (double v : rep.equipartition_ratios) out << " " << fmt_short(v);
        out << "\n";
    }
    if (rep.decay_slope_values.size() >= 2)
        out << "  decay slope spread (max/min): " << fmt_short(rep.decay_slope_spread) << "\n";
    rep.text = out.str();
    return rep;
}

}  // namespace higgsflow
