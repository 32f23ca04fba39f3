#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "higgsflow/diagnostics.hpp"
#include "higgsflow/embed.hpp"
#include "higgsflow/field_state.hpp"
#include "higgsflow/flow.hpp"
#include "higgsflow/lattice.hpp"
#include "higgsflow/profile.hpp"
#include "higgsflow/util.hpp"

using namespace higgsflow;

namespace {

FieldState embedded_line(const TorusLattice& lat, const VortexProfile& prof, double eps,
                         int degree = 1) {
    CycleSpec spec;
    spec.kind = CycleKind::straight_line;
    spec.degree = degree;
    return embed_cycle(lat, prof, spec, eps);
}

FieldState embedded_ring(const TorusLattice& lat, const VortexProfile& prof, double eps,
                         double r0) {
    CycleSpec spec;
    spec.kind = CycleKind::circle;
    spec.degree = 1;
    spec.radius = r0;
    EmbedPolicy policy;
    policy.min_radius_in_eps = EmbedPolicy::hard_floor_in_eps;
    return embed_cycle(lat, prof, spec, eps, policy);
}

}  // namespace

TEST_CASE("vortex set extraction") {
    SUBCASE("vacuum marks nothing") {
        const TorusLattice lat = build_lattice(3, {12, 12, 12}, {6.0, 6.0, 6.0}, 0);
        const VortexSet vs = extract_vortex_set(lat, make_vacuum_state(lat, 0.5));
        CHECK(vs.marked.empty());
        CHECK(vs.total_plane01 == 0);
        for (int w : vs.section_degree) CHECK(w == 0);
    }
    SUBCASE("degree-1 line: exactly one marked plaquette per section, winding +1") {
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat =
            build_lattice(3, {32, 32, 32}, {8.0, 8.0, 8.0}, 1, twist_cut_index(32));
        const FieldState st = embedded_line(lat, prof, 1.0);
        const VortexSet vs = extract_vortex_set(lat, st);
        REQUIRE(vs.section_degree.size() == 32);
        for (int w : vs.section_degree) CHECK(w == 1);
        // count plane-(0,1) marks per level
        std::vector<int> per_level(32, 0);
        for (const auto& m : vs.marked)
            if (m.plane == 0) {
                per_level[lat.coords(m.site)[2]] += 1;
                CHECK(m.winding == 1);
            }
        for (int c : per_level) CHECK(c == 1);
        CHECK(vs.total_plane01 == 32);
    }
    SUBCASE("near-zero corners are perturbed deterministically, not crashed") {
        const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
        FieldState st = make_vacuum_state(lat, 1.0);
        st.u[lat.index(3, 3, 0)] = Complex{0.0, 0.0};
        st.u[lat.index(4, 3, 0)] = Complex{1e-9, 0.0};
        const VortexSet v1 = extract_vortex_set(lat, st);
        const VortexSet v2 = extract_vortex_set(lat, st);
        REQUIRE(v1.marked.size() == v2.marked.size());
        for (std::size_t i = 0; i < v1.marked.size(); ++i) {
            CHECK(v1.marked[i].site == v2.marked[i].site);
            CHECK(v1.marked[i].winding == v2.marked[i].winding);
        }
        CHECK(v1.total_plane01 == 0);  // untwisted sector: sections sum to zero
    }
    SUBCASE("all-zero section flags degenerate plaquettes") {
        const TorusLattice lat = build_lattice(2, {8, 8, 1}, {4.0, 4.0, 0.0}, 0);
        FieldState st = make_vacuum_state(lat, 1.0);
        for (auto& u : st.u) u = 0.0;
        const VortexSet vs = extract_vortex_set(lat, st);
        for (const auto& m : vs.marked) CHECK(m.degenerate);
        CHECK(vs.centroids.empty());
    }
}

TEST_CASE("ring radius estimate and the shrinking law") {
    SUBCASE("embedded ring of radius 1.5 is recovered within one cell") {
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat = build_lattice(3, {48, 48, 48}, {6.0, 6.0, 6.0}, 0);
        const FieldState st = embedded_ring(lat, prof, 0.5, 1.5);
        const VortexSet vs = extract_vortex_set(lat, st);
        CycleSpec spec;
        spec.kind = CycleKind::circle;
        const auto center = resolve_cycle_center(lat, spec);
        const RingRadiusEstimate est = ring_radius_estimate(lat, vs, center);
        REQUIRE(est.count > 0);
        CHECK(std::abs(est.mean_radius - 1.5) <= lat.h);
        CHECK(est.spread <= lat.h);
    }
    SUBCASE("synthetic series matching r = sqrt(r0^2 - 2t) passes; a linear one fails") {
        const double r0 = 1.5;
        std::vector<RingLawPoint> good, bad;
        for (int k = 0; k <= 20; ++k) {
            const double t = 0.05 * k;
            RingLawPoint p;
            p.t = t;
            p.count = 40;
            const double rr = r0 * r0 - 2.0 * t;
            p.radius = rr > 0 ? std::sqrt(rr) : 0.0;
            if (rr > 0.04) good.push_back(p);
            p.radius = r0 - t;  // wrong: linear shrinking
            bad.push_back(p);
        }
        // extinction marker: a final sample with too few plaquettes
        RingLawPoint fin;
        fin.t = 1.13;
        fin.count = 1;
        fin.radius = 0.0;
        good.push_back(fin);
        const RingLawReport ok = ring_law_check(good, r0, 0.2);
        CHECK(ok.max_rel_error <= 5e-3);
        CHECK(ok.checked >= 15);
        CHECK(ok.extinct);
        CHECK(ok.extinction_time == doctest::Approx(1.13));
        CHECK(ok.predicted_extinction == doctest::Approx(r0 * r0 / 2.0));
        const RingLawReport fail = ring_law_check(bad, r0, 0.2);
        CHECK(fail.max_rel_error > 5e-2);
    }
}

TEST_CASE("Gaussian densities") {
    SUBCASE("vacuum: zero at any admissible scale") {
        const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
        FieldState st = make_vacuum_state(lat, 1.0);
        st.time = 1.0;
        const GaussianDensity g = gaussian_density(lat, st, {4.0, 4.0, 0.0}, 2.0);
        CHECK(g.psi == 0.0);
        CHECK(g.base == 0.0);
    }
    SUBCASE("scale window is enforced") {
        const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
        FieldState st = make_vacuum_state(lat, 1.0);
        st.time = 2.0;
        CHECK_THROWS_AS(gaussian_density(lat, st, {4.0, 4.0, 0.0}, 1.0),
                        std::invalid_argument);  // s >= T
        st.time = 0.0;
        CHECK_THROWS_AS(gaussian_density(lat, st, {4.0, 4.0, 0.0}, 0.0),
                        std::invalid_argument);  // s = T not allowed either
        FieldState ok = make_vacuum_state(lat, 1.0);
        ok.time = 1.0;
        CHECK_THROWS_AS(gaussian_density(lat, ok, {4.0, 4.0, 0.0}, 1.0 + 64.0),
                        std::invalid_argument);  // T - s beyond L^2/4
    }
    SUBCASE("straight line: density ~ 2*pi across a decade of scales") {
        // An energy-(2π per unit length) line in n = 3 gives
        // 4π(T−s)·∫K e → 2π exactly in the continuum, at every scale.
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat =
            build_lattice(3, {48, 48, 48}, {12.0, 12.0, 12.0}, 1, twist_cut_index(48));
        FieldState st = embedded_line(lat, prof, 0.5);
        CycleSpec spec;
        spec.kind = CycleKind::straight_line;
        spec.degree = 1;
        const auto c = resolve_cycle_center(lat, spec);
        for (double scale : {0.36, 1.2, 3.6}) {
            st.time = 1.0;
            const GaussianDensity g = gaussian_density(lat, st, c, 1.0 + scale);
            CHECK(g.T_minus_s == doctest::Approx(scale));
            CHECK(g.psi == doctest::Approx(two_pi).epsilon(0.10));
        }
    }
}

TEST_CASE("almost-monotonicity report") {
    SUBCASE("fewer than four samples throw") {
        const std::vector<double> t{0.1, 0.2, 0.3};
        const std::vector<double> b{1.0, 1.0, 1.0};
        const std::vector<double> grid{0.5, 1.0};
        CHECK_THROWS_AS(monotonicity_report(t, b, 1.0, 1.0, grid), std::invalid_argument);
    }
    SUBCASE("vacuum-like flat series needs C = 0") {
        const std::vector<double> t{0.1, 0.2, 0.3, 0.4, 0.5};
        const std::vector<double> b(5, 0.0);
        const std::vector<double> grid{0.0, 0.5, 1.0};
        const MonotonicityReport rep = monotonicity_report(t, b, 1.0, 1.0, grid);
        REQUIRE(rep.found);
        CHECK(rep.C == 0.0);
        CHECK(rep.max_violation <= rep.slack);
    }
    SUBCASE("a genuinely increasing weighted density needs a positive C") {
        // base chosen so psi = 4*pi*(T-s)*base increases: needs e^{C sqrt(T-s)}
        // compensation.
        const double T = 1.0;
        std::vector<double> t, b;
        for (int k = 0; k < 8; ++k) {
            const double s = 0.1 + 0.1 * k;
            t.push_back(s);
            // weighted density rising by 30% over the run
            const double psi = 1.0 + 0.3 * k / 7.0;
            b.push_back(psi / (4.0 * pi * (T - s)));
        }
        const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
        const MonotonicityReport rep = monotonicity_report(t, b, T, /*E0=*/1.0, grid);
        REQUIRE(rep.found);
        CHECK(rep.C > 0.0);
    }
}

TEST_CASE("discrepancy uniformity across resolutions") {
    SUBCASE("fewer than two entries throw") {
        const std::vector<UniformityEntry> one{{0.5, 0.1}};
        CHECK_THROWS_AS(discrepancy_uniformity(one), std::invalid_argument);
    }
    SUBCASE("vacuum maxima compare as uniform") {
        const std::vector<UniformityEntry> entries{{0.5, 0.0}, {0.25, 0.0}};
        const UniformityReport rep = discrepancy_uniformity(entries);
        CHECK(rep.comparable);
    }
    SUBCASE("factor-2 spread is the comparability edge") {
        const std::vector<UniformityEntry> close{{0.5, 0.10}, {0.25, 0.15}, {0.125, 0.18}};
        CHECK(discrepancy_uniformity(close).comparable);
        const std::vector<UniformityEntry> far{{0.5, 0.10}, {0.25, 0.45}};
        CHECK(!discrepancy_uniformity(far).comparable);
    }
}

TEST_CASE("exponential decay fit away from the vortex set") {
    SUBCASE("vacuum short-circuits: decayed everywhere") {
        const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
        const DecayFit fit = decay_fit(lat, make_vacuum_state(lat, 1.0));
        CHECK(fit.decayed_everywhere);
        CHECK(fit.max_e == 0.0);
    }
    SUBCASE("embedded line: log-density slope matches the profile's decay rate") {
        // The radial profile's energy decays like e^{-2 r/eps}; the lattice fit
        // is against distance/eps so its slope should sit near -2.
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat =
            build_lattice(3, {48, 48, 48}, {12.0, 12.0, 12.0}, 1, twist_cut_index(48));
        const FieldState st = embedded_line(lat, prof, 0.75);
        const DecayFit fit = decay_fit(lat, st);
        REQUIRE(!fit.decayed_everywhere);
        REQUIRE(fit.points >= 4);
        const LineFit ref = profile_energy_decay_fit(prof, 2.0, 6.0);
        CHECK(fit.fit.slope <= -0.4);
        CHECK(fit.fit.slope == doctest::Approx(ref.slope).epsilon(0.30));
        CHECK(fit.fit.r2 >= 0.9);
    }
    SUBCASE("rate is stable across core sizes within 30%") {
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat =
            build_lattice(3, {48, 48, 48}, {12.0, 12.0, 12.0}, 1, twist_cut_index(48));
        const DecayFit f1 = decay_fit(lat, embedded_line(lat, prof, 0.6));
        const DecayFit f2 = decay_fit(lat, embedded_line(lat, prof, 1.0));
        REQUIRE(!f1.decayed_everywhere);
        REQUIRE(!f2.decayed_everywhere);
        CHECK(std::abs(f1.fit.slope - f2.fit.slope) <=
              0.30 * std::max(std::abs(f1.fit.slope), std::abs(f2.fit.slope)));
    }
}

TEST_CASE("clearing-out probe") {
    const TorusLattice lat = build_lattice(2, {24, 24, 1}, {12.0, 12.0, 0.0}, 0);
    SUBCASE("vacuum series: every premise event recovers") {
        std::vector<FieldState> states;
        std::vector<double> times;
        for (int k = 0; k < 6; ++k) {
            FieldState st = make_vacuum_state(lat, 1.0);
            st.time = 0.25 * k;
            states.push_back(st);
            times.push_back(st.time);
        }
        const std::vector<double> etas{0.25, 0.5, 1.0};
        const std::vector<double> cs{0.5, 1.0};
        const std::vector<double> radii{1.0, 2.0};
        const ClearingOutReport rep =
            clearing_out_probe(lat, states, times, etas, cs, radii);
        CHECK(rep.any_conclusive);
        CHECK(rep.frontier_eta >= 0.25);
        for (const auto& row : rep.table)
            if (row.conclusive) CHECK(row.conclusion_hits == row.premise_hits);
    }
    SUBCASE("non-uniform cadence throws") {
        std::vector<FieldState> states(4, make_vacuum_state(lat, 1.0));
        std::vector<double> times{0.0, 0.1, 0.3, 0.4};
        const std::vector<double> g{0.5};
        CHECK_THROWS_AS(clearing_out_probe(lat, states, times, g, g, g),
                        std::invalid_argument);
    }
}

TEST_CASE("transverse quantization") {
    SUBCASE("vacuum: zero flux and zero winding everywhere") {
        const TorusLattice lat = build_lattice(3, {16, 16, 16}, {8.0, 8.0, 8.0}, 0);
        const QuantizationReport rep =
            transverse_quantization(lat, make_vacuum_state(lat, 1.0));
        CHECK(rep.kept == 16);
        CHECK(rep.max_flux_deviation == 0.0);
        CHECK(rep.max_energy_deviation == 0.0);
    }
    SUBCASE("embedded degree-2 line: flux degree 2 per section to 1e-3") {
        const VortexProfile prof = solve_bogomolny(2);
        const TorusLattice lat =
            build_lattice(3, {48, 48, 48}, {12.0, 12.0, 12.0}, 2, twist_cut_index(48));
        const FieldState st = embedded_line(lat, prof, 0.75, 2);
        const QuantizationReport rep = transverse_quantization(lat, st);
        REQUIRE(rep.kept > 0);
        for (const auto& sec : rep.sections) {
            if (sec.skipped_tangent) continue;
            CHECK(sec.winding == 2);
            CHECK(sec.flux_degree == doctest::Approx(2.0).epsilon(1e-3));
        }
        CHECK(rep.max_flux_deviation <= 2e-3);
    }
    SUBCASE("relaxed degree-1 line: energy degree within 5% after settling") {
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice lat =
            build_lattice(3, {32, 32, 32}, {8.0, 8.0, 8.0}, 1, twist_cut_index(32));
        FieldState st = embedded_line(lat, prof, 1.0);
        FlowParams fp;
        fp.t_end = 0.5;
        fp.sample_every = 0.25;
        evolve(lat, st, fp);
        const QuantizationReport rep = transverse_quantization(lat, st);
        REQUIRE(rep.kept > 0);
        CHECK(rep.max_flux_deviation <= 1e-3);
        CHECK(rep.max_energy_deviation <= 0.05);
    }
}

TEST_CASE("localized energy balance") {
    const TorusLattice lat = build_lattice(2, {24, 24, 1}, {12.0, 12.0, 0.0}, 0);
    SUBCASE("negative test weights are rejected") {
        const FieldState st = make_vacuum_state(lat, 1.0);
        const RhsFields v = flow_rhs(lat, st);
        std::vector<double> phi(lat.num_sites, 1.0);
        phi[3] = -0.5;
        CHECK_THROWS_AS(brakke_rhs(lat, st, v, phi), std::invalid_argument);
    }
    SUBCASE("residual series needs at least three samples") {
        const std::vector<double> t{0.0, 0.1};
        const std::vector<double> m{1.0, 0.9};
        const std::vector<double> r{0.0, 0.0};
        CHECK_THROWS_AS(eps_brakke_residual(t, m, r, 1e-6), std::invalid_argument);
    }
    SUBCASE("vacuum run: residual identically small") {
        FieldState st = make_vacuum_state(lat, 1.0);
        const auto phi = gaussian_bump(lat, {6.0, 6.0, 0.0}, 1.5);
        std::vector<double> times, mu, rhs;
        FlowParams fp;
        fp.t_end = 0.3;
        fp.sample_every = 0.1;
        evolve(lat, st, fp,
               [&](const FieldState& s, const RhsFields& v, const EvolveTotals&) {
                   times.push_back(s.time);
                   mu.push_back(localized_mass(lat, s, phi));
                   rhs.push_back(brakke_rhs(lat, s, v, phi));
               });
        const BrakkeResidualReport rep = eps_brakke_residual(times, mu, rhs, 1.0);
        CHECK(rep.max_residual <= 1e-12);
    }
    SUBCASE("relaxing planar vortex: localized balance holds to a few percent") {
        const VortexProfile prof = solve_bogomolny(1);
        const TorusLattice l2 =
            build_lattice(2, {48, 48, 1}, {12.0, 12.0, 0.0}, 1, twist_cut_index(48));
        CycleSpec spec;
        spec.kind = CycleKind::planar_point;
        spec.degree = 1;
        FieldState st = embed_cycle(l2, prof, spec, 1.0);
        const double E0 = energy_density(l2, st).total;
        const auto center = resolve_cycle_center(l2, spec);
        const auto phi = gaussian_bump(l2, center, 1.5);
        std::vector<double> times, mu, rhs;
        FlowParams fp;
        fp.t_end = 0.4;
        fp.sample_every = 0.02;
        evolve(l2, st, fp,
               [&](const FieldState& s, const RhsFields& v, const EvolveTotals&) {
                   times.push_back(s.time);
                   mu.push_back(localized_mass(l2, s, phi));
                   rhs.push_back(brakke_rhs(l2, s, v, phi));
               });
        const BrakkeResidualReport rep =
            eps_brakke_residual(times, mu, rhs, 1e-6 * (1.0 + E0));
        CHECK(rep.max_residual <= 3e-2);
    }
}
