#include <doctest.h>

#include <cmath>
#include <vector>

#include "higgsflow/embed.hpp"
#include "higgsflow/field_state.hpp"
#include "higgsflow/flow.hpp"
#include "higgsflow/lattice.hpp"
#include "higgsflow/profile.hpp"
#include "higgsflow/util.hpp"

using namespace higgsflow;

namespace {

FieldState random_state(const TorusLattice& lat, double eps, std::uint64_t seed,
                        double amp = 0.4) {
    FieldState st = make_vacuum_state(lat, eps);
    SplitMix64 rng(seed);
    for (auto& u : st.u)
        u = Complex{1.0 + amp * rng.uniform(-1.0, 1.0), amp * rng.uniform(-1.0, 1.0)};
    for (int j = 0; j < lat.n; ++j)
        for (double& a : st.a[j]) a = amp * rng.uniform(-1.0, 1.0);
    return st;
}

std::vector<double> smooth_phase(const TorusLattice& lat, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const double a0 = rng.uniform(-1.0, 1.0), a1 = rng.uniform(-1.0, 1.0);
    std::vector<double> phi(lat.num_sites);
    for (int x = 0; x < lat.num_sites; ++x) {
        const auto c = lat.coords(x);
        phi[x] = a0 * std::sin(two_pi * c[0] / lat.N[0]) +
                 a1 * std::cos(two_pi * c[1] / lat.N[1] + 0.3);
    }
    return phi;
}

}  // namespace

TEST_CASE("flow velocity closed forms") {
    const TorusLattice lat = build_lattice(2, {12, 12, 1}, {6.0, 6.0, 0.0}, 0);
    SUBCASE("vacuum is stationary") {
        const RhsFields v = flow_rhs(lat, make_vacuum_state(lat, 0.7));
        for (const Complex& z : v.du) CHECK(std::abs(z) == 0.0);
        for (int j = 0; j < 2; ++j)
            for (double b : v.da[j]) CHECK(b == 0.0);
    }
    SUBCASE("constant section u = 1/2 at eps = 1: du/dt = 3/16, da/dt = 0") {
        FieldState st = make_vacuum_state(lat, 1.0);
        for (auto& u : st.u) u = 0.5;
        const RhsFields v = flow_rhs(lat, st);
        for (const Complex& z : v.du) {
            CHECK(z.real() == doctest::Approx(3.0 / 16.0).epsilon(1e-14));
            CHECK(z.imag() == 0.0);
        }
        for (int j = 0; j < 2; ++j)
            for (double b : v.da[j]) CHECK(b == 0.0);
    }
}

TEST_CASE("flow velocity is minus the energy gradient: finite-difference pairing") {
    // dE/ds along a random direction equals -2 h^n <(du,da), direction> to 1e-6
    // relative, over 50 directions, twisted 3-d lattice included.
    const TorusLattice lat = build_lattice(3, {10, 10, 10}, {5.0, 5.0, 5.0}, 1,
                                           twist_cut_index(10));
    const VortexProfile prof = solve_bogomolny(1);
    CycleSpec spec;
    spec.kind = CycleKind::straight_line;
    spec.degree = 1;
    const FieldState base = embed_cycle(lat, prof, spec, 1.0);
    const RhsFields v = flow_rhs(lat, base);
    const double hn = std::pow(lat.h, 3);

    SplitMix64 rng(2026);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // random perturbation direction (w, b)
        std::vector<Complex> w(lat.num_sites);
        LinkField b = lat.make_link_field();
        for (auto& z : w) z = Complex{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        for (int j = 0; j < 3; ++j)
            for (double& y : b[j]) y = rng.uniform(-1.0, 1.0);

        // predicted derivative: dE/ds = -2 h^n sum(<du, w> + eps^2 da.b)
        double pred = 0.0;
        for (int x = 0; x < lat.num_sites; ++x)
            pred += v.du[x].real() * w[x].real() + v.du[x].imag() * w[x].imag();
        for (int j = 0; j < 3; ++j)
            for (int x = 0; x < lat.num_sites; ++x)
                pred += base.eps * base.eps * v.da[j][x] * b[j][x];
        pred *= -2.0 * hn;

        // centered finite difference of the energy
        const double s = 1e-5;
        auto shifted = [&](double sign) {
            FieldState st = base;
            for (int x = 0; x < lat.num_sites; ++x) st.u[x] += sign * s * w[x];
            for (int j = 0; j < 3; ++j)
                for (int x = 0; x < lat.num_sites; ++x) st.a[j][x] += sign * s * b[j][x];
            return energy_density(lat, st).total;
        };
        const double fd = (shifted(+1.0) - shifted(-1.0)) / (2.0 * s);
        worst = std::max(worst, std::abs(fd - pred) / std::max(1.0, std::abs(pred)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("homogeneous flow matches the scalar ODE to one part in 1e8") {
    // For spatially constant real u the flow is u' = (1-u^2) u / (2 eps^2); the
    // reference is in-test RK4 at dt/100.
    const TorusLattice lat = build_lattice(2, {8, 8, 1}, {2.0, 2.0, 0.0}, 0);
    FieldState st = make_vacuum_state(lat, 1.0);
    for (auto& u : st.u) u = 0.4;

    auto f = [](double u) { return 0.5 * (1.0 - u * u) * u; };
    auto rk4_scalar = [&](double u, double dt) {
        const double k1 = f(u);
        const double k2 = f(u + 0.5 * dt * k1);
        const double k3 = f(u + 0.5 * dt * k2);
        const double k4 = f(u + dt * k3);
        return u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    };

    const double dt = 0.2 * lat.h * lat.h;  // 0.0125
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    double ref = 0.4;
    FlowDriver driver(lat);
    StepAudit audit;
    for (int k = 0; k < steps; ++k) {
        driver.step(st, dt, audit, k > 0);
        for (int i = 0; i < 100; ++i) ref = rk4_scalar(ref, dt / 100.0);
    }
    double worst = 0.0;
    for (const Complex& u : st.u) worst = std::max(worst, std::abs(u - ref));
    CHECK(worst <= 1e-8);
}

TEST_CASE("energy decreases monotonically along a relaxing vortex") {
    const VortexProfile prof = solve_bogomolny(1);
    const TorusLattice lat =
        build_lattice(2, {48, 48, 1}, {12.0, 12.0, 0.0}, 1, twist_cut_index(48));
    CycleSpec spec;
    spec.kind = CycleKind::planar_point;
    spec.degree = 1;
    FieldState st = embed_cycle(lat, prof, spec, 1.0);
    FlowDriver driver(lat);
    StepAudit audit;
    const double dt = 0.2 * std::min(lat.h * lat.h, 1.0);
    double prev = energy_density(lat, st).total;
    bool monotone = true;
    double res_cum = 0.0;
    for (int k = 0; k < 1000; ++k) {
        driver.step(st, dt, audit, k > 0);
        if (audit.energy_after > prev + 1e-12 * std::abs(prev)) monotone = false;
        prev = audit.energy_after;
        res_cum += audit.residual;
    }
    CHECK(monotone);
    CHECK(res_cum <= 1e-6 * energy_density(lat, st).total + 1e-9);
}

TEST_CASE("evolve: sampling, vacuum fixed point, dissipation ledger") {
    const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
    SUBCASE("vacuum stays vacuum and the series is constant") {
        FieldState st = make_vacuum_state(lat, 1.0);
        FlowParams fp;
        fp.t_end = 0.5;
        fp.sample_every = 0.1;
        std::vector<double> energies, times;
        const EvolveTotals tot =
            evolve(lat, st, fp, [&](const FieldState& s, const RhsFields&, const EvolveTotals& t) {
                energies.push_back(t.energy_current);
                times.push_back(s.time);
            });
        CHECK(times.size() == 6);  // 0, .1, ..., .5
        for (double e : energies) CHECK(e == 0.0);
        CHECK(tot.dissipation_cum == 0.0);
        CHECK(tot.residual_cum == 0.0);
        CHECK(st.time == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("random data: cumulative dissipation accounts for the energy drop") {
        FieldState st = random_state(lat, 0.8, 77, 0.2);
        const double E0 = energy_density(lat, st).total;
        FlowParams fp;
        fp.t_end = 0.25;
        fp.sample_every = 0.05;
        const EvolveTotals tot = evolve(lat, st, fp);
        const double E1 = energy_density(lat, st).total;
        CHECK(E1 < E0);
        CHECK(std::abs((E0 - E1) - tot.dissipation_cum) <= 1e-6 * E0);
        CHECK(tot.residual_cum <= 1e-6 * E0);
    }
}

TEST_CASE("flow commutes with gauge transformations") {
    const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
    const FieldState st0 = random_state(lat, 1.0, 314, 0.25);
    const auto phi = smooth_phase(lat, 99);
    FlowParams fp;
    fp.t_end = 1.0;
    fp.sample_every = 0.5;

    FieldState a = gauge_transform(lat, st0, phi);
    evolve(lat, a, fp);  // gauge then flow

    FieldState b = st0;
    evolve(lat, b, fp);
    b = gauge_transform(lat, b, phi);  // flow then gauge

    double worst = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) worst = std::max(worst, std::abs(a.u[x] - b.u[x]));
    for (int j = 0; j < 2; ++j)
        for (int x = 0; x < lat.num_sites; ++x)
            worst = std::max(worst, std::abs(a.a[j][x] - b.a[j][x]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("localized mass and semidecreasing probes") {
    const TorusLattice lat = build_lattice(2, {16, 16, 1}, {8.0, 8.0, 0.0}, 0);
    SUBCASE("constant weight 1 gives the total energy; its rate constant is 0") {
        FieldState st = random_state(lat, 1.0, 5, 0.2);
        std::vector<double> one(lat.num_sites, 1.0);
        CHECK(localized_mass(lat, st, one) ==
              doctest::Approx(energy_density(lat, st).total).epsilon(1e-13));
        CHECK(test_function_rate(lat, one) == 0.0);
    }
    SUBCASE("with rate 0 a flat series passes and an increasing one fails") {
        const std::vector<double> times{0.0, 0.1, 0.2, 0.3};
        const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
        const std::vector<double> up{1.0, 1.0, 1.1, 1.0};
        CHECK(semidecreasing_probe(times, flat, 0.0, 1e-12).ok);
        const SemidecreasingReport bad = semidecreasing_probe(times, up, 0.0, 1e-12);
        CHECK(!bad.ok);
        CHECK(bad.max_violation == doctest::Approx(0.1).epsilon(1e-9));
    }
    SUBCASE("localized mass under the flow: compensated series semidecreasing") {
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
        const double rate = test_function_rate(l2, phi) * E0;
        std::vector<double> times, mu;
        FlowParams fp;
        fp.t_end = 0.5;
        fp.sample_every = 0.05;
        evolve(l2, st, fp, [&](const FieldState& s, const RhsFields&, const EvolveTotals&) {
            times.push_back(s.time);
            mu.push_back(localized_mass(l2, s, phi));
        });
        const SemidecreasingReport rep =
            semidecreasing_probe(times, mu, rate, 1e-3 * E0);
        CHECK(rep.ok);
    }
}

TEST_CASE("blow-up aborts with the time attached") {
    const TorusLattice lat = build_lattice(2, {8, 8, 1}, {4.0, 4.0, 0.0}, 0);
    FieldState st = make_vacuum_state(lat, 1.0);
    for (auto& u : st.u) u = 3.0;  // outside the trust region |u| <= 2
    FlowParams fp;
    fp.t_end = 0.2;
    fp.sample_every = 0.1;
    CHECK_THROWS_AS(evolve(lat, st, fp), FlowAbort);
}
