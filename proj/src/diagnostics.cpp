#include "higgsflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace higgsflow {

namespace {

constexpr double kModulusFloor = 1e-6;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo =
            *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

double uniform_cadence(std::span<const double> t, const char* who) {
    if (t.size() < 2) throw std::invalid_argument(std::string(who) + ": need at least two samples");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw std::invalid_argument(std::string(who) + ": times must increase");
    const double tol = 1e-7 * (std::abs(t.back()) + dt);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs(t[k] - t[0] - static_cast<double>(k) * dt) > tol)
            throw std::invalid_argument(std::string(who) + ": sample cadence is not uniform");
    }
    return dt;
}

// 1D squared-distance transform by the lower envelope of parabolas.  f holds
// squared distances at grid positions q·h (large-finite meaning "no source");
// d receives min_p [(q−p)²h² + f(p)].
void dt_line(const std::vector<double>& f, std::vector<double>& d, double h_sq,
             std::vector<int>& v, std::vector<double>& z) {
    const int m = static_cast<int>(f.size());
    v.assign(static_cast<std::size_t>(m), 0);
    z.assign(static_cast<std::size_t>(m) + 1, 0.0);
    int k = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < m; ++q) {
        double s = 0.0;
        while (true) {
            const int p = v[static_cast<std::size_t>(k)];
            s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q * h_sq) -
                 (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p * h_sq)) /
                (2.0 * h_sq * (q - p));
            if (s <= z[static_cast<std::size_t>(k)] && k > 0)
                --k;
            else
                break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < m; ++q) {
        while (z[static_cast<std::size_t>(k) + 1] < static_cast<double>(q)) ++k;
        const int p = v[static_cast<std::size_t>(k)];
        d[static_cast<std::size_t>(q)] =
            static_cast<double>(q - p) * (q - p) * h_sq + f[static_cast<std::size_t>(p)];
    }
}

// Exact wrapped Euclidean distance to a source set, via separable squared
// transforms with each axis tripled (period images cover every wrapped
// difference up to the half extent).
std::vector<double> wrapped_distance_field(const TorusLattice& lat,
                                           const std::vector<char>& source) {
    constexpr double kFar = 1e30;
    std::vector<double> dsq(static_cast<std::size_t>(lat.num_sites));
    for (int x = 0; x < lat.num_sites; ++x)
        dsq[static_cast<std::size_t>(x)] = source[static_cast<std::size_t>(x)] ? 0.0 : kFar;

    const double h_sq = lat.h * lat.h;
    std::vector<double> line, out;
    std::vector<int> v;
    std::vector<double> z;
    std::vector<int> chain;
    for (int ax = 0; ax < lat.n; ++ax) {
        const int m = lat.N[static_cast<std::size_t>(ax)];
        line.assign(static_cast<std::size_t>(3 * m), 0.0);
        out.assign(static_cast<std::size_t>(3 * m), 0.0);
        chain.assign(static_cast<std::size_t>(m), 0);
        const auto& nx = lat.next[static_cast<std::size_t>(ax)];
        for (int x = 0; x < lat.num_sites; ++x) {
            if (lat.coords(x)[static_cast<std::size_t>(ax)] != 0) continue;
            int cur = x;
            for (int i = 0; i < m; ++i) {
                chain[static_cast<std::size_t>(i)] = cur;
                const double val = dsq[static_cast<std::size_t>(cur)];
                line[static_cast<std::size_t>(i)] = val;
                line[static_cast<std::size_t>(i + m)] = val;
                line[static_cast<std::size_t>(i + 2 * m)] = val;
                cur = nx[static_cast<std::size_t>(cur)];
            }
            dt_line(line, out, h_sq, v, z);
            for (int i = 0; i < m; ++i)
                dsq[static_cast<std::size_t>(chain[static_cast<std::size_t>(i)])] =
                    out[static_cast<std::size_t>(i + m)];
        }
    }
    for (double& val : dsq) val = std::sqrt(val);
    return dsq;
}

// Energy mass of the ball B_r around a site, by bounding-box scan with
// wrapped index arithmetic.
double ball_mass(const TorusLattice& lat, const std::vector<double>& e,
                 const std::array<int, 3>& c, double r) {
    const double hn = std::pow(lat.h, lat.n);
    const int R = static_cast<int>(std::floor(r / lat.h + 1e-12));
    const double r_sq = r * r;
    double sum = 0.0;
    const int lo2 = (lat.n == 3) ? -R : 0;
    const int hi2 = (lat.n == 3) ? R : 0;
    for (int d0 = -R; d0 <= R; ++d0) {
        const int i0 = ((c[0] + d0) % lat.N[0] + lat.N[0]) % lat.N[0];
        for (int d1 = -R; d1 <= R; ++d1) {
            const int i1 = ((c[1] + d1) % lat.N[1] + lat.N[1]) % lat.N[1];
            for (int d2 = lo2; d2 <= hi2; ++d2) {
                const double dist_sq = (static_cast<double>(d0) * d0 +
                                        static_cast<double>(d1) * d1 +
                                        static_cast<double>(d2) * d2) *
                                       lat.h * lat.h;
                if (dist_sq > r_sq) continue;
                const int i2 = (lat.n == 3) ? ((c[2] + d2) % lat.N[2] + lat.N[2]) % lat.N[2] : 0;
                sum += e[static_cast<std::size_t>(lat.index(i0, i1, i2))];
            }
        }
    }
    return hn * sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Vortex set
// ---------------------------------------------------------------------------

VortexSet extract_vortex_set(const TorusLattice& lat, const FieldState& st) {
    // One branch choice of arg u per site, with sub-floor moduli nudged by a
    // fixed real shift so the branch is well defined and deterministic.
    std::vector<double> arg_u(static_cast<std::size_t>(lat.num_sites));
    std::vector<char> tiny(static_cast<std::size_t>(lat.num_sites));
    for (int x = 0; x < lat.num_sites; ++x) {
        Complex u = st.u[static_cast<std::size_t>(x)];
        const bool low = std::abs(u) < kModulusFloor;
        tiny[static_cast<std::size_t>(x)] = low ? 1 : 0;
        if (low) u += Complex{kModulusFloor, 0.0};
        arg_u[static_cast<std::size_t>(x)] = std::arg(u);
    }

    // Total connection per link; stored curvature of the dynamical part.
    std::array<std::vector<double>, 3> A;
    for (int j = 0; j < lat.n; ++j) {
        auto& Aj = A[static_cast<std::size_t>(j)];
        Aj.resize(static_cast<std::size_t>(lat.num_sites));
        const auto& bg = lat.bg.a[static_cast<std::size_t>(j)];
        const auto& dyn = st.a[static_cast<std::size_t>(j)];
        for (int x = 0; x < lat.num_sites; ++x)
            Aj[static_cast<std::size_t>(x)] =
                bg[static_cast<std::size_t>(x)] + dyn[static_cast<std::size_t>(x)];
    }
    const PlaqField domega = d_link_to_plaquette(lat, st.a);

    VortexSet vs;
    vs.section_degree.assign(lat.n == 3 ? static_cast<std::size_t>(lat.N[2]) : 1u, 0);

    const double h = lat.h;
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [ai, aj] = lat.plane_axes(p);
        const auto& Ai = A[static_cast<std::size_t>(ai)];
        const auto& Aj = A[static_cast<std::size_t>(aj)];
        const auto& nx_i = lat.next[static_cast<std::size_t>(ai)];
        const auto& nx_j = lat.next[static_cast<std::size_t>(aj)];
        const double bg_curv = lat.bg_curvature(p);
        const auto& dw = domega[static_cast<std::size_t>(p)];
        for (int x = 0; x < lat.num_sites; ++x) {
            const int xi = nx_i[static_cast<std::size_t>(x)];
            const int xj = nx_j[static_cast<std::size_t>(x)];
            const int xij = nx_j[static_cast<std::size_t>(xi)];
            const double omega_tot = bg_curv + dw[static_cast<std::size_t>(x)];
            double s = principal_angle(arg_u[static_cast<std::size_t>(xi)] -
                                       arg_u[static_cast<std::size_t>(x)] -
                                       h * Ai[static_cast<std::size_t>(x)]);
            s += principal_angle(arg_u[static_cast<std::size_t>(xij)] -
                                 arg_u[static_cast<std::size_t>(xi)] -
                                 h * Aj[static_cast<std::size_t>(xi)]);
            s += principal_angle(arg_u[static_cast<std::size_t>(xj)] -
                                 arg_u[static_cast<std::size_t>(xij)] +
                                 h * Ai[static_cast<std::size_t>(xj)]);
            s += principal_angle(arg_u[static_cast<std::size_t>(x)] -
                                 arg_u[static_cast<std::size_t>(xj)] +
                                 h * Aj[static_cast<std::size_t>(x)]);
            s += h * h * omega_tot;
            const double w_real = s / two_pi;
            const long w = std::lround(w_real);
            if (std::abs(w_real - static_cast<double>(w)) > 1e-6)
                throw std::runtime_error("extract_vortex_set: non-integer winding " +
                                         std::to_string(w_real));
            if (w == 0) continue;
            if (std::abs(w) > 2)
                throw std::runtime_error("extract_vortex_set: winding " + std::to_string(w) +
                                         " outside the admissible range");
            VortexPlaquette vp;
            vp.plane = p;
            vp.site = x;
            vp.winding = static_cast<int>(w);
            vp.degenerate = tiny[static_cast<std::size_t>(x)] && tiny[static_cast<std::size_t>(xi)] &&
                            tiny[static_cast<std::size_t>(xj)] && tiny[static_cast<std::size_t>(xij)];
            vs.marked.push_back(vp);
            if (!vp.degenerate) {
                const auto cc = lat.coords(x);
                std::array<double, 3> pos{};
                for (int kk = 0; kk < 3; ++kk) pos[static_cast<std::size_t>(kk)] = 0.0;
                for (int kk = 0; kk < lat.n; ++kk)
                    pos[static_cast<std::size_t>(kk)] =
                        h * static_cast<double>(cc[static_cast<std::size_t>(kk)]);
                pos[static_cast<std::size_t>(ai)] += 0.5 * h;
                pos[static_cast<std::size_t>(aj)] += 0.5 * h;
                vs.centroids.push_back(pos);
            }
            if (p == 0) {
                const std::size_t level =
                    (lat.n == 3) ? static_cast<std::size_t>(lat.coords(x)[2]) : 0u;
                vs.section_degree[level] += vp.winding;
                vs.total_plane01 += vp.winding;
            }
        }
    }
    return vs;
}

RingRadiusEstimate ring_radius_estimate(const TorusLattice& lat, const VortexSet& vs,
                                        std::array<double, 3> center) {
    RingRadiusEstimate est;
    if (vs.centroids.empty()) return est;
    std::vector<double> rho;
    rho.reserve(vs.centroids.size());
    for (const auto& c : vs.centroids) {
        const double d0 = wrap_delta(c[0] - center[0], lat.L[0]);
        const double d1 = wrap_delta(c[1] - center[1], lat.L[1]);
        rho.push_back(std::hypot(d0, d1));
    }
    const double mean = pairwise_sum(rho.data(), rho.size()) / static_cast<double>(rho.size());
    double var = 0.0;
    for (const double r : rho) var += (r - mean) * (r - mean);
    est.mean_radius = mean;
    est.spread = std::sqrt(var / static_cast<double>(rho.size()));
    est.count = static_cast<int>(rho.size());
    return est;
}

RingLawReport ring_law_check(std::span<const RingLawPoint> series, double r0,
                             double radius_floor) {
    if (series.empty()) throw std::invalid_argument("ring_law_check: empty series");
    if (!(r0 > 0.0)) throw std::invalid_argument("ring_law_check: initial radius must be positive");
    RingLawReport rep;
    rep.series.assign(series.begin(), series.end());
    rep.predicted_extinction = 0.5 * r0 * r0;
    for (const auto& pt : series) {
        if (!rep.extinct && pt.count < 3) {
            rep.extinct = true;
            rep.extinction_time = pt.t;
        }
        if (rep.extinct) continue;
        const double rr_sq = r0 * r0 - 2.0 * pt.t;
        if (rr_sq <= 0.0) continue;
        const double rr = std::sqrt(rr_sq);
        if (rr < radius_floor) continue;
        rep.max_rel_error = std::max(rep.max_rel_error, std::abs(pt.radius - rr) / r0);
        ++rep.checked;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Gaussian densities and almost-monotonicity
// ---------------------------------------------------------------------------

GaussianDensity gaussian_density(const TorusLattice& lat, const FieldState& st,
                                 std::array<double, 3> p, double T) {
    const double s = st.time;
    if (!(s > 0.0) || !(s < T))
        throw std::invalid_argument("gaussian_density: needs 0 < sample time < reference time");
    const double tau = T - s;
    const double l_min = std::min(lat.L[0], std::min(lat.L[1], lat.n == 3 ? lat.L[2] : lat.L[1]));
    if (tau > 0.25 * l_min * l_min + 1e-12)
        throw std::invalid_argument("gaussian_density: scale exceeds a quarter squared extent");
    const auto K = heat_kernel_field(lat, tau, p);
    const auto d = derive_densities(lat, st);
    std::vector<double> terms(static_cast<std::size_t>(lat.num_sites));
    for (int x = 0; x < lat.num_sites; ++x)
        terms[static_cast<std::size_t>(x)] =
            K[static_cast<std::size_t>(x)] * d.e[static_cast<std::size_t>(x)];
    const double hn = std::pow(lat.h, lat.n);
    GaussianDensity g;
    g.T_minus_s = tau;
    g.base = tau * hn * pairwise_sum(terms.data(), terms.size());
    g.psi = 4.0 * pi * g.base;
    return g;
}

double weighted_gaussian_density(double base, double T_minus_s, double C) {
    return std::exp(C * std::sqrt(T_minus_s)) * base;
}

MonotonicityReport monotonicity_report(std::span<const double> s_times,
                                       std::span<const double> base_integrals,
                                       double T, double initial_energy,
                                       std::span<const double> C_grid) {
    if (s_times.size() != base_integrals.size())
        throw std::invalid_argument("monotonicity_report: series size mismatch");
    if (s_times.size() < 4)
        throw std::invalid_argument("monotonicity_report: need at least four samples");
    if (C_grid.empty()) throw std::invalid_argument("monotonicity_report: empty constant grid");
    for (std::size_t k = 0; k < s_times.size(); ++k) {
        if (!(s_times[k] > 0.0) || !(s_times[k] < T))
            throw std::invalid_argument("monotonicity_report: sample times must lie in (0, T)");
        if (k > 0 && !(s_times[k] > s_times[k - 1]))
            throw std::invalid_argument("monotonicity_report: sample times must increase");
    }
    std::vector<double> grid(C_grid.begin(), C_grid.end());
    std::sort(grid.begin(), grid.end());

    MonotonicityReport rep;
    rep.slack = 1e-3 * initial_energy;
    std::vector<double> root(s_times.size());
    for (std::size_t k = 0; k < s_times.size(); ++k) root[k] = std::sqrt(T - s_times[k]);

    double best = std::numeric_limits<double>::infinity();
    double best_C = grid.front();
    for (const double C : grid) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < s_times.size(); ++i) {
            const double wi = weighted_gaussian_density(base_integrals[i], T - s_times[i], C);
            for (std::size_t j = i + 1; j < s_times.size(); ++j) {
                const double wj = weighted_gaussian_density(base_integrals[j], T - s_times[j], C);
                const double viol = (wj - wi) - 2.0 * C * (root[i] - root[j]);
                worst = std::max(worst, viol);
            }
        }
        if (worst < best) {
            best = worst;
            best_C = C;
        }
        if (worst <= rep.slack) {
            rep.found = true;
            rep.C = C;
            rep.max_violation = worst;
            return rep;
        }
    }
    rep.found = false;
    rep.C = best_C;
    rep.max_violation = best;
    return rep;
}

// ---------------------------------------------------------------------------
// Discrepancy uniformity
// ---------------------------------------------------------------------------

UniformityReport discrepancy_uniformity(std::span<const UniformityEntry> entries) {
    if (entries.size() < 2)
        throw std::invalid_argument("discrepancy_uniformity: need at least two runs");
    constexpr double kTinyFloor = 1e-12;
    UniformityReport rep;
    rep.max_value = -std::numeric_limits<double>::infinity();
    rep.min_value = std::numeric_limits<double>::infinity();
    for (const auto& en : entries) {
        const double v = std::max(en.max_xi, kTinyFloor);
        rep.max_value = std::max(rep.max_value, v);
        rep.min_value = std::min(rep.min_value, v);
    }
    rep.worst_ratio = rep.max_value / rep.min_value;
    rep.comparable = rep.worst_ratio <= 2.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Exponential decay fit
// ---------------------------------------------------------------------------

DecayFit decay_fit(const TorusLattice& lat, const FieldState& st, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::invalid_argument("decay_fit: level must lie in (0, 1)");
    const auto d = derive_densities(lat, st);
    DecayFit out;
    out.beta = beta;

    std::vector<char> region(static_cast<std::size_t>(lat.num_sites), 0);
    int region_count = 0;
    for (int x = 0; x < lat.num_sites; ++x) {
        if (d.u_sq[static_cast<std::size_t>(x)] < 1.0 - beta) {
            region[static_cast<std::size_t>(x)] = 1;
            ++region_count;
        }
    }
    out.max_e = *std::max_element(d.e.begin(), d.e.end());
    if (region_count == 0) {
        out.decayed_everywhere = true;
        out.floor = median_of(d.e);
        return out;
    }
    if (region_count == lat.num_sites) return out;  // nothing outside to fit

    const auto dist = wrapped_distance_field(lat, region);
    const double d_max = *std::max_element(dist.begin(), dist.end());

    std::vector<double> far_e;
    for (int x = 0; x < lat.num_sites; ++x)
        if (dist[static_cast<std::size_t>(x)] >= 0.8 * d_max)
            far_e.push_back(d.e[static_cast<std::size_t>(x)]);
    out.floor = median_of(far_e);

    const double l_min = std::min(lat.L[0], std::min(lat.L[1], lat.n == 3 ? lat.L[2] : lat.L[1]));
    out.window_lo = 2.0 * st.eps;
    out.window_hi = std::min(6.0 * st.eps, 0.25 * l_min);
    if (out.window_hi - out.window_lo < lat.h)
        throw std::invalid_argument(
            "decay_fit: no fitting window between twice the core width and a quarter extent; "
            "shrink eps or enlarge the domain");

    std::vector<double> xs, ys;
    for (int x = 0; x < lat.num_sites; ++x) {
        const double dd = dist[static_cast<std::size_t>(x)];
        if (dd < out.window_lo || dd > out.window_hi) continue;
        const double val = d.e[static_cast<std::size_t>(x)] - out.floor;
        if (!(val > 0.0)) continue;
        xs.push_back(dd / st.eps);
        ys.push_back(std::log(val));
    }
    out.points = static_cast<int>(xs.size());
    if (out.points >= 2) out.fit = fit_line(xs, ys);
    return out;
}

// ---------------------------------------------------------------------------
// Clearing-out probe
// ---------------------------------------------------------------------------

ClearingOutReport clearing_out_probe(const TorusLattice& lat,
                                     std::span<const FieldState> states,
                                     std::span<const double> times,
                                     std::span<const double> eta_grid,
                                     std::span<const double> c_grid,
                                     std::span<const double> radii,
                                     int points_per_state, std::uint64_t seed) {
    if (states.size() != times.size())
        throw std::invalid_argument("clearing_out_probe: series size mismatch");
    const double dt = uniform_cadence(times, "clearing_out_probe");
    if (eta_grid.empty() || c_grid.empty() || radii.empty())
        throw std::invalid_argument("clearing_out_probe: empty grid");

    const std::size_t m = states.size();
    std::vector<std::vector<double>> e(m), usq(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto d = derive_densities(lat, states[k]);
        e[k] = d.e;
        usq[k] = d.u_sq;
    }

    const double l_min = std::min(lat.L[0], std::min(lat.L[1], lat.n == 3 ? lat.L[2] : lat.L[1]));
    std::vector<double> use_radii;
    for (const double r : radii)
        if (r >= 2.0 * lat.h && r <= 0.25 * l_min) use_radii.push_back(r);
    if (use_radii.empty())
        throw std::invalid_argument("clearing_out_probe: no radius inside [2h, L/4]");

    SplitMix64 rng(seed);
    ClearingOutReport rep;

    struct Event {
        double eta_val;
        std::vector<char> recovered;  // one flag per c-grid entry (2 = target missing)
    };
    std::vector<Event> events;

    for (std::size_t k = 0; k + 1 < m; ++k) {
        // Probe sites: seeded-random plus the top-energy handful.
        std::vector<int> pts;
        for (int i = 0; i < points_per_state; ++i)
            pts.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(lat.num_sites))));
        std::vector<int> order(static_cast<std::size_t>(lat.num_sites));
        for (int x = 0; x < lat.num_sites; ++x) order[static_cast<std::size_t>(x)] = x;
        std::partial_sort(order.begin(), order.begin() + std::min<std::ptrdiff_t>(8, lat.num_sites),
                          order.end(), [&](int a, int b) {
                              return e[k][static_cast<std::size_t>(a)] >
                                     e[k][static_cast<std::size_t>(b)];
                          });
        for (int i = 0; i < std::min(8, lat.num_sites); ++i)
            pts.push_back(order[static_cast<std::size_t>(i)]);

        for (const int p : pts) {
            const auto c = lat.coords(p);
            for (const double r : use_radii) {
                const double mass = ball_mass(lat, e[k], c, r);
                const double eta_val = (lat.n == 3) ? mass / r : mass;
                Event ev;
                ev.eta_val = eta_val;
                ev.recovered.assign(c_grid.size(), 2);
                bool any_target = false;
                for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                    const double target = times[k] + c_grid[ci] * r * r;
                    const double pos = (target - times[0]) / dt;
                    const long j = std::lround(pos);
                    if (j < static_cast<long>(k) || j >= static_cast<long>(m)) continue;
                    if (std::abs(pos - static_cast<double>(j)) > 0.5 + 1e-9) continue;
                    any_target = true;
                    const bool ok =
                        usq[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] >= 0.5;
                    ev.recovered[ci] = ok ? 1 : 0;
                }
                if (any_target) events.push_back(std::move(ev));
            }
        }
    }

    rep.table.reserve(eta_grid.size() * c_grid.size());
    for (const double eta : eta_grid) {
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            ClearingOutEntry en;
            en.eta = eta;
            en.c = c_grid[ci];
            for (const auto& ev : events) {
                if (ev.eta_val > eta) continue;
                if (ev.recovered[ci] == 2) continue;
                ++en.premise_hits;
                if (ev.recovered[ci] == 1) ++en.conclusion_hits;
            }
            en.conclusive = en.premise_hits >= 100;
            if (en.conclusive) {
                rep.any_conclusive = true;
                if (en.conclusion_hits == en.premise_hits)
                    rep.frontier_eta = std::max(rep.frontier_eta, eta);
            }
            rep.table.push_back(en);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Transverse quantization
// ---------------------------------------------------------------------------

QuantizationReport transverse_quantization(const TorusLattice& lat, const FieldState& st) {
    const auto d = derive_densities(lat, st);
    const auto vs = extract_vortex_set(lat, st);
    // The flux degree uses the curvature two-form: its section sums telescope
    // to the bundle flux exactly, so quantization holds to rounding, while the
    // energy degree and the integer winding stay sensitive to the field.
    const PlaqField omega = curvature_total(lat, st);
    const double h_sq = lat.h * lat.h;

    QuantizationReport rep;
    const int levels = (lat.n == 3) ? lat.N[2] : 1;

    // A marked plaquette outside the (0,1) family spans two x₂ levels and
    // witnesses vortex material running inside those sections.
    std::vector<char> tangent(static_cast<std::size_t>(levels), 0);
    if (lat.n == 3) {
        for (const auto& vp : vs.marked) {
            if (vp.plane == 0) continue;
            const int i2 = lat.coords(vp.site)[2];
            tangent[static_cast<std::size_t>(i2)] = 1;
            tangent[static_cast<std::size_t>((i2 + 1) % lat.N[2])] = 1;
        }
    }

    std::vector<double> flux_terms, energy_terms;
    for (int level = 0; level < levels; ++level) {
        flux_terms.clear();
        energy_terms.clear();
        for (int x = 0; x < lat.num_sites; ++x) {
            if (lat.n == 3 && lat.coords(x)[2] != level) continue;
            flux_terms.push_back(omega[0][static_cast<std::size_t>(x)]);
            energy_terms.push_back(d.e[static_cast<std::size_t>(x)]);
        }
        SectionQuantization sq;
        sq.index = level;
        sq.flux_degree = h_sq * pairwise_sum(flux_terms.data(), flux_terms.size()) / two_pi;
        sq.energy_degree = h_sq * pairwise_sum(energy_terms.data(), energy_terms.size()) / two_pi;
        sq.winding = vs.section_degree[static_cast<std::size_t>(level)];
        sq.skipped_tangent = tangent[static_cast<std::size_t>(level)] != 0;
        if (!sq.skipped_tangent) {
            ++rep.kept;
            rep.max_flux_deviation = std::max(
                rep.max_flux_deviation, std::abs(sq.flux_degree - static_cast<double>(sq.winding)));
            rep.max_energy_deviation =
                std::max(rep.max_energy_deviation,
                         std::abs(sq.energy_degree - static_cast<double>(sq.winding)));
        }
        rep.sections.push_back(sq);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Localized energy balance
// ---------------------------------------------------------------------------

double brakke_rhs(const TorusLattice& lat, const FieldState& st, const RhsFields& vel,
                  std::span<const double> phi) {
    if (static_cast<int>(phi.size()) != lat.num_sites)
        throw std::invalid_argument("brakke_rhs: weight size mismatch");
    for (const double v : phi)
        if (v < 0.0) throw std::invalid_argument("brakke_rhs: weight must be nonnegative");

    const double hn = std::pow(lat.h, lat.n);
    const double eps_sq = st.eps * st.eps;

    std::vector<double> terms(static_cast<std::size_t>(lat.num_sites));
    for (int x = 0; x < lat.num_sites; ++x) {
        const Complex ud = vel.du[static_cast<std::size_t>(x)];
        double a_sq = 0.0;
        for (int j = 0; j < lat.n; ++j) {
            const double fwd = vel.da[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)];
            const int xp = lat.prev[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)];
            const double bwd = vel.da[static_cast<std::size_t>(j)][static_cast<std::size_t>(xp)];
            a_sq += 0.5 * (fwd * fwd + bwd * bwd);
        }
        terms[static_cast<std::size_t>(x)] =
            phi[static_cast<std::size_t>(x)] * (std::norm(ud) + eps_sq * a_sq);
    }
    const double dissip = pairwise_sum(terms.data(), terms.size());

    const StressTensor T = stress_energy(lat, st);
    const auto divT = stress_divergence(lat, T);
    for (int x = 0; x < lat.num_sites; ++x) {
        double acc = 0.0;
        for (int i = 0; i < lat.n; ++i) {
            const int xn = lat.next[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            const int xp = lat.prev[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            const double dphi = (phi[static_cast<std::size_t>(xn)] -
                                 phi[static_cast<std::size_t>(xp)]) /
                                (2.0 * lat.h);
            acc += divT[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)] * dphi;
        }
        terms[static_cast<std::size_t>(x)] = acc;
    }
    const double transport = pairwise_sum(terms.data(), terms.size());

    return hn * (-2.0 * dissip + transport);
}

BrakkeResidualReport eps_brakke_residual(std::span<const double> times,
                                         std::span<const double> mu,
                                         std::span<const double> rhs,
                                         double scale_floor) {
    if (times.size() != mu.size() || times.size() != rhs.size())
        throw std::invalid_argument("eps_brakke_residual: series size mismatch");
    if (times.size() < 3)
        throw std::invalid_argument("eps_brakke_residual: need at least three samples");
    uniform_cadence(times, "eps_brakke_residual");
    if (!(scale_floor > 0.0))
        throw std::invalid_argument("eps_brakke_residual: scale floor must be positive");

    BrakkeResidualReport rep;
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        const double lhs = (mu[k + 1] - mu[k - 1]) / (times[k + 1] - times[k - 1]);
        const double denom = std::max({std::abs(lhs), std::abs(rhs[k]), scale_floor});
        rep.residual.push_back(std::abs(lhs - rhs[k]) / denom);
    }
    rep.samples = static_cast<int>(rep.residual.size());
    rep.max_residual =
        rep.residual.empty() ? 0.0 : *std::max_element(rep.residual.begin(), rep.residual.end());
    return rep;
}

}  // namespace higgsflow
