#include "higgsflow/field_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace higgsflow {

FieldState make_vacuum_state(const TorusLattice& lat, double eps) {
    if (lat.bg.q != 0)
        throw std::invalid_argument("make_vacuum_state: vacuum requires an untwisted bundle (q = 0)");
    FieldState st;
    st.eps = eps;
    st.u.assign(lat.num_sites, Complex{1.0, 0.0});
    st.a = lat.make_link_field();
    return st;
}

std::array<std::vector<Complex>, 3> link_transporters(const TorusLattice& lat,
                                                      const FieldState& st) {
    std::array<std::vector<Complex>, 3> T;
    const bool twisted = lat.bg.q != 0;
    for (int j = 0; j < lat.n; ++j) {
        T[j].resize(lat.num_sites);
        const auto& aj = st.a[j];
        const double* bg = twisted ? lat.bg.a[j].data() : nullptr;
        for (int x = 0; x < lat.num_sites; ++x) {
            const double A = aj[x] + (bg ? bg[x] : 0.0);
            const double phase = -lat.h * A;
            T[j][x] = Complex{std::cos(phase), std::sin(phase)};
        }
    }
    return T;
}

std::array<std::vector<Complex>, 3> covariant_derivative(const TorusLattice& lat,
                                                         const FieldState& st) {
    auto T = link_transporters(lat, st);
    std::array<std::vector<Complex>, 3> Du;
    const double inv_h = 1.0 / lat.h;
    for (int j = 0; j < lat.n; ++j) {
        Du[j].resize(lat.num_sites);
        const auto& nj = lat.next[j];
        for (int x = 0; x < lat.num_sites; ++x)
            Du[j][x] = (T[j][x] * st.u[nj[x]] - st.u[x]) * inv_h;
    }
    return Du;
}

PlaqField curvature_total(const TorusLattice& lat, const FieldState& st) {
    PlaqField w = d_link_to_plaquette(lat, st.a);
    if (lat.bg.q != 0) {
        const double B = lat.bg.B;
        for (double& v : w[0]) v += B;
    }
    return w;
}

namespace {

// Shared assembly used by derive_densities and the thin spec-named wrappers.
struct SiteTensors {
    std::array<std::vector<Complex>, 3> Du;
    std::array<std::vector<Complex>, 3> T;  // transporters, kept for backward transport
    PlaqField omega;
};

SiteTensors assemble(const TorusLattice& lat, const FieldState& st) {
    SiteTensors out;
    out.T = link_transporters(lat, st);
    const double inv_h = 1.0 / lat.h;
    for (int j = 0; j < lat.n; ++j) {
        out.Du[j].resize(lat.num_sites);
        const auto& nj = lat.next[j];
        for (int x = 0; x < lat.num_sites; ++x)
            out.Du[j][x] = (out.T[j][x] * st.u[nj[x]] - st.u[x]) * inv_h;
    }
    out.omega = curvature_total(lat, st);
    return out;
}

// Backward covariant derivative transported to x: e^{+ihA_j(x−he_j)} D_j u(x−he_j).
inline Complex backward_transported(const TorusLattice& lat, const SiteTensors& t, int j, int x) {
    const int y = lat.prev[j][x];
    return std::conj(t.T[j][y]) * t.Du[j][y];
}

}  // namespace

DerivedDensities derive_densities(const TorusLattice& lat, const FieldState& st,
                                  OmegaAveraging scheme) {
    DerivedDensities d;
    SiteTensors t = assemble(lat, st);
    const int ns = lat.num_sites;
    const double eps = st.eps;
    const double eps2 = eps * eps;

    d.Du = t.Du;
    d.omega = t.omega;
    d.grad_sq.assign(ns, 0.0);
    d.curv_sq.assign(ns, 0.0);
    d.u_sq.resize(ns);
    d.e.resize(ns);
    d.xi.resize(ns);
    d.Xi_defect.resize(ns);
    for (int p = 0; p < lat.plane_count(); ++p) d.J_site[p].assign(ns, 0.0);

    for (int x = 0; x < ns; ++x) d.u_sq[x] = std::norm(st.u[x]);

    // |∇u|²: half of forward plus backward link squares.
    for (int j = 0; j < lat.n; ++j) {
        const auto& Duj = t.Du[j];
        const auto& pj = lat.prev[j];
        auto& g = d.grad_sq;
        for (int x = 0; x < ns; ++x)
            g[x] += 0.5 * (std::norm(Duj[x]) + std::norm(Duj[pj[x]]));
    }

    // |ω|² (mean of incident squares) and the signed site curvature means,
    // plus the site Jacobian components from forward/backward pairs.
    std::vector<double> xi_curv_sq(ns, 0.0);  // scheme-dependent |ω|² for xi
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [i, j] = TorusLattice::plane_axes(p);
        const auto& wp = t.omega[p];
        const auto& pi_ = lat.prev[i];
        const auto& pj_ = lat.prev[j];
        for (int x = 0; x < ns; ++x) {
            const double w0 = wp[x];
            const double w1 = wp[pi_[x]];
            const double w2 = wp[pj_[x]];
            const double w3 = wp[pi_[pj_[x]]];
            const double mean_sq = 0.25 * (w0 * w0 + w1 * w1 + w2 * w2 + w3 * w3);
            d.curv_sq[x] += mean_sq;
            xi_curv_sq[x] += (scheme == OmegaAveraging::arithmetic)
                                 ? mean_sq
                                 : std::max(std::max(w0 * w0, w1 * w1), std::max(w2 * w2, w3 * w3));
            const double mean = 0.25 * (w0 + w1 + w2 + w3);
            // ψ site component: average of the forward and backward frames,
            // each exactly gauge-invariant.
            const Complex fi = t.Du[i][x];
            const Complex fj = t.Du[j][x];
            const Complex bi = backward_transported(lat, t, i, x);
            const Complex bj = backward_transported(lat, t, j, x);
            const double psi =
                std::imag(std::conj(fi) * fj) + std::imag(std::conj(bi) * bj);
            d.J_site[p][x] = psi + (1.0 - d.u_sq[x]) * mean;
        }
    }

    double max_xi = -1e300;
    double max_u2 = 0.0;
    for (int x = 0; x < ns; ++x) {
        const double one_m = 1.0 - d.u_sq[x];
        const double W = 0.25 * one_m * one_m;
        d.e[x] = d.grad_sq[x] + eps2 * d.curv_sq[x] + W / eps2;
        d.xi[x] = eps * std::sqrt(xi_curv_sq[x]) - one_m / (2.0 * eps);
        d.Xi_defect[x] = eps2 * d.curv_sq[x] - W / eps2;
        if (d.xi[x] > max_xi) max_xi = d.xi[x];
        if (d.u_sq[x] > max_u2) max_u2 = d.u_sq[x];
    }
    d.max_xi = max_xi;
    d.max_abs_u = std::sqrt(max_u2);

    const double hn = std::pow(lat.h, lat.n);
    d.E = hn * pairwise_sum(d.e);

    // Plaquette Jacobian: ψ from covariant parallel-edge averages, |u|² from
    // the four corners, ω from the plaquette itself.
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [i, j] = TorusLattice::plane_axes(p);
        d.J_plaq[p].resize(ns);
        const auto& ni = lat.next[i];
        const auto& nj = lat.next[j];
        for (int x = 0; x < ns; ++x) {
            const int xi_ = ni[x];
            const int xj_ = nj[x];
            const Complex avg_i = 0.5 * (t.Du[i][x] + t.T[j][x] * t.Du[i][xj_]);
            const Complex avg_j = 0.5 * (t.Du[j][x] + t.T[i][x] * t.Du[j][xi_]);
            const double psi = 2.0 * std::imag(std::conj(avg_i) * avg_j);
            const double usq =
                0.25 * (d.u_sq[x] + d.u_sq[xi_] + d.u_sq[xj_] + d.u_sq[ni[xj_]]);
            d.J_plaq[p][x] = psi + (1.0 - usq) * t.omega[p][x];
        }
    }
    return d;
}

EnergyDensity energy_density(const TorusLattice& lat, const FieldState& st) {
    DerivedDensities d = derive_densities(lat, st);
    return EnergyDensity{std::move(d.e), d.E};
}

DiscrepancyField discrepancy_field(const TorusLattice& lat, const FieldState& st,
                                   OmegaAveraging scheme) {
    DerivedDensities d = derive_densities(lat, st, scheme);
    return DiscrepancyField{std::move(d.xi), d.max_xi};
}

StressTensor stress_energy(const TorusLattice& lat, const FieldState& st) {
    DerivedDensities d = derive_densities(lat, st);
    SiteTensors t = assemble(lat, st);
    const int ns = lat.num_sites;
    const int n = lat.n;
    const double eps2 = st.eps * st.eps;

    StressTensor T;
    T.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) T.comp[StressTensor::slot(i, j)].assign(ns, 0.0);

    // Signed site curvature means Ω̄ per plane (for the off-diagonal ω*ω).
    std::array<std::vector<double>, 3> Om;
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [i, j] = TorusLattice::plane_axes(p);
        Om[p].resize(ns);
        const auto& wp = t.omega[p];
        const auto& pi_ = lat.prev[i];
        const auto& pj_ = lat.prev[j];
        for (int x = 0; x < ns; ++x)
            Om[p][x] = 0.25 * (wp[x] + wp[pi_[x]] + wp[pj_[x]] + wp[pi_[pj_[x]]]);
    }
    const auto Om_at = [&](int i, int j, int x) -> double {
        if (i == j) return 0.0;
        return (i < j) ? Om[TorusLattice::plane_of(i, j)][x]
                       : -Om[TorusLattice::plane_of(j, i)][x];
    };
    // Mean of incident squares of ω_{ik} summed over k, for the diagonal; this
    // is what makes tr𝒯 = n·e − 2|∇u|² − 4ε²|ω|² exact (it equals curv_sq
    // restricted to the planes through axis i, counted once per plane).
    const auto curv_diag = [&](int i, int x) -> double {
        double s = 0.0;
        for (int p = 0; p < lat.plane_count(); ++p) {
            const auto ax = TorusLattice::plane_axes(p);
            if (ax[0] != i && ax[1] != i) continue;
            const auto& wp = t.omega[p];
            const auto& pa = lat.prev[ax[0]];
            const auto& pb = lat.prev[ax[1]];
            const double w0 = wp[x], w1 = wp[pa[x]], w2 = wp[pb[x]], w3 = wp[pa[pb[x]]];
            s += 0.25 * (w0 * w0 + w1 * w1 + w2 * w2 + w3 * w3);
        }
        return s;
    };

    for (int x = 0; x < ns; ++x) {
        // G_ij from forward/backward frames.
        std::array<Complex, 3> fwd{}, bwd{};
        for (int j = 0; j < n; ++j) {
            fwd[j] = t.Du[j][x];
            bwd[j] = backward_transported(lat, t, j, x);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double G =
                    0.5 * (std::real(std::conj(fwd[i]) * fwd[j]) +
                           std::real(std::conj(bwd[i]) * bwd[j]));
                double ww;
                if (i == j) {
                    ww = curv_diag(i, x);
                } else {
                    ww = 0.0;
                    for (int k = 0; k < n; ++k) ww += Om_at(i, k, x) * Om_at(j, k, x);
                }
                double v = -2.0 * G - 2.0 * eps2 * ww;
                if (i == j) v += d.e[x];
                T.comp[StressTensor::slot(i, j)][x] = v;
            }
    }
    return T;
}

std::array<std::vector<double>, 3> stress_divergence(const TorusLattice& lat,
                                                     const StressTensor& T) {
    std::array<std::vector<double>, 3> div;
    const double inv2h = 1.0 / (2.0 * lat.h);
    for (int j = 0; j < lat.n; ++j) {
        div[j].assign(lat.num_sites, 0.0);
        for (int i = 0; i < lat.n; ++i) {
            const auto& Tij = T.comp[StressTensor::slot(std::min(i, j), std::max(i, j))];
            const auto& ni = lat.next[i];
            const auto& pi_ = lat.prev[i];
            for (int x = 0; x < lat.num_sites; ++x)
                div[j][x] += (Tij[ni[x]] - Tij[pi_[x]]) * inv2h;
        }
    }
    return div;
}

PlaqField jacobian_form(const TorusLattice& lat, const FieldState& st) {
    DerivedDensities d = derive_densities(lat, st);
    return std::move(d.J_plaq);
}

FieldState gauge_transform(const TorusLattice& lat, const FieldState& st,
                           const std::vector<double>& phi) {
    if (static_cast<int>(phi.size()) != lat.num_sites)
        throw std::invalid_argument("gauge_transform: phi must have one value per site");
    FieldState out;
    out.eps = st.eps;
    out.time = st.time;
    out.u.resize(lat.num_sites);
    out.a = lat.make_link_field();
    for (int x = 0; x < lat.num_sites; ++x)
        out.u[x] = Complex{std::cos(phi[x]), std::sin(phi[x])} * st.u[x];
    const double inv_h = 1.0 / lat.h;
    for (int j = 0; j < lat.n; ++j) {
        const auto& nj = lat.next[j];
        for (int x = 0; x < lat.num_sites; ++x)
            out.a[j][x] = st.a[j][x] + (phi[nj[x]] - phi[x]) * inv_h;
    }
    return out;
}

double equipartition_integral(const TorusLattice& lat, const FieldState& st) {
    DerivedDensities d = derive_densities(lat, st);
    std::vector<double> absXi(d.Xi_defect.size());
    for (std::size_t i = 0; i < absXi.size(); ++i) absXi[i] = std::abs(d.Xi_defect[i]);
    return std::pow(lat.h, lat.n) * pairwise_sum(absXi);
}

DensityBoundReport density_bound_check(const TorusLattice& lat, const FieldState& st,
                                       const std::vector<double>& radii, std::uint64_t seed) {
    DerivedDensities d = derive_densities(lat, st);
    DensityBoundReport rep;

    // sup_x e / ((1−|u|²)²/ε² + 1)
    const double eps2 = st.eps * st.eps;
    double sup_er = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) {
        const double one_m = 1.0 - d.u_sq[x];
        const double denom = one_m * one_m / eps2 + 1.0;
        sup_er = std::max(sup_er, d.e[x] / denom);
    }
    rep.sup_energy_ratio = sup_er;

    // Centers: highest-energy sites, greedily separated by 4h, plus random.
    std::vector<int> order(lat.num_sites);
    for (int x = 0; x < lat.num_sites; ++x) order[x] = x;
    std::partial_sort(order.begin(), order.begin() + std::min(lat.num_sites, 4096), order.end(),
                      [&](int a, int b) { return d.e[a] > d.e[b]; });
    std::vector<int> centers;
    const double min_sep = 4.0 * lat.h;
    auto dist_wrapped = [&](int a, int b) {
        const auto ca = lat.coords(a);
        const auto cb = lat.coords(b);
        double s = 0.0;
        for (int j = 0; j < lat.n; ++j) {
            const double w = wrap_delta(lat.h * (ca[j] - cb[j]), lat.L[j]);
            s += w * w;
        }
        return std::sqrt(s);
    };
    for (int k = 0; k < std::min(lat.num_sites, 4096) && centers.size() < 16; ++k) {
        const int cand = order[k];
        bool ok = true;
        for (int c : centers)
            if (dist_wrapped(cand, c) < min_sep) {
                ok = false;
                break;
            }
        if (ok) centers.push_back(cand);
    }
    SplitMix64 rng(seed);
    for (int k = 0; k < 16; ++k)
        centers.push_back(static_cast<int>(rng.next_below(lat.num_sites)));

    const double hn = std::pow(lat.h, lat.n);
    const double omega_ball = (lat.n == 3) ? 2.0 : 1.0;  // volume of unit (n−2)-ball
    for (double r : radii) {
        DensityBoundEntry entry;
        entry.r = r;
        if (r < 2.0 * lat.h || r > 0.5 * *std::min_element(lat.L.begin(), lat.L.begin() + lat.n)) {
            entry.skipped = true;
            rep.per_radius.push_back(entry);
            continue;
        }
        // Clamp the scan so each site is visited at most once even when the
        // ball diameter approaches the torus period.
        const int reach = std::min(static_cast<int>(std::floor(r / lat.h)) + 1,
                                   (*std::min_element(lat.N.begin(), lat.N.begin() + lat.n) - 1) / 2);
        double sup = 0.0;
        for (int c : centers) {
            const auto cc = lat.coords(c);
            double mu = 0.0;
            const double r2 = r * r;
            for (int d2 = (lat.n == 3 ? -reach : 0); d2 <= (lat.n == 3 ? reach : 0); ++d2)
                for (int d1 = -reach; d1 <= reach; ++d1)
                    for (int d0 = -reach; d0 <= reach; ++d0) {
                        const double w0 = wrap_delta(lat.h * d0, lat.L[0]);
                        const double w1 = wrap_delta(lat.h * d1, lat.L[1]);
                        const double w2 = (lat.n == 3) ? wrap_delta(lat.h * d2, lat.L[2]) : 0.0;
                        if (w0 * w0 + w1 * w1 + w2 * w2 > r2) continue;
                        const int i0 = (cc[0] + d0 % lat.N[0] + lat.N[0]) % lat.N[0];
                        const int i1 = (cc[1] + d1 % lat.N[1] + lat.N[1]) % lat.N[1];
                        const int i2 = lat.n == 3 ? (cc[2] + d2 % lat.N[2] + lat.N[2]) % lat.N[2] : 0;
                        mu += d.e[lat.index(i0, i1, i2)];
                    }
            mu *= hn;
            const double norm = omega_ball * std::pow(r, lat.n - 2);
            sup = std::max(sup, mu / norm);
        }
        entry.sup_ratio = sup;
        rep.per_radius.push_back(entry);
    }
    return rep;
}

}  // namespace higgsflow
