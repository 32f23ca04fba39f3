#include "higgsflow/current.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "higgsflow/util.hpp"

namespace higgsflow {

namespace {

// (dw)_{012}(x) = D₀w_{(1,2)} − D₁w_{(0,2)} + D₂w_{(0,1)}, forward differences.
double cube_derivative(const TorusLattice& lat, const PlaqField& w, int x) {
    const double h = lat.h;
    const int x0 = lat.next[0][static_cast<std::size_t>(x)];
    const int x1 = lat.next[1][static_cast<std::size_t>(x)];
    const int x2 = lat.next[2][static_cast<std::size_t>(x)];
    return ((w[2][static_cast<std::size_t>(x0)] - w[2][static_cast<std::size_t>(x)]) -
            (w[1][static_cast<std::size_t>(x1)] - w[1][static_cast<std::size_t>(x)]) +
            (w[0][static_cast<std::size_t>(x2)] - w[0][static_cast<std::size_t>(x)])) /
           h;
}

std::size_t nearest_sample(const SpacetimeCurrent& cur, double t, const char* who) {
    if (cur.empty()) throw std::invalid_argument(std::string(who) + ": no samples");
    const auto& s = cur.samples();
    const double tol = 1e-9 * (std::abs(cur.t_back()) + 1.0);
    if (t < cur.t_front() - tol || t > cur.t_back() + tol)
        throw std::invalid_argument(std::string(who) + ": time outside the sampled range");
    std::size_t best = 0;
    double best_d = std::abs(s[0].t - t);
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double d = std::abs(s[k].t - t);
        if (d < best_d) {
            best = k;
            best_d = d;
        }
    }
    return best;
}

}  // namespace

void SpacetimeCurrent::append(SpacetimeSample sample) {
    if (!samples_.empty()) {
        const double dt = sample.t - samples_.back().t;
        if (!(dt > 0.0))
            throw std::invalid_argument("SpacetimeCurrent: sample times must increase");
        if (cadence_ == 0.0) {
            cadence_ = dt;
        } else if (std::abs(dt - cadence_) > 1e-7 * (std::abs(sample.t) + cadence_)) {
            throw std::invalid_argument("SpacetimeCurrent: sample cadence is not uniform");
        }
    }
    samples_.push_back(std::move(sample));
}

SpacetimeSample sample_current(const TorusLattice& lat, const FieldState& st,
                               const RhsFields& vel) {
    SpacetimeSample out;
    out.t = st.time;
    out.J_spatial = jacobian_form(lat, st);
    const PlaqField omega = curvature_total(lat, st);
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto& w = omega[static_cast<std::size_t>(p)];
        double total = lat.h * lat.h * pairwise_sum(w.data(), w.size()) / two_pi;
        if (lat.n == 3) {
            const auto [ai, aj] = lat.plane_axes(p);
            total /= static_cast<double>(lat.N[static_cast<std::size_t>(3 - ai - aj)]);
        }
        out.flux_degree[static_cast<std::size_t>(p)] = total;
    }
    const auto Du = covariant_derivative(lat, st);
    for (int j = 0; j < lat.n; ++j) {
        auto& Jm = out.J_mixed[static_cast<std::size_t>(j)];
        Jm.resize(static_cast<std::size_t>(lat.num_sites));
        const auto& Dj = Du[static_cast<std::size_t>(j)];
        const auto& aj = vel.da[static_cast<std::size_t>(j)];
        for (int x = 0; x < lat.num_sites; ++x) {
            const Complex ud = vel.du[static_cast<std::size_t>(x)];
            const double pair = 2.0 * (ud.real() * Dj[static_cast<std::size_t>(x)].imag() -
                                       ud.imag() * Dj[static_cast<std::size_t>(x)].real());
            const double usq = std::norm(st.u[static_cast<std::size_t>(x)]);
            Jm[static_cast<std::size_t>(x)] =
                pair + (1.0 - usq) * aj[static_cast<std::size_t>(x)];
        }
    }
    return out;
}

ClosednessReport closedness_residual(const TorusLattice& lat, const SpacetimeCurrent& cur,
                                     double t_lo, double t_hi) {
    const auto& s = cur.samples();
    std::vector<std::size_t> idx;
    const double tol = 1e-9 * (std::abs(t_hi) + 1.0);
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k].t >= t_lo - tol && s[k].t <= t_hi + tol) idx.push_back(k);
    if (idx.size() < 3)
        throw std::invalid_argument("closedness_residual: need at least three samples in window");
    for (std::size_t m = 1; m < idx.size(); ++m)
        if (idx[m] != idx[m - 1] + 1)
            throw std::invalid_argument("closedness_residual: window samples are not contiguous");

    ClosednessReport rep;
    PlaqField curl_prev = d_link_to_plaquette(lat, s[idx.front()].J_mixed);
    for (std::size_t m = 0; m + 1 < idx.size(); ++m) {
        const auto& a = s[idx[m]];
        const auto& b = s[idx[m + 1]];
        const double dt = b.t - a.t;
        PlaqField curl_next = d_link_to_plaquette(lat, b.J_mixed);
        for (int p = 0; p < lat.plane_count(); ++p) {
            const auto& ja = a.J_spatial[static_cast<std::size_t>(p)];
            const auto& jb = b.J_spatial[static_cast<std::size_t>(p)];
            const auto& ca = curl_prev[static_cast<std::size_t>(p)];
            const auto& cb = curl_next[static_cast<std::size_t>(p)];
            for (int x = 0; x < lat.num_sites; ++x) {
                const double r = (jb[static_cast<std::size_t>(x)] -
                                  ja[static_cast<std::size_t>(x)]) / dt -
                                 0.5 * (ca[static_cast<std::size_t>(x)] +
                                        cb[static_cast<std::size_t>(x)]);
                rep.max_residual = std::max(rep.max_residual, std::abs(r));
            }
        }
        curl_prev = std::move(curl_next);
        ++rep.pairs;
    }

    if (lat.n == 3) {
        for (const std::size_t k : idx) {
            for (int x = 0; x < lat.num_sites; ++x)
                rep.pure_space_max = std::max(
                    rep.pure_space_max, std::abs(cube_derivative(lat, s[k].J_spatial, x)));
        }
    }
    return rep;
}

double curvature_closedness(const TorusLattice& lat, const FieldState& st) {
    if (lat.n != 3) return 0.0;
    const PlaqField omega = curvature_total(lat, st);
    double worst = 0.0;
    for (int x = 0; x < lat.num_sites; ++x)
        worst = std::max(worst, std::abs(cube_derivative(lat, omega, x)));
    return worst;
}

double slice_flux_degree(const TorusLattice& lat, const SpacetimeCurrent& cur, double t,
                         int plane) {
    if (plane < 0 || plane >= lat.plane_count())
        throw std::invalid_argument("slice_flux_degree: plane index out of range");
    const std::size_t k = nearest_sample(cur, t, "slice_flux_degree");
    return cur.samples()[k].flux_degree[static_cast<std::size_t>(plane)];
}

double disk_crossing_degree(const TorusLattice& lat, const SpacetimeCurrent& cur, double t,
                            std::array<double, 3> center) {
    if (lat.n != 3) throw std::invalid_argument("disk_crossing_degree: needs three axes");
    const std::size_t k = nearest_sample(cur, t, "disk_crossing_degree");
    const auto& J = cur.samples()[k].J_spatial[1];  // plane (0,2)
    const int i1 = ((static_cast<int>(std::lround(center[1] / lat.h)) % lat.N[1]) + lat.N[1]) %
                   lat.N[1];
    const int i0_start = ((static_cast<int>(std::lround(center[0] / lat.h)) % lat.N[0]) +
                          lat.N[0]) % lat.N[0];
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(lat.N[0] / 2) * static_cast<std::size_t>(lat.N[2]));
    for (int step = 0; step < lat.N[0] / 2; ++step) {
        const int i0 = (i0_start + step) % lat.N[0];
        for (int i2 = 0; i2 < lat.N[2]; ++i2)
            terms.push_back(J[static_cast<std::size_t>(lat.index(i0, i1, i2))]);
    }
    // (0,2)-plaquettes are oriented with normal −e₁; flip so a positively
    // oriented ring crossing the half section reads +1.
    return -lat.h * lat.h * pairwise_sum(terms.data(), terms.size()) / two_pi;
}

WindowMassReport window_mass_check(const TorusLattice& lat, const SpacetimeCurrent& cur,
                                   std::span<const std::array<double, 2>> windows,
                                   double initial_energy) {
    WindowMassReport rep;
    for (const auto& w : windows) {
        if (!(w[1] > w[0]))
            throw std::invalid_argument("window_mass_check: window must have positive length");
        rep.length += w[1] - w[0];
    }
    if (windows.empty() || cur.samples().size() < 2) {
        rep.skipped = true;
        return rep;
    }

    const auto& s = cur.samples();
    std::vector<double> site_mass(s.size(), -1.0);  // lazily filled h^n Σ|J̃|
    const double hn = std::pow(lat.h, lat.n);
    auto total_mass = [&](std::size_t k) {
        if (site_mass[k] >= 0.0) return site_mass[k];
        std::vector<double> terms(static_cast<std::size_t>(lat.num_sites));
        for (int x = 0; x < lat.num_sites; ++x) {
            double sq = 0.0;
            for (int p = 0; p < lat.plane_count(); ++p) {
                const double v = s[k].J_spatial[static_cast<std::size_t>(p)]
                                               [static_cast<std::size_t>(x)];
                sq += v * v;
            }
            for (int j = 0; j < lat.n; ++j) {
                const double v = s[k].J_mixed[static_cast<std::size_t>(j)]
                                             [static_cast<std::size_t>(x)];
                sq += v * v;
            }
            terms[static_cast<std::size_t>(x)] = std::sqrt(sq);
        }
        site_mass[k] = hn * pairwise_sum(terms.data(), terms.size());
        return site_mass[k];
    };

    const double tol = 1e-9 * (std::abs(cur.t_back()) + 1.0);
    double mass = 0.0;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double a = s[k].t;
        const double b = s[k + 1].t;
        bool inside = false;
        for (const auto& w : windows)
            if (a >= w[0] - tol && b <= w[1] + tol) {
                inside = true;
                break;
            }
        if (!inside) continue;
        mass += (b - a) * 0.5 * (total_mass(k) + total_mass(k + 1));
        ++rep.pairs;
    }
    if (rep.pairs == 0) {
        rep.skipped = true;
        return rep;
    }
    rep.mass_over_2pi = mass / two_pi;
    const double len = rep.length;
    rep.bound = (initial_energy / two_pi) * (len + 2.0 * std::sqrt(len)) * 1.1;
    rep.pass = rep.mass_over_2pi <= rep.bound;
    return rep;
}

SliceDominationReport slice_mass_domination(const TorusLattice& lat, const FieldState& st) {
    const auto d = derive_densities(lat, st);
    const double hn = std::pow(lat.h, lat.n);
    SliceDominationReport rep;
    std::vector<double> terms(static_cast<std::size_t>(lat.num_sites));
    double excess = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < lat.num_sites; ++x) {
        double sq = 0.0;
        for (int p = 0; p < lat.plane_count(); ++p) {
            const double v = d.J_site[static_cast<std::size_t>(p)][static_cast<std::size_t>(x)];
            sq += v * v;
        }
        const double mag = std::sqrt(sq);
        terms[static_cast<std::size_t>(x)] = mag;
        excess = std::max(excess, mag - d.e[static_cast<std::size_t>(x)]);
    }
    rep.max_pointwise_excess = excess;
    rep.mass_over_2pi = hn * pairwise_sum(terms.data(), terms.size()) / two_pi;
    rep.energy_over_2pi = d.E / two_pi;
    rep.pass = excess <= 1e-8 && rep.mass_over_2pi <= rep.energy_over_2pi + 1e-10;
    return rep;
}

}  // namespace higgsflow
