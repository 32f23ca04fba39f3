#include "higgsflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>

namespace higgsflow {

namespace {

struct Pair {
    double f, a;
};

// Right-hand side of the first-order system away from r = 0.
inline Pair rhs(int N, double r, Pair y) {
    return {N * (1.0 - y.a) * y.f / r, r * (1.0 - y.f * y.f) * (0.5 / N)};
}

// Series start at small r:  f = c r^N e^{-r²/8},  a = r²/(4N) − c² r^{2N+2}/(2N(2N+2)).
inline Pair series_start(int N, double c, double r) {
    const double f = c * std::pow(r, N) * std::exp(-r * r / 8.0);
    const double a = r * r / (4.0 * N) - c * c * std::pow(r, 2 * N + 2) / (2.0 * N * (2.0 * N + 2.0));
    return {f, a};
}

inline Pair rk4_step(int N, double r, Pair y, double dr) {
    const Pair k1 = rhs(N, r, y);
    const Pair k2 = rhs(N, r + 0.5 * dr, {y.f + 0.5 * dr * k1.f, y.a + 0.5 * dr * k1.a});
    const Pair k3 = rhs(N, r + 0.5 * dr, {y.f + 0.5 * dr * k2.f, y.a + 0.5 * dr * k2.a});
    const Pair k4 = rhs(N, r + dr, {y.f + dr * k3.f, y.a + dr * k3.a});
    return {y.f + dr / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f),
            y.a + dr / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a)};
}

// Classify a shooting coefficient: +1 if f overshoots past 1 (c too large),
// −1 if f turns around and decreases before reaching 1 (c too small),
// 0 if neither happens before r_probe (numerically on the separatrix).
int classify(int N, double c, double dr, double r_probe) {
    Pair y = series_start(N, c, dr);
    double r = dr;
    double f_prev = y.f;
    while (r < r_probe) {
        y = rk4_step(N, r, y, dr);
        r += dr;
        if (!std::isfinite(y.f) || y.f > 1.0 + 1e-12) return +1;
        if (y.f < f_prev - 1e-13 && y.f < 1.0 - 1e-6) return -1;
        f_prev = y.f;
    }
    return 0;
}

inline double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

// 5-point 4th-order first and second derivative at interior node k.
inline double fd4_d1(const std::vector<double>& v, int k, double dr) {
    return (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * dr);
}
inline double fd4_d2(const std::vector<double>& v, int k, double dr) {
    return (-v[k - 2] + 16.0 * v[k - 1] - 30.0 * v[k] + 16.0 * v[k + 1] - v[k + 2]) /
           (12.0 * dr * dr);
}

}  // namespace

VortexProfile solve_bogomolny(int N, double r_max, int M) {
    if (N < 1) throw std::invalid_argument("solve_bogomolny: degree must be >= 1");
    if (r_max < 20.0) throw std::invalid_argument("solve_bogomolny: r_max must be >= 20");
    if (M < 2000) throw std::invalid_argument("solve_bogomolny: need at least 2000 intervals");

    VortexProfile p;
    p.N = N;
    p.r_max = r_max;
    p.M = M;
    p.dr = r_max / M;

    // The shooting solution carries an e^{+r} contamination of relative size
    // ~ bracket-width · e^{r}; probing to r ≈ 14 keeps classification clean
    // at the ~1e−15 coefficient accuracy reached by the bisection.
    const double r_probe = std::min(14.0, r_max);

    double lo = 1e-4, hi = 8.0;
    if (classify(N, lo, p.dr, r_probe) != -1 || classify(N, hi, p.dr, r_probe) != +1)
        throw std::runtime_error("solve_bogomolny: shooting bracket not found for degree " +
                                 std::to_string(N));
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const int cls = classify(N, mid, p.dr, r_probe);
        if (cls >= 0)
            hi = mid;
        else
            lo = mid;
    }
    p.c_shoot = 0.5 * (lo + hi);

    // Two-sided construction.  The forward trajectory is reliable well past
    // the matching window (growing-mode contamination there is ~1e−10), but
    // degrades exponentially toward r_max.  Integrating backward from r_max,
    // the growing mode decays instead, and the linearized far field
    // f = 1 − A·K₀, a = 1 − A·r·K₁/N is exact initial data there to
    // O(A²e^{−2r_max}).  The tail amplitude A is bisected so the backward
    // sweep meets the forward value of f at the window center; the two
    // trajectories then agree over the window to the integrator's global
    // accuracy, and a smooth cross-fade between them stays a solution to the
    // same order — no kink for high-order finite differences to amplify.
    p.r.resize(M + 1);
    p.f.resize(M + 1);
    p.a.resize(M + 1);
    for (int k = 0; k <= M; ++k) p.r[k] = k * p.dr;

    const double r_match = 5.0;
    const int k_lo = static_cast<int>(std::lround((r_match - 1.0) / p.dr));
    const int k_m = static_cast<int>(std::lround(r_match / p.dr));
    const int k_hi = static_cast<int>(std::lround((r_match + 1.0) / p.dr));

    p.f[0] = 0.0;
    p.a[0] = 0.0;
    Pair y = series_start(N, p.c_shoot, p.dr);
    p.f[1] = y.f;
    p.a[1] = y.a;
    for (int k = 1; k < k_hi; ++k) {
        y = rk4_step(N, p.r[k], y, p.dr);
        p.f[k + 1] = y.f;
        p.a[k + 1] = y.a;
    }
    const double f_target = p.f[k_m];

    auto backward = [&](double A, std::vector<double>* ff, std::vector<double>* aa) {
        Pair z{1.0 - A * std::cyl_bessel_k(0.0, r_max),
               1.0 - A * r_max * std::cyl_bessel_k(1.0, r_max) / N};
        if (ff) {
            (*ff)[static_cast<std::size_t>(M)] = z.f;
            (*aa)[static_cast<std::size_t>(M)] = z.a;
        }
        for (int k = M; k > k_lo; --k) {
            z = rk4_step(N, p.r[k], z, -p.dr);
            if (ff) {
                (*ff)[static_cast<std::size_t>(k - 1)] = z.f;
                (*aa)[static_cast<std::size_t>(k - 1)] = z.a;
            } else if (k - 1 == k_m) {
                return z;
            }
        }
        return z;
    };

    double a_lo = 1e-8, a_hi = 2.0;
    while (backward(a_hi, nullptr, nullptr).f > f_target) {
        a_hi *= 2.0;
        if (a_hi > 1e8)
            throw std::runtime_error("solve_bogomolny: tail amplitude bracket not found");
    }
    for (int it = 0; it < 200 && (a_hi - a_lo) > 1e-15 * a_hi; ++it) {
        const double mid = 0.5 * (a_lo + a_hi);
        if (backward(mid, nullptr, nullptr).f > f_target)
            a_lo = mid;
        else
            a_hi = mid;
    }
    p.tail_A = 0.5 * (a_lo + a_hi);
    p.graft_r = p.r[k_m];

    std::vector<double> fb(M + 1, 0.0), ab(M + 1, 0.0);
    backward(p.tail_A, &fb, &ab);
    for (int k = k_lo; k <= M; ++k) {
        const double w =
            (k >= k_hi) ? 1.0 : smoothstep((p.r[k] - p.r[k_lo]) / (p.r[k_hi] - p.r[k_lo]));
        p.f[k] = (1.0 - w) * p.f[k] + w * fb[k];
        p.a[k] = (1.0 - w) * p.a[k] + w * ab[k];
    }

    // Monotonicity / range guard (allowing roundoff-level slack).
    for (int k = 0; k <= M; ++k) {
        if (p.f[k] < -1e-14 || p.f[k] > 1.0 + 1e-12 || p.a[k] < -1e-14 || p.a[k] > 1.0 + 1e-12)
            throw std::runtime_error("solve_bogomolny: solution leaves [0,1]");
        if (k > 0 && (p.f[k] < p.f[k - 1] - 1e-12 || p.a[k] < p.a[k - 1] - 1e-12))
            throw std::runtime_error("solve_bogomolny: non-monotone solution");
    }

    // Planar energy 2π ∫ [f′² + N²(1−a)²f²/r² + N²a′²/r² + ¼(1−f²)²] r dr by
    // Simpson's rule, with the derivatives taken from the first-order system
    // (the integrand extends continuously by 0 to r = 0 for N ≥ 1).
    {
        std::vector<double> g(M + 1, 0.0);
        for (int k = 1; k <= M; ++k) {
            const double r = p.r[k], f = p.f[k], a = p.a[k];
            const double fp = N * (1.0 - a) * f / r;
            const double ap = r * (1.0 - f * f) * (0.5 / N);
            const double one_m_f2 = 1.0 - f * f;
            g[k] = (fp * fp + N * N * (1.0 - a) * (1.0 - a) * f * f / (r * r) +
                    N * N * ap * ap / (r * r) + 0.25 * one_m_f2 * one_m_f2) *
                   r;
        }
        double s = 0.0;
        for (int k = 0; k + 2 <= M; k += 2) s += g[k] + 4.0 * g[k + 1] + g[k + 2];
        if (M % 2 != 0)  // trapezoid for a final odd interval
            s += 1.5 * (g[M - 1] + g[M]);
        p.energy = two_pi * s * p.dr / 3.0;
    }
    return p;
}

VortexProfile make_vacuum_branch_profile(int N, double r_max, int M) {
    VortexProfile p;
    p.N = N;
    p.r_max = r_max;
    p.M = M;
    p.dr = r_max / M;
    p.r.resize(M + 1);
    p.f.assign(M + 1, 1.0);
    p.a.assign(M + 1, 1.0);
    for (int k = 0; k <= M; ++k) p.r[k] = k * p.dr;
    p.f[0] = 1.0;
    p.a[0] = 1.0;
    p.energy = 0.0;
    return p;
}

double VortexProfile::f_at(double rr) const {
    if (rr <= 0.0) return f.empty() ? 0.0 : f.front();
    if (rr >= r_max) {
        if (rr > 650.0) return 1.0;  // K₀ underflows; vacuum to machine precision
        return graft_r > 0.0 ? 1.0 - tail_A * std::cyl_bessel_k(0.0, rr) : f.back();
    }
    const int kc = std::clamp(static_cast<int>(rr / dr), 1, M - 2);
    const double t = rr / dr - kc;  // t ∈ [0,1) between nodes kc and kc+1
    const double fm1 = f[kc - 1], f0 = f[kc], f1 = f[kc + 1], f2 = f[kc + 2];
    // 4-point Lagrange cubic on equispaced nodes −1,0,1,2.
    return fm1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + f0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
           f1 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + f2 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

double VortexProfile::a_at(double rr) const {
    if (rr <= 0.0) return a.empty() ? 0.0 : a.front();
    if (rr >= r_max) {
        if (rr > 650.0) return 1.0;
        return graft_r > 0.0 ? 1.0 - tail_A * rr * std::cyl_bessel_k(1.0, rr) / N : a.back();
    }
    const int kc = std::clamp(static_cast<int>(rr / dr), 1, M - 2);
    const double t = rr / dr - kc;
    const double am1 = a[kc - 1], a0 = a[kc], a1 = a[kc + 1], a2 = a[kc + 2];
    return am1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + a0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
           a1 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + a2 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

SecondOrderResidual second_order_residual(const VortexProfile& p) {
    SecondOrderResidual out;
    const double r_hi = p.r_max - 1.0;
    for (int k = 2; k + 2 <= p.M; ++k) {
        const double r = p.r[k];
        if (r > r_hi) break;
        const double f = p.f[k], a = p.a[k];
        const double fp = fd4_d1(p.f, k, p.dr), fpp = fd4_d2(p.f, k, p.dr);
        const double ap = fd4_d1(p.a, k, p.dr), app = fd4_d2(p.a, k, p.dr);
        const double ru = fpp + fp / r - p.N * p.N * (1.0 - a) * (1.0 - a) * f / (r * r) +
                          0.5 * (1.0 - f * f) * f;
        // (a′/r)′ + (1−a)f²/r = a″/r − a′/r² + (1−a)f²/r
        const double ra = app / r - ap / (r * r) + (1.0 - a) * f * f / r;
        out.res_u = std::max(out.res_u, std::abs(ru));
        out.res_a = std::max(out.res_a, std::abs(ra));
    }
    return out;
}

HalfIdentityReport operator_norm_half_check(const VortexProfile& p) {
    HalfIdentityReport rep;
    const double r_hi = p.r_max - 1.0;
    double e_max = 0.0;
    std::vector<double> defect;
    defect.reserve(p.M);
    for (int k = 2; k + 2 <= p.M; ++k) {
        const double r = p.r[k];
        if (r > r_hi) break;
        const double f = p.f[k], a = p.a[k];
        const double fp = fd4_d1(p.f, k, p.dr);
        const double ap = fd4_d1(p.a, k, p.dr);
        const double ang = p.N * (1.0 - a) * f / r;   // angular singular value
        const double om = p.N * ap / r;               // curvature
        const double one_m_f2 = 1.0 - f * f;
        const double e = fp * fp + ang * ang + om * om + 0.25 * one_m_f2 * one_m_f2;
        e_max = std::max(e_max, e);
        const double op2 = std::max(fp * fp, ang * ang);
        if (e > 1e-280) {
            defect.push_back(std::abs((op2 + om * om) / e - 0.5));
        } else {
            defect.push_back(-1.0);  // placeholder: decided once e_max is known
        }
    }
    if (e_max < 1e-200) return rep;  // vacuum branch: identity undefined (e = 0)
    rep.defined = true;
    for (double d : defect)
        if (d >= 0.0) rep.max_defect = std::max(rep.max_defect, d);
    return rep;
}

double profile_max_discrepancy(const VortexProfile& p) {
    double m = 0.0;
    const double r_hi = p.r_max - 1.0;
    for (int k = 2; k + 2 <= p.M; ++k) {
        const double r = p.r[k];
        if (r > r_hi) break;
        const double ap = fd4_d1(p.a, k, p.dr);
        const double om = p.N * ap / r;
        m = std::max(m, std::abs(std::abs(om) - 0.5 * (1.0 - p.f[k] * p.f[k])));
    }
    return m;
}

std::vector<double> profile_energy_density(const VortexProfile& p) {
    std::vector<double> e(p.M + 1, 0.0);
    for (int k = 2; k + 2 <= p.M; ++k) {
        const double r = p.r[k], f = p.f[k], a = p.a[k];
        const double fp = fd4_d1(p.f, k, p.dr);
        const double ap = fd4_d1(p.a, k, p.dr);
        const double ang = p.N * (1.0 - a) * f / r;
        const double om = p.N * ap / r;
        const double one_m_f2 = 1.0 - f * f;
        e[k] = fp * fp + ang * ang + om * om + 0.25 * one_m_f2 * one_m_f2;
    }
    return e;
}

LineFit profile_energy_decay_fit(const VortexProfile& p, double r_lo, double r_hi) {
    const std::vector<double> e = profile_energy_density(p);
    std::vector<double> xs, ys;
    for (int k = 2; k + 2 <= p.M; ++k) {
        if (p.r[k] < r_lo || p.r[k] > r_hi || e[k] <= 0.0) continue;
        xs.push_back(p.r[k]);
        ys.push_back(std::log(e[k]));
    }
    return fit_line(xs, ys);
}

LineFit profile_modulus_decay_fit(const VortexProfile& p, double r_lo, double r_hi) {
    std::vector<double> xs, ys;
    for (int k = 0; k <= p.M; ++k) {
        const double d = 1.0 - p.f[k];
        if (p.r[k] < r_lo || p.r[k] > r_hi || d <= 0.0) continue;
        xs.push_back(p.r[k]);
        ys.push_back(std::log(d));
    }
    return fit_line(xs, ys);
}

void export_profile_csv(const VortexProfile& p, std::ostream& os) {
    os << "r,f,a\n";
    char buf[96];
    for (int k = 0; k <= p.M; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.r[k], p.f[k], p.a[k]);
        os << buf;
    }
}

}  // namespace higgsflow
