#include "higgsflow/embed.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace higgsflow {

namespace {

using Cx = std::complex<double>;

// ϑ₁(v, q̄) = 2 Σ_{k≥0} (−1)^k q̄^{(k+½)²} sin((2k+1)v).  With the imaginary
// part of v wrapped to |Im v| ≤ π·L₁/(2L₀) the series decays doubly fast; 7
// terms are far below double precision.
Cx theta1(Cx v, double nome) {
    Cx s{0.0, 0.0};
    double sign = 1.0;
    for (int k = 0; k < 7; ++k) {
        const double kk = k + 0.5;
        s += sign * std::pow(nome, kk * kk) * std::sin((2.0 * k + 1.0) * v);
        sign = -sign;
    }
    return 2.0 * s;
}

// Logarithmic derivative ϑ₁′(v)/ϑ₁(v).  Unlike arg ϑ₁ it is exactly
// π-periodic in Re v, so it is continuous across the wrap surface of the
// coordinate chart; its only singularity is the vortex center itself.
Cx theta1_dlog(Cx v, double nome) {
    Cx s{0.0, 0.0}, d{0.0, 0.0};
    double sign = 1.0;
    for (int k = 0; k < 7; ++k) {
        const double kk = k + 0.5;
        const double w = std::pow(nome, kk * kk);
        const double m = 2.0 * k + 1.0;
        s += sign * w * std::sin(m * v);
        d += sign * w * m * std::cos(m * v);
        sign = -sign;
    }
    return d / s;
}

inline double frac01(double s) { return s - std::floor(s); }

// --- column parity arcs -------------------------------------------------
//
// The stored core/phantom angles are built from functions (ϑ₁, complex sin)
// that flip sign once per period of one coordinate, surfacing as a π jump of
// the angle where the wrap representative of that coordinate jumps.  Adding a
// per-column offset of π over a cyclic arc of columns restores an angle that
// is continuous mod 2π across the wrap surface.  A {0, π}-valued function on
// a cycle must flip an even number of times, so the arc introduces a second,
// spurious flip; its boundary is placed far from every core, where link
// phases are taken directly from the total phase — in which the spurious
// flips of the core and phantom arcs cancel exactly.

// Index of the unique column boundary j → j+1 across which the wrap
// representative of x − base jumps down.
int wrap_boundary(int cols, double h, double L, double base) {
    for (int j = 0; j < cols; ++j) {
        const double wa = wrap_delta(h * j - base, L);
        const double wb = wrap_delta(h * ((j + 1) % cols) - base, L);
        if (wb < wa) return j;
    }
    throw std::logic_error("wrap_boundary: no wrap descent found");
}

// par[j] = π for j in the cyclic arc jw+1 … jfl, else 0: flips exactly at the
// wrap boundary jw and at the far boundary jfl.
std::vector<double> parity_arc(int cols, int jw, int jfl) {
    std::vector<double> par(static_cast<std::size_t>(cols), 0.0);
    const int len = ((jfl - jw) % cols + cols) % cols;
    for (int t = 1; t <= len; ++t) par[static_cast<std::size_t>((jw + t) % cols)] = pi;
    return par;
}

struct TwistGeometry {
    int N;
    double c0, c1;  // core (in-plane)
    double p0;      // phantom column; phantom row equals c1
    double L0, L1, nome;
    double ramp_jump = 0.0, ramp_origin = 0.0;  // seam ramp: jump·frac01((x1−origin)/L1)

    Cx v_core(double x0, double x1) const {
        return Cx{pi * wrap_delta(x0 - c0, L0) / L0, pi * wrap_delta(x1 - c1, L1) / L0};
    }
    Cx v_phantom(double x0, double x1) const {
        return Cx{pi * wrap_delta(x0 - p0, L0) / L0, pi * wrap_delta(x1 - c1, L1) / L0};
    }
    double ramp(double x1) const { return ramp_jump * frac01((x1 - ramp_origin) / L1); }
    double dist_core(double x0, double x1) const {
        return std::hypot(wrap_delta(x0 - c0, L0), wrap_delta(x1 - c1, L1));
    }
    double dist_phantom(double x0, double x1) const {
        return std::hypot(wrap_delta(x0 - p0, L0), wrap_delta(x1 - c1, L1));
    }
    // In-plane gradient of the core angle arg ϑ₁(v): v is holomorphic in
    // x0 + i·x1 (scaled by π/L0), so the gradient components are the
    // imaginary/real parts of ϑ₁′/ϑ₁ · π/L0.
    double grad_core(const std::array<double, 3>& mid, int axis) const {
        if (axis == 2) return 0.0;
        const Cx dl = theta1_dlog(v_core(mid[0], mid[1]), nome) * (pi / L0);
        return axis == 0 ? dl.imag() : dl.real();
    }
};

struct RingGeometry {
    int N;
    double c0, c1, c2, r0;
    double L0, L1, L2;

    // Half-plane coordinates: ζ = w2 + iρ with ρ the in-plane distance to the
    // ring axis; the ring sits at ζ = i·r0, its mirror at −i·r0 (unphysical).
    double rho(double x0, double x1) const {
        return std::hypot(wrap_delta(x0 - c0, L0), wrap_delta(x1 - c1, L1));
    }
    double dist_core(double x0, double x1, double x2) const {
        return std::hypot(rho(x0, x1) - r0, wrap_delta(x2 - c2, L2));
    }
    // Gradient of the core angle arg sin(π(w2 + i(ρ−r0))/L2); cot is exactly
    // π-periodic, hence continuous across the wrap surface of x2.  Link
    // midpoints keep ρ ≥ h/2 because the center is half-aligned to the grid.
    double grad_core(const std::array<double, 3>& mid, int axis) const {
        const double w0 = wrap_delta(mid[0] - c0, L0), w1 = wrap_delta(mid[1] - c1, L1);
        const double w2 = wrap_delta(mid[2] - c2, L2);
        const double rr = std::hypot(w0, w1);
        const Cx z = (pi / L2) * Cx{w2, rr - r0};
        const Cx ct = std::cos(z) / std::sin(z);
        if (axis == 2) return (pi / L2) * ct.imag();
        const double dadr = (pi / L2) * ct.real();
        return dadr * ((axis == 0 ? w0 : w1) / rr);
    }
};

}  // namespace

int twist_cut_index(int N1) { return N1 / 2 + 1; }

std::array<double, 3> resolve_cycle_center(const TorusLattice& lat, const CycleSpec& spec) {
    auto resolve = [&](int axis, double fallback) {
        const double v = spec.center[static_cast<std::size_t>(axis)];
        return std::isnan(v) ? fallback : v;
    };
    std::array<double, 3> c{0.0, 0.0, 0.0};
    c[0] = resolve(0, 0.5 * lat.L[0] + 0.5 * lat.h);
    switch (spec.kind) {
        case CycleKind::planar_point:
        case CycleKind::straight_line:
            c[1] = resolve(1, (lat.bg.defect_i1 + 0.5) * lat.h);
            break;
        default:
            c[1] = resolve(1, 0.5 * lat.L[1] + 0.5 * lat.h);
            break;
    }
    if (lat.n == 3) c[2] = resolve(2, 0.5 * lat.L[2] + 0.5 * lat.h);
    return c;
}

namespace {

// Per-site phase data for the assembly.  theta is the total phase of u;
// alpha_c/alpha_p are the core/phantom angles with their column parities
// applied, and beta_c = theta − N·alpha_c (respectively beta_p = theta +
// N·alpha_p) is smooth near the core (phantom).
struct SiteArrays {
    std::vector<double> theta;
    std::vector<double> alpha_c;
    std::vector<double> beta_c;
    std::vector<double> alpha_p;  // empty if no phantom
    std::vector<double> beta_p;
};

FieldState assemble_state(const TorusLattice& lat, const VortexProfile& prof, double eps, int N,
                          const SiteArrays& sa, double r_near,
                          const std::function<double(const std::array<double, 3>&)>& dist_core,
                          const std::function<double(const std::array<double, 3>&)>& dist_phantom,
                          const std::function<double(const std::array<double, 3>&, int)>& grad_core) {
    FieldState st;
    st.eps = eps;
    st.time = 0.0;
    st.u.resize(lat.num_sites);
    for (int j = 0; j < 3; ++j) st.a[j].assign(lat.num_sites, 0.0);

    const bool has_phantom = !sa.alpha_p.empty();

    for (int x = 0; x < lat.num_sites; ++x) {
        const auto c = lat.coords(x);
        const std::array<double, 3> pos{lat.h * c[0], lat.h * c[1], lat.h * c[2]};
        const double f = prof.f_at(dist_core(pos) / eps);
        st.u[x] = Cx{f * std::cos(sa.theta[x]), f * std::sin(sa.theta[x])};
    }

    for (int j = 0; j < lat.n; ++j) {
        const auto& nx = lat.next[j];
        std::vector<double>& aj = st.a[j];
        for (int x = 0; x < lat.num_sites; ++x) {
            const int xn = nx[x];
            const auto c = lat.coords(x);
            std::array<double, 3> mid{lat.h * c[0], lat.h * c[1], lat.h * c[2]};
            mid[j] += 0.5 * lat.h;
            const double dc = dist_core(mid);
            const double aw = prof.a_at(dc / eps);
            // Phase increment of theta across the link.  Inside the core ball
            // the increment is split so the winding is carried by the core
            // angle, whose per-link principal values are exact there and close
            // the loop around the core plaquette exactly; likewise around the
            // phantom.  Away from both, theta itself is continuous mod 2π and
            // its principal value is the increment directly.
            //
            // The profile dressing rides on the core angle increment: the
            // discrete one inside the ball (exact loop closure where the
            // dressing weight is large), the analytic midpoint gradient
            // outside (free of wrap and parity artifacts).
            double inc, dal;
            if (dc <= r_near) {
                const double dac = principal_angle(sa.alpha_c[xn] - sa.alpha_c[x]);
                inc = N * dac + principal_angle(sa.beta_c[xn] - sa.beta_c[x]);
                dal = dac;
            } else {
                if (has_phantom && dist_phantom(mid) <= r_near)
                    inc = -N * principal_angle(sa.alpha_p[xn] - sa.alpha_p[x]) +
                          principal_angle(sa.beta_p[xn] - sa.beta_p[x]);
                else
                    inc = principal_angle(sa.theta[xn] - sa.theta[x]);
                dal = lat.h * grad_core(mid, j);
            }
            const double A = (inc + N * (aw - 1.0) * dal) / lat.h;
            aj[x] = A - lat.bg.a[j][x];
        }
    }
    return st;
}

void validate_curvature(const TorusLattice& lat, const FieldState& st) {
    const PlaqField om = curvature_total(lat, st);
    double m = 0.0;
    int arg_p = 0, arg_x = 0;
    for (int p = 0; p < lat.plane_count(); ++p)
        for (int x = 0; x < lat.num_sites; ++x)
            if (std::abs(om[p][x]) > m) {
                m = std::abs(om[p][x]);
                arg_p = p;
                arg_x = x;
            }
    if (m * st.eps * st.eps > 2.5) {
        const auto c = lat.coords(arg_x);
        throw std::runtime_error(
            "embed_cycle: curvature spike after assembly (internal seam bookkeeping error), "
            "eps^2*max|omega| = " +
            std::to_string(m * st.eps * st.eps) + " at plane " + std::to_string(arg_p) +
            " site (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
            std::to_string(c[2]) + "), omega*h^2/2pi = " +
            std::to_string(m * lat.h * lat.h / two_pi));
    }
}

}  // namespace

FieldState embed_cycle(const TorusLattice& lat, const VortexProfile& prof, const CycleSpec& spec,
                       double eps, const EmbedPolicy& policy) {
    if (!(eps > 0.0)) throw std::invalid_argument("embed_cycle: eps must be positive");
    if (eps < 2.0 * lat.h - 1e-12)
        throw std::invalid_argument("embed_cycle: eps = " + std::to_string(eps) +
                                    " under-resolves the core (need eps >= 2h = " +
                                    std::to_string(2.0 * lat.h) + ")");
    if (prof.N != spec.degree && spec.kind != CycleKind::vacuum)
        throw std::invalid_argument("embed_cycle: profile degree " + std::to_string(prof.N) +
                                    " does not match cycle degree " + std::to_string(spec.degree));

    auto resolve = [&](int axis, double fallback) {
        const double v = spec.center[static_cast<std::size_t>(axis)];
        return std::isnan(v) ? fallback : v;
    };

    switch (spec.kind) {
        case CycleKind::vacuum: {
            if (lat.bg.q != 0)
                throw std::invalid_argument("embed_cycle: vacuum cycle needs untwisted sector (q = 0)");
            FieldState st = make_vacuum_state(lat, eps);
            return st;
        }

        case CycleKind::planar_point:
        case CycleKind::straight_line: {
            if (spec.kind == CycleKind::planar_point && lat.n != 2)
                throw std::invalid_argument("embed_cycle: planar_point needs n = 2");
            if (spec.kind == CycleKind::straight_line && lat.n != 3)
                throw std::invalid_argument("embed_cycle: straight_line needs n = 3");
            if (spec.degree < 1) throw std::invalid_argument("embed_cycle: twisted degree must be >= 1");
            if (lat.bg.q != spec.degree)
                throw std::invalid_argument(
                    "embed_cycle: twisted boundary degree mismatch (background q = " +
                    std::to_string(lat.bg.q) + ", cycle degree = " + std::to_string(spec.degree) +
                    "); build the lattice with q equal to the degree");

            TwistGeometry g;
            g.N = spec.degree;
            g.L0 = lat.L[0];
            g.L1 = lat.L[1];
            g.nome = std::exp(-pi * g.L1 / g.L0);
            g.p0 = lat.L[0] - 0.5 * lat.h;  // phantom: center of the defect plaquette
            const double p1 = (lat.bg.defect_i1 + 0.5) * lat.h;
            g.c0 = resolve(0, 0.5 * lat.L[0] + 0.5 * lat.h);
            g.c1 = resolve(1, p1);
            if (std::abs(g.c1 - p1) > 1e-9)
                throw std::invalid_argument(
                    "embed_cycle: twisted center row must align with the background defect row "
                    "(build the lattice with the cut from twist_cut_index for the default center)");
            if (g.dist_core(g.p0, p1) < 0.25 * std::min(g.L0, g.L1))
                throw std::invalid_argument(
                    "embed_cycle: twisted center too close to the compensating phantom column");
            if (16.0 * g.N * lat.h / std::min(g.L0, g.L1) >= 3.0)
                throw std::invalid_argument(
                    "embed_cycle: degree " + std::to_string(g.N) +
                    " needs finer resolution on this torus (per-link phase increments approach pi)");

            const int N0 = lat.N[0], N1 = lat.N[1];
            const int jw_c = wrap_boundary(N0, lat.h, g.L0, g.c0);
            const int jw_p = wrap_boundary(N0, lat.h, g.L0, g.p0);
            int j_fl = -1;
            double best = -1.0;
            for (int j = 0; j < N0; ++j) {
                if (j == jw_c || j == jw_p) continue;
                const double m0 = lat.h * (j + 0.5);
                const double d = std::min(std::abs(wrap_delta(m0 - g.c0, g.L0)),
                                          std::abs(wrap_delta(m0 - g.p0, g.L0)));
                if (d > best) {
                    best = d;
                    j_fl = j;
                }
            }
            const std::vector<double> par_c = parity_arc(N0, jw_c, j_fl);
            const std::vector<double> par_p = parity_arc(N0, jw_p, j_fl);

            SiteArrays sa;
            sa.theta.resize(lat.num_sites);
            sa.alpha_c.resize(lat.num_sites);
            sa.alpha_p.resize(lat.num_sites);
            for (int x = 0; x < lat.num_sites; ++x) {
                const auto c = lat.coords(x);
                const double x0 = lat.h * c[0], x1 = lat.h * c[1];
                sa.alpha_c[x] =
                    std::arg(theta1(g.v_core(x0, x1), g.nome)) + par_c[static_cast<std::size_t>(c[0])];
                sa.alpha_p[x] = std::arg(theta1(g.v_phantom(x0, x1), g.nome)) +
                                par_p[static_cast<std::size_t>(c[0])];
                sa.theta[x] = g.N * (sa.alpha_c[x] - sa.alpha_p[x]);
            }

            // The ϑ₁ quasi-periodicity leaves one constant phase jump (mod 2π)
            // across the row-wrap locus; measure it at the quiet column and
            // cancel it with a linear ramp in x₁ (a constant Wilson-line shift).
            {
                const int i1_lo = wrap_boundary(N1, lat.h, g.L1, g.c1);
                const int i1_hi = (i1_lo + 1) % N1;
                const int lo = lat.index(j_fl, i1_lo, 0);
                const int hi = lat.index(j_fl, i1_hi, 0);
                g.ramp_jump = principal_angle(sa.theta[hi] - sa.theta[lo]);
                g.ramp_origin = lat.h * i1_hi;  // frac01 rises from 0 just above the locus
                for (int x = 0; x < lat.num_sites; ++x) {
                    const auto c = lat.coords(x);
                    sa.theta[x] += g.ramp(lat.h * c[1]);
                }
            }

            sa.beta_c.resize(lat.num_sites);
            sa.beta_p.resize(lat.num_sites);
            for (int x = 0; x < lat.num_sites; ++x) {
                sa.beta_c[x] = sa.theta[x] - g.N * sa.alpha_c[x];
                sa.beta_p[x] = sa.theta[x] + g.N * sa.alpha_p[x];
            }

            const double r_near = 0.125 * std::min(g.L0, g.L1);
            auto dist_core = [&g](const std::array<double, 3>& p) {
                return g.dist_core(p[0], p[1]);
            };
            auto dist_phantom = [&g](const std::array<double, 3>& p) {
                return g.dist_phantom(p[0], p[1]);
            };
            auto grad_core = [&g](const std::array<double, 3>& p, int axis) {
                return g.grad_core(p, axis);
            };
            FieldState st =
                assemble_state(lat, prof, eps, g.N, sa, r_near, dist_core, dist_phantom, grad_core);
            validate_curvature(lat, st);
            return st;
        }

        case CycleKind::circle: {
            if (lat.n != 3) throw std::invalid_argument("embed_cycle: circle needs n = 3");
            if (spec.degree < 1) throw std::invalid_argument("embed_cycle: ring degree must be >= 1");
            if (lat.bg.q != 0)
                throw std::invalid_argument(
                    "embed_cycle: a ring is null-homologous; build the lattice untwisted (q = 0)");
            const double r0 = spec.radius;
            const double floor_eps = std::max(policy.min_radius_in_eps, EmbedPolicy::hard_floor_in_eps);
            if (!(r0 >= floor_eps * eps))
                throw std::invalid_argument(
                    "embed_cycle: ring radius " + std::to_string(r0) + " below " +
                    std::to_string(floor_eps) + " core widths (" + std::to_string(floor_eps * eps) +
                    "); widen the ring or shrink eps");
            RingGeometry g;
            g.N = spec.degree;
            g.L0 = lat.L[0];
            g.L1 = lat.L[1];
            g.L2 = lat.L[2];
            g.c0 = resolve(0, 0.5 * lat.L[0] + 0.5 * lat.h);
            g.c1 = resolve(1, 0.5 * lat.L[1] + 0.5 * lat.h);
            g.c2 = resolve(2, 0.5 * lat.L[2] + 0.5 * lat.h);
            g.r0 = r0;
            if (r0 > 0.5 * std::min(g.L0, g.L1) - 2.0 * eps || r0 > 0.5 * g.L2 - 2.0 * eps)
                throw std::invalid_argument(
                    "embed_cycle: ring radius too large for the torus (needs two core widths of "
                    "clearance from the half-period)");

            const int N2 = lat.N[2];
            const int j2w = wrap_boundary(N2, lat.h, g.L2, g.c2);
            int j2fl = -1;
            double best = -1.0;
            for (int j = 0; j < N2; ++j) {
                if (j == j2w) continue;
                const double d = std::abs(wrap_delta(lat.h * (j + 0.5) - g.c2, g.L2));
                if (d > best) {
                    best = d;
                    j2fl = j;
                }
            }
            const std::vector<double> par2 = parity_arc(N2, j2w, j2fl);

            SiteArrays sa;
            sa.theta.resize(lat.num_sites);
            sa.alpha_c.resize(lat.num_sites);
            sa.beta_c.resize(lat.num_sites);
            for (int x = 0; x < lat.num_sites; ++x) {
                const auto c = lat.coords(x);
                const double x0 = lat.h * c[0], x1 = lat.h * c[1], x2 = lat.h * c[2];
                const double rho = g.rho(x0, x1);
                const double w2 = wrap_delta(x2 - g.c2, g.L2);
                const double ac_raw = std::arg(std::sin(pi / g.L2 * Cx{w2, rho - g.r0}));
                const double ap_raw = std::arg(std::sin(pi / g.L2 * Cx{w2, rho + g.r0}));
                sa.theta[x] = g.N * (ac_raw - ap_raw);
                sa.alpha_c[x] = ac_raw + par2[static_cast<std::size_t>(c[2])];
                sa.beta_c[x] = sa.theta[x] - g.N * sa.alpha_c[x];
            }

            const double r_near = 0.125 * std::min({g.L0, g.L1, g.L2});
            auto dist_core = [&g](const std::array<double, 3>& p) {
                return g.dist_core(p[0], p[1], p[2]);
            };
            auto dist_none = [](const std::array<double, 3>&) {
                return std::numeric_limits<double>::infinity();
            };
            auto grad_core = [&g](const std::array<double, 3>& p, int axis) {
                return g.grad_core(p, axis);
            };
            FieldState st =
                assemble_state(lat, prof, eps, g.N, sa, r_near, dist_core, dist_none, grad_core);
            validate_curvature(lat, st);
            return st;
        }
    }
    throw std::logic_error("embed_cycle: unreachable");
}

}  // namespace higgsflow
