#pragma once
// Periodic lattice geometry for the U(1)-Higgs flow.
//
// Degrees of freedom live on the cubical complex of an n-torus (n = 2 or 3):
//   sites      x = h*(i0, i1, i2)           -- complex scalar u
//   links      (x; j)                        -- real connection coefficients
//   plaquettes (x; i<j), based at lower site -- curvature / 2-form values
//   cubes      (x; 0,1,2), n = 3 only        -- 3-form values
//
// A nonzero twist q equips the (0,1)-plane with a degree-q bundle.  The
// background connection is stored in a seam gauge: a_1 = B*x0 everywhere plus
// a sawtooth column of a_0 links at x0 = L0 - h, where B = 2*pi*q/(L0*L1).
// The stored-array circulation of that background is B on every (0,1)
// plaquette except a single "defect" plaquette where it is B - 2*pi*q/h^2,
// the unavoidable coordinate artifact of writing a twisted bundle in one
// chart.  The *declared* background curvature -- what every physical formula
// uses -- is the constant B on all (0,1) plaquettes; only the deviation field
// is ever differentiated as a stored array.  Holonomy is then constant across
// plaquettes and the cross-section flux is exactly 2*pi*q.
#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "higgsflow/util.hpp"

namespace higgsflow {

using Complex = std::complex<double>;
using LinkField = std::array<std::vector<double>, 3>;
using PlaqField = std::array<std::vector<double>, 3>;

// Stored background connection for twist q (all zero when q == 0).
struct BackgroundField {
    int q = 0;
    double B = 0.0;  // declared constant curvature on (0,1) plaquettes
    int cut1 = 0;    // x1 index where the seam sawtooth jumps by -L1
    std::array<std::vector<double>, 3> a;  // stored link values
    // Base site of the defect plaquette of the *stored* background arrays,
    // (N0-1, cut1-1 mod N1, any x2); -1 when q == 0.
    int defect_i0 = -1;
    int defect_i1 = -1;
};

struct TorusLattice {
    int n = 0;                      // spatial dimension, 2 or 3
    std::array<int, 3> N{1, 1, 1};  // sites per axis (1 for unused axes)
    std::array<double, 3> L{0, 0, 0};
    double h = 0.0;                 // common spacing L[j]/N[j]
    int num_sites = 0;
    std::array<int, 3> stride{0, 0, 0};
    BackgroundField bg;

    // Wrapped one-step neighbor tables, indexed by [axis][site].
    std::array<std::vector<std::int32_t>, 3> next;
    std::array<std::vector<std::int32_t>, 3> prev;

    int index(int i0, int i1, int i2) const {
        return i0 * stride[0] + i1 * stride[1] + i2 * stride[2];
    }
    std::array<int, 3> coords(int idx) const {
        std::array<int, 3> c;
        c[0] = idx % N[0];
        idx /= N[0];
        c[1] = idx % N[1];
        c[2] = idx / N[1];
        return c;
    }
    double site_coord([[maybe_unused]] int axis, int i) const { return h * i; }

    // Planes are ordered (0,1), (0,2), (1,2); only (0,1) exists for n == 2.
    int plane_count() const { return n == 2 ? 1 : 3; }
    static std::array<int, 2> plane_axes(int p) {
        constexpr std::array<std::array<int, 2>, 3> ax{{{0, 1}, {0, 2}, {1, 2}}};
        return ax[p];
    }
    static int plane_of(int i, int j) {  // requires i < j
        return (i == 0) ? (j == 1 ? 0 : 1) : 2;
    }

    // Declared background curvature on plane p (constant per plane).
    double bg_curvature(int p) const { return p == 0 ? bg.B : 0.0; }

    std::vector<double> make_site_field() const { return std::vector<double>(num_sites, 0.0); }
    std::vector<Complex> make_complex_field() const { return std::vector<Complex>(num_sites, Complex{0.0, 0.0}); }
    LinkField make_link_field() const {
        LinkField f;
        for (int j = 0; j < n; ++j) f[j].assign(num_sites, 0.0);
        return f;
    }
    PlaqField make_plaq_field() const {
        PlaqField f;
        for (int p = 0; p < plane_count(); ++p) f[p].assign(num_sites, 0.0);
        return f;
    }
};

// Build an n-torus lattice with the given site counts and extents; all axes
// must share one spacing h.  A twist q != 0 installs the seam-gauge background
// with the sawtooth branch cut at x1 index cut1 (the defect plaquette is then
// based at (N0-1, cut1-1 mod N1)).
TorusLattice build_lattice(int n, std::array<int, 3> N, std::array<double, 3> L, int q, int cut1 = 0);

// Discrete exterior derivative, links -> plaquettes:
//   (d a)_{ij}(x) = [a_j(x+h e_i) - a_j(x) - a_i(x+h e_j) + a_i(x)] / h.
PlaqField d_link_to_plaquette(const TorusLattice& lat, const LinkField& a);
void d_link_to_plaquette(const TorusLattice& lat, const LinkField& a, PlaqField& out);

// Adjoint of d with respect to the unweighted h^n site/link/plaquette sums:
//   <d* w, b>_links = <w, d b>_plaquettes  exactly.
LinkField codifferential_plaquette_to_link(const TorusLattice& lat, const PlaqField& w);
void codifferential_plaquette_to_link(const TorusLattice& lat, const PlaqField& w, LinkField& out);

// Exterior derivative, plaquettes -> cubes (n == 3 only):
//   (d w)(x) = D+_0 w_{12} - D+_1 w_{02} + D+_2 w_{01}.
std::vector<double> d_plaquette_to_cube(const TorusLattice& lat, const PlaqField& w);

// Heat kernel on the torus, wrapped over translates |m_j| <= 5 per axis:
//   K(t,x,y) = (4 pi t)^{-n/2} prod_j sum_m exp(-(x_j - y_j + m L_j)^2 / 4t).
// The truncation keeps the missing tail below ~1e-12 per axis for t <= L^2/4.
double wrapped_heat_kernel(const TorusLattice& lat, double t, std::array<double, 3> x,
                           std::array<double, 3> y);

// K(t, site, p) over all sites for a fixed source p, using per-axis tables.
std::vector<double> heat_kernel_field(const TorusLattice& lat, double t, std::array<double, 3> p);

}  // namespace higgsflow
