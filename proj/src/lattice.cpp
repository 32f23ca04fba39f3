#include "higgsflow/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace higgsflow {

TorusLattice build_lattice(int n, std::array<int, 3> N, std::array<double, 3> L, int q, int cut1) {
    if (n != 2 && n != 3) throw std::invalid_argument("build_lattice: n must be 2 or 3");
    TorusLattice lat;
    lat.n = n;
    for (int j = n; j < 3; ++j) {
        N[j] = 1;
        L[j] = 0.0;
    }
    lat.N = N;
    lat.L = L;
    for (int j = 0; j < n; ++j) {
        if (N[j] < 4) throw std::invalid_argument("build_lattice: need at least 4 sites per axis");
        if (L[j] <= 0.0) throw std::invalid_argument("build_lattice: extents must be positive");
    }
    const double h = L[0] / N[0];
    for (int j = 1; j < n; ++j) {
        const double hj = L[j] / N[j];
        if (std::abs(hj - h) > 1e-12 * h)
            throw std::invalid_argument("build_lattice: all axes must share one spacing");
    }
    lat.h = h;
    lat.num_sites = N[0] * N[1] * N[2];
    lat.stride = {1, N[0], N[0] * N[1]};

    for (int j = 0; j < n; ++j) {
        lat.next[j].resize(lat.num_sites);
        lat.prev[j].resize(lat.num_sites);
    }
    for (int i2 = 0; i2 < N[2]; ++i2)
        for (int i1 = 0; i1 < N[1]; ++i1)
            for (int i0 = 0; i0 < N[0]; ++i0) {
                const int idx = lat.index(i0, i1, i2);
                const int n0 = (i0 + 1 == N[0]) ? 0 : i0 + 1;
                const int p0 = (i0 == 0) ? N[0] - 1 : i0 - 1;
                lat.next[0][idx] = lat.index(n0, i1, i2);
                lat.prev[0][idx] = lat.index(p0, i1, i2);
                if (n >= 2) {
                    const int n1 = (i1 + 1 == N[1]) ? 0 : i1 + 1;
                    const int p1 = (i1 == 0) ? N[1] - 1 : i1 - 1;
                    lat.next[1][idx] = lat.index(i0, n1, i2);
                    lat.prev[1][idx] = lat.index(i0, p1, i2);
                }
                if (n == 3) {
                    const int n2 = (i2 + 1 == N[2]) ? 0 : i2 + 1;
                    const int p2 = (i2 == 0) ? N[2] - 1 : i2 - 1;
                    lat.next[2][idx] = lat.index(i0, i1, n2);
                    lat.prev[2][idx] = lat.index(i0, i1, p2);
                }
            }

    // Background connection for the twist (allocated as zeros even untwisted,
    // so callers can always read stored background links).
    BackgroundField& bg = lat.bg;
    bg.q = q;
    for (int j = 0; j < n; ++j) bg.a[j].assign(lat.num_sites, 0.0);
    if (q != 0) {
        bg.B = two_pi * q / (L[0] * L[1]);
        cut1 = ((cut1 % N[1]) + N[1]) % N[1];
        bg.cut1 = cut1;
        bg.defect_i0 = N[0] - 1;
        bg.defect_i1 = (cut1 - 1 + N[1]) % N[1];
        for (int i2 = 0; i2 < N[2]; ++i2)
            for (int i1 = 0; i1 < N[1]; ++i1)
                for (int i0 = 0; i0 < N[0]; ++i0) {
                    const int idx = lat.index(i0, i1, i2);
                    bg.a[1][idx] = bg.B * (h * i0);
                    if (i0 == N[0] - 1) {
                        // Sawtooth sigma(i1) = h*i1 for i1 < cut1, h*(i1 - N1)
                        // otherwise: unit slope except one drop of L1 at the cut.
                        const double sigma = (i1 < cut1) ? h * i1 : h * (i1 - N[1]);
                        bg.a[0][idx] = -(bg.B * L[0] / h) * sigma;
                    }
                }
    }
    return lat;
}

void d_link_to_plaquette(const TorusLattice& lat, const LinkField& a, PlaqField& w) {
    const double inv_h = 1.0 / lat.h;
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [i, j] = TorusLattice::plane_axes(p);
        const auto& ai = a[i];
        const auto& aj = a[j];
        auto& wp = w[p];
        wp.resize(lat.num_sites);
        const auto& ni = lat.next[i];
        const auto& nj = lat.next[j];
        for (int x = 0; x < lat.num_sites; ++x)
            wp[x] = (aj[ni[x]] - aj[x] - ai[nj[x]] + ai[x]) * inv_h;
    }
}

PlaqField d_link_to_plaquette(const TorusLattice& lat, const LinkField& a) {
    PlaqField w = lat.make_plaq_field();
    d_link_to_plaquette(lat, a, w);
    return w;
}

void codifferential_plaquette_to_link(const TorusLattice& lat, const PlaqField& w, LinkField& b) {
    const double inv_h = 1.0 / lat.h;
    for (int j = 0; j < lat.n; ++j) b[j].assign(lat.num_sites, 0.0);
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto [i, j] = TorusLattice::plane_axes(p);
        const auto& wp = w[p];
        auto& bi = b[i];
        auto& bj = b[j];
        const auto& pi_ = lat.prev[i];
        const auto& pj_ = lat.prev[j];
        for (int x = 0; x < lat.num_sites; ++x) {
            // w_{ij} contributes to link j; w_{ji} = -w_{ij} contributes to link i.
            bj[x] += (wp[pi_[x]] - wp[x]) * inv_h;
            bi[x] -= (wp[pj_[x]] - wp[x]) * inv_h;
        }
    }
}

LinkField codifferential_plaquette_to_link(const TorusLattice& lat, const PlaqField& w) {
    LinkField b = lat.make_link_field();
    codifferential_plaquette_to_link(lat, w, b);
    return b;
}

std::vector<double> d_plaquette_to_cube(const TorusLattice& lat, const PlaqField& w) {
    if (lat.n != 3) throw std::invalid_argument("d_plaquette_to_cube: requires n == 3");
    std::vector<double> c(lat.num_sites, 0.0);
    const double inv_h = 1.0 / lat.h;
    const auto& w01 = w[0];
    const auto& w02 = w[1];
    const auto& w12 = w[2];
    for (int x = 0; x < lat.num_sites; ++x) {
        const double d0 = (w12[lat.next[0][x]] - w12[x]) * inv_h;
        const double d1 = (w02[lat.next[1][x]] - w02[x]) * inv_h;
        const double d2 = (w01[lat.next[2][x]] - w01[x]) * inv_h;
        c[x] = d0 - d1 + d2;
    }
    return c;
}

namespace {

constexpr int kernel_images = 5;

double axis_image_sum(double d, double L, double inv4t) {
    double s = 0.0;
    for (int m = -kernel_images; m <= kernel_images; ++m) {
        const double r = d + m * L;
        s += std::exp(-r * r * inv4t);
    }
    return s;
}

}  // namespace

double wrapped_heat_kernel(const TorusLattice& lat, double t, std::array<double, 3> x,
                           std::array<double, 3> y) {
    if (!(t > 0.0)) throw std::invalid_argument("wrapped_heat_kernel: t must be positive");
    const double inv4t = 1.0 / (4.0 * t);
    double k = std::pow(4.0 * pi * t, -0.5 * lat.n);
    for (int j = 0; j < lat.n; ++j)
        k *= axis_image_sum(wrap_delta(x[j] - y[j], lat.L[j]), lat.L[j], inv4t);
    return k;
}

std::vector<double> heat_kernel_field(const TorusLattice& lat, double t, std::array<double, 3> p) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_field: t must be positive");
    const double inv4t = 1.0 / (4.0 * t);
    std::array<std::vector<double>, 3> table;
    for (int j = 0; j < lat.n; ++j) {
        table[j].resize(lat.N[j]);
        for (int i = 0; i < lat.N[j]; ++i)
            table[j][i] = axis_image_sum(wrap_delta(lat.h * i - p[j], lat.L[j]), lat.L[j], inv4t);
    }
    std::vector<double> out(lat.num_sites);
    const double norm = std::pow(4.0 * pi * t, -0.5 * lat.n);
    int idx = 0;
    for (int i2 = 0; i2 < lat.N[2]; ++i2) {
        const double t2 = (lat.n == 3) ? table[2][i2] : 1.0;
        for (int i1 = 0; i1 < lat.N[1]; ++i1) {
            const double t12 = t2 * table[1][i1];
            for (int i0 = 0; i0 < lat.N[0]; ++i0, ++idx) out[idx] = norm * t12 * table[0][i0];
        }
    }
    return out;
}

}  // namespace higgsflow
