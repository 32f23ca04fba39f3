#pragma once
// The dynamical pair (u, a) and every pointwise derived density: covariant
// derivative, curvature, energy density, discrepancy, stress-energy tensor,
// gauge-invariant Jacobian, equipartition defect.
//
// Localization conventions (fixed so the advertised identities are exact):
//   |∇u|²(x)   = ½ Σ_j (|D_j u(x)|² + |D_j u(x−he_j)|²)            (site)
//   |ω|²(x)    = Σ_{i<j} ¼ Σ_{4 incident (i,j)-plaquettes} ω²      (site)
//   e(x)       = |∇u|²(x) + ε²|ω|²(x) + W(u(x))/ε²
// With these, h^n Σ_x e(x) equals the link/plaquette/site decomposition of
// the energy exactly, the flow right-hand side is the exact metric gradient
// of E, and tr𝒯 = n·e − 2|∇u|² − 4ε²|ω|² holds to round-off.  Signed site
// tensors (Ω̄, ψ, J) use arithmetic means of incident values; mean-of-squares
// vs. square-of-means differ by O(h²) (Jensen), which keeps every pointwise
// inequality (|ψ| ≤ |∇u|², |J| ≤ e) exact at the algebra level.
#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "higgsflow/lattice.hpp"

namespace higgsflow {

struct FieldState {
    double eps = 0.0;
    double time = 0.0;
    std::vector<Complex> u;  // complex scalar per site
    LinkField a;             // deviation connection ã per link (total = bg + ã)
};

FieldState make_vacuum_state(const TorusLattice& lat, double eps);

// Plaquette-to-site map used inside the discrepancy: arithmetic (mean of
// squares, default) or maxabs (largest incident square).
enum class OmegaAveraging { arithmetic, maxabs };

// Everything derived in one pass.  Field names follow the quantities they
// hold; all entries are gauge-invariant except Du (gauge-covariant).
struct DerivedDensities {
    std::array<std::vector<Complex>, 3> Du;  // forward covariant derivative per link
    PlaqField omega;                         // total curvature per plaquette
    PlaqField J_plaq;                        // Jacobian two-form per plaquette
    std::vector<double> grad_sq;             // |∇u|² per site
    std::vector<double> curv_sq;             // |ω|² per site (mean of squares)
    std::vector<double> u_sq;                // |u|² per site
    std::vector<double> e;                   // energy density per site
    std::vector<double> xi;                  // discrepancy ε|ω| − (1−|u|²)/2ε per site
    std::vector<double> Xi_defect;           // ε²|ω|² − (1−|u|²)²/4ε² per site
    std::array<std::vector<double>, 3> J_site;  // signed site Jacobian components per plane
    double E = 0.0;       // h^n Σ e  (exact decomposition total)
    double max_xi = 0.0;  // max over sites of xi
    double max_abs_u = 0.0;
};

DerivedDensities derive_densities(const TorusLattice& lat, const FieldState& st,
                                  OmegaAveraging scheme = OmegaAveraging::arithmetic);

// Link transporters e^{−i h (a_bg + ã)_j(x)}.
std::array<std::vector<Complex>, 3> link_transporters(const TorusLattice& lat,
                                                      const FieldState& st);

// D_j u(x) = (e^{−i h A_j(x)} u(x+he_j) − u(x)) / h.
std::array<std::vector<Complex>, 3> covariant_derivative(const TorusLattice& lat,
                                                         const FieldState& st);

// Total curvature per plaquette: declared background + d(ã).
PlaqField curvature_total(const TorusLattice& lat, const FieldState& st);

struct EnergyDensity {
    std::vector<double> e;
    double total = 0.0;  // h^n Σ e
};
EnergyDensity energy_density(const TorusLattice& lat, const FieldState& st);

struct DiscrepancyField {
    std::vector<double> xi;
    double max_xi = 0.0;
};
DiscrepancyField discrepancy_field(const TorusLattice& lat, const FieldState& st,
                                   OmegaAveraging scheme = OmegaAveraging::arithmetic);

// Symmetric stress-energy tensor per site, components stored in the order
// (00, 01, 02, 11, 12, 22); for n = 2 only (00, 01, 11) are populated.
struct StressTensor {
    int n = 0;
    std::array<std::vector<double>, 6> comp;
    static int slot(int i, int j) {  // i <= j
        static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
        return table[i][j];
    }
};
StressTensor stress_energy(const TorusLattice& lat, const FieldState& st);

// Centered-difference divergence (div 𝒯)_j(x) = Σ_i [𝒯_ij(x+he_i) − 𝒯_ij(x−he_i)]/2h.
std::array<std::vector<double>, 3> stress_divergence(const TorusLattice& lat,
                                                     const StressTensor& T);

// Gauge-invariant Jacobian J = ψ + (1−|u|²)ω on plaquettes, with ψ built from
// covariant parallel-edge averages of Du.
PlaqField jacobian_form(const TorusLattice& lat, const FieldState& st);

// u ← e^{iφ}u, ã_j(x) ← ã_j(x) + (φ(x+he_j) − φ(x))/h.  Every derived density
// above is exactly invariant under this map.
FieldState gauge_transform(const TorusLattice& lat, const FieldState& st,
                           const std::vector<double>& phi);

// h^n Σ |ε²|ω|² − (1−|u|²)²/4ε²|.
double equipartition_integral(const TorusLattice& lat, const FieldState& st);

struct DensityBoundEntry {
    double r = 0.0;
    double sup_ratio = 0.0;  // sup over centers of μ(B_r)/(ω_{n−2} r^{n−2})
    bool skipped = false;    // radius outside [2h, L/2]
};
struct DensityBoundReport {
    std::vector<DensityBoundEntry> per_radius;
    double sup_energy_ratio = 0.0;  // sup_x e / ((1−|u|²)²/ε² + 1)
};
// Centers are the highest-energy sites (greedily separated) plus seeded random
// sites, so concentration sets are always probed.
DensityBoundReport density_bound_check(const TorusLattice& lat, const FieldState& st,
                                       const std::vector<double>& radii,
                                       std::uint64_t seed = 20260815ull);

}  // namespace higgsflow
