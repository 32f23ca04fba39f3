#pragma once
// Radial degree-N self-dual vortex profiles on the plane at ε = 1:
//   f′ = N(1−a)f/r,   N a′/r = ½(1−f²),
// with f(0) = a(0) = 0 and f, a → 1.  Solved by shooting on the coefficient c
// of the near-origin behavior f ~ c·r^N, bisected to machine precision, with
// the far field grafted onto the linearized (Bessel-K) tail to suppress the
// exponentially growing mode of the shooting solution.
#include <iosfwd>
#include <vector>

#include "higgsflow/util.hpp"

namespace higgsflow {

struct VortexProfile {
    int N = 1;
    double r_max = 20.0;
    int M = 4000;  // intervals; nodes r_k = k·dr, k = 0..M
    double dr = 0.0;
    std::vector<double> r, f, a;
    double c_shoot = 0.0;  // f ~ c·r^N coefficient
    double energy = 0.0;   // 2π ∫ e(r) r dr (planar energy)
    double tail_A = 0.0;   // amplitude of 1 − f ≈ A·K₀(r) in the far field
    double graft_r = 0.0;  // center of the tail blend window (0 = no graft)

    // Interpolated values: 4-point local cubic inside the grid, the Bessel
    // tail beyond r_max, clamped at the vacuum values far out.
    double f_at(double rr) const;
    double a_at(double rr) const;
};

// Solve the first-order system for degree N.  Requires N ≥ 1, r_max ≥ 20,
// M ≥ 2000 (throws otherwise); throws if no shooting bracket exists or the
// solution fails monotonicity.
VortexProfile solve_bogomolny(int N, double r_max = 20.0, int M = 4000);

// The vacuum branch f ≡ 1, a ≡ 1 (degenerate stationary solution).
VortexProfile make_vacuum_branch_profile(int N = 1, double r_max = 20.0, int M = 4000);

// Max-norm residuals of the two radial second-order stationary equations
//   f″ + f′/r − N²(1−a)²f/r² + ½(1−f²)f = 0,   (a′/r)′ + (1−a)f²/r = 0,
// evaluated with 4th-order finite differences over r ∈ [r₁, r_max − 1].
struct SecondOrderResidual {
    double res_u = 0.0;
    double res_a = 0.0;
    double max_residual() const { return res_u > res_a ? res_u : res_a; }
};
SecondOrderResidual second_order_residual(const VortexProfile& p);

// Half-identity of entire stationary planar solutions: (|∇u|²_op + |ω|²)/e = ½,
// where |∇u|²_op is the square of the larger singular value of the real 2×2
// derivative, max(f′², N²(1−a)²f²/r²), and ω = N a′/r.  Derivatives are taken
// by finite differences (independent of the first-order system).
struct HalfIdentityReport {
    bool defined = false;  // false when e ≈ 0 everywhere (vacuum branch)
    double max_defect = 0.0;
};
HalfIdentityReport operator_norm_half_check(const VortexProfile& p);

// max over the grid of |ξ| = | |N a′/r| − ½(1−f²) | at ε = 1, a′ by finite
// differences; ≡ 0 on exact solutions of the first-order system.
double profile_max_discrepancy(const VortexProfile& p);

// Planar energy density e(r) at a node, from finite-difference derivatives.
std::vector<double> profile_energy_density(const VortexProfile& p);

// Least-squares slope of log e(r) vs r over [r_lo, r_hi] (profile units).
LineFit profile_energy_decay_fit(const VortexProfile& p, double r_lo, double r_hi);

// Least-squares slope of log(1 − f) vs r over [r_lo, r_hi].
LineFit profile_modulus_decay_fit(const VortexProfile& p, double r_lo, double r_hi);

// CSV rows "r,f,a".
void export_profile_csv(const VortexProfile& p, std::ostream& os);

}  // namespace higgsflow
