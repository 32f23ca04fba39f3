#pragma once

// Measurement passes over field states: vortex-set extraction from plaquette
// windings, the shrinking-ring radius law, Gaussian-weighted densities and
// their almost-monotonicity, discrepancy uniformity across resolutions,
// exponential decay fits away from the vortex region, a clearing-out
// (small-density ⇒ recovery) probe, transverse quantization per cross-section,
// and the localized energy-balance (Brakke-type) residual.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "field_state.hpp"
#include "flow.hpp"
#include "lattice.hpp"
#include "util.hpp"

namespace higgsflow {

// ---------------------------------------------------------------------------
// Vortex set
// ---------------------------------------------------------------------------

struct VortexPlaquette {
    int plane = 0;        // plane index (see TorusLattice::plane_axes)
    int site = 0;         // base site of the plaquette
    int winding = 0;      // gauge-invariant plaquette winding
    bool degenerate = false;  // |u| < 1e−6 on all four corners
};

struct VortexSet {
    std::vector<VortexPlaquette> marked;            // nonzero winding only
    std::vector<std::array<double, 3>> centroids;   // centers of non-degenerate marked plaquettes
    // Signed winding sum of plane-(0,1) plaquettes per x₂-level (one entry for
    // n = 2).  Equals the declared twist on every level, at all times.
    std::vector<int> section_degree;
    int total_plane01 = 0;  // sum of section_degree
};

// Winding per plaquette: (1/2π)[Σ_edges pv(Δ arg u − h·A_edge) + h²·ω_total].
// Corners with |u| < 1e−6 are deterministically perturbed before taking args;
// a plaquette whose four corners all sit below that floor is flagged
// degenerate and excluded from the centroid list (its winding still counts
// toward section sums).  Every winding is an exact integer by construction
// and is required to land in {−2,…,2}.
VortexSet extract_vortex_set(const TorusLattice& lat, const FieldState& st);

struct RingRadiusEstimate {
    double mean_radius = 0.0;  // mean in-plane distance of centroids from the axis
    double spread = 0.0;       // rms deviation about the mean
    int count = 0;             // non-degenerate marked plaquettes used
};

// In-plane (axes 0,1) distance of marked-plaquette centers from the vertical
// axis through `center`, with wrapped differences.
RingRadiusEstimate ring_radius_estimate(const TorusLattice& lat, const VortexSet& vs,
                                        std::array<double, 3> center);

struct RingLawPoint {
    double t = 0.0;
    double radius = 0.0;
    double spread = 0.0;
    int count = 0;
};

struct RingLawReport {
    std::vector<RingLawPoint> series;
    double max_rel_error = 0.0;   // max |r − √(r₀²−2t)|/r₀ over checked samples
    int checked = 0;              // samples inside the comparison window
    bool extinct = false;
    double extinction_time = 0.0; // first sample with fewer than 3 marked plaquettes
    double predicted_extinction = 0.0;  // r₀²/2
};

// Compares a recorded (t, r) series against r(t) = √(r₀² − 2t).  Samples enter
// the max-relative-error window only while r(t) ≥ radius_floor (and at least
// 3 plaquettes are marked); extinction is the first sample where the marked
// count drops below 3.
RingLawReport ring_law_check(std::span<const RingLawPoint> series, double r0,
                             double radius_floor);

// ---------------------------------------------------------------------------
// Gaussian densities and almost-monotonicity
// ---------------------------------------------------------------------------

struct GaussianDensity {
    double psi = 0.0;           // 4π(T−s) · h^n Σ K·e
    double base = 0.0;          //   (T−s) · h^n Σ K·e
    double T_minus_s = 0.0;
};

// Backward-heat-kernel-weighted energy at scale T−s, centred at p.  Demands
// 0 < s < T and T − s ≤ (min extent)²/4; outside that window the scale is
// meaningless on the torus and the call throws.
GaussianDensity gaussian_density(const TorusLattice& lat, const FieldState& st,
                                 std::array<double, 3> p, double T);

// e^{C√(T−s)} · (T−s) · ∫K e, from a precomputed base integral.
double weighted_gaussian_density(double base, double T_minus_s, double C);

struct MonotonicityReport {
    bool found = false;
    double C = 0.0;             // smallest grid constant that works
    double max_violation = 0.0; // at the reported C (≤ slack when found)
    double slack = 0.0;         // 1e−3 · E(0)
};

// Smallest C in `C_grid` (scanned in ascending order) such that for every
// sample pair s₁ < s₂ the weighted density grows by at most
// 2C(√(T−s₁) − √(T−s₂)) + 1e−3·E(0).  Fewer than four samples: throws.
MonotonicityReport monotonicity_report(std::span<const double> s_times,
                                       std::span<const double> base_integrals,
                                       double T, double initial_energy,
                                       std::span<const double> C_grid);

// ---------------------------------------------------------------------------
// Discrepancy uniformity across resolutions
// ---------------------------------------------------------------------------

struct UniformityEntry {
    double eps = 0.0;
    double max_xi = 0.0;
};

struct UniformityReport {
    double worst_ratio = 0.0;  // max over entries / min over entries
    double max_value = 0.0;
    double min_value = 0.0;
    bool comparable = true;    // ratio ≤ 2
};

// Compares the one-sided discrepancy maxima of matched runs at different
// resolutions.  Fewer than two entries: throws.  Non-positive maxima are
// clamped to a tiny floor so vacuum runs compare as uniform.
UniformityReport discrepancy_uniformity(std::span<const UniformityEntry> entries);

// ---------------------------------------------------------------------------
// Exponential decay away from the vortex set
// ---------------------------------------------------------------------------

struct DecayFit {
    bool decayed_everywhere = false;  // vortex region {|u|² < 1−β} is empty
    double beta = 0.5;
    double floor = 0.0;     // far-field energy level subtracted before fitting
    double max_e = 0.0;     // max energy density (reported when decayed everywhere)
    LineFit fit;            // log e vs distance/ε over the window
    int points = 0;
    double window_lo = 0.0; // in distance units
    double window_hi = 0.0;
};

// Fits log(e − floor) against (distance to {|u|² < 1−β})/ε over distances in
// [2ε, min(6ε, L/4)].  The floor is the median energy density over the
// farthest quintile of sites.  An empty vortex region short-circuits to
// decayed_everywhere with the max density reported instead of a fit.
DecayFit decay_fit(const TorusLattice& lat, const FieldState& st, double beta = 0.5);

// ---------------------------------------------------------------------------
// Clearing-out probe
// ---------------------------------------------------------------------------

struct ClearingOutEntry {
    double eta = 0.0;
    double c = 0.0;
    long premise_hits = 0;     // events with μ(B_r(p)) ≤ η r^{n−2}
    long conclusion_hits = 0;  // of those, |u|²(p, t + c r²) ≥ 1 − δ
    bool conclusive = false;   // at least 100 premise hits
};

struct ClearingOutReport {
    std::vector<ClearingOutEntry> table;  // one row per (η, c) pair
    double delta = 0.5;
    bool any_conclusive = false;
    double frontier_eta = 0.0;  // largest η whose best c still gives a 100% rate
};

// Empirical test of "small local density at scale r implies recovery of the
// modulus after a c·r² wait".  States must be a uniform-cadence series; probe
// points are seeded-random sites plus the highest-energy sites, radii are
// caller-supplied.  Rows with fewer than 100 premise hits stay inconclusive.
ClearingOutReport clearing_out_probe(const TorusLattice& lat,
                                     std::span<const FieldState> states,
                                     std::span<const double> times,
                                     std::span<const double> eta_grid,
                                     std::span<const double> c_grid,
                                     std::span<const double> radii,
                                     int points_per_state = 64,
                                     std::uint64_t seed = 20260815ull);

// ---------------------------------------------------------------------------
// Transverse quantization per cross-section
// ---------------------------------------------------------------------------

struct SectionQuantization {
    int index = 0;                 // x₂ level (0 for n = 2)
    double flux_degree = 0.0;      // h² Σ J over the section, / 2π
    double energy_degree = 0.0;    // h² Σ e over the section, / 2π
    int winding = 0;               // exact signed plaquette-winding sum
    bool skipped_tangent = false;  // vortex runs inside the section plane
};

struct QuantizationReport {
    std::vector<SectionQuantization> sections;
    double max_flux_deviation = 0.0;    // max |flux_degree − winding| over kept sections
    double max_energy_deviation = 0.0;  // max |energy_degree − winding| over kept sections
    int kept = 0;
};

// Degree of each (0,1) cross-section from the Jacobian flux and from the
// sectional energy.  A section whose marked plaquettes are too many to be a
// transverse crossing (the vortex is tangent, running inside the section) is
// skipped.  For n = 2 the single section is the whole torus.
QuantizationReport transverse_quantization(const TorusLattice& lat, const FieldState& st);

// ---------------------------------------------------------------------------
// Localized energy balance (ε-Brakke residual)
// ---------------------------------------------------------------------------

// Right-hand side −2∫φ(|u̇|² + ε²|α̇|²) + ∫(div𝒯)·dφ of the localized energy
// identity, evaluated with site-averaged velocities and centered differences.
// Throws if φ has a negative entry.
double brakke_rhs(const TorusLattice& lat, const FieldState& st, const RhsFields& vel,
                  std::span<const double> phi);

struct BrakkeResidualReport {
    std::vector<double> residual;  // relative mismatch at interior samples
    double max_residual = 0.0;
    int samples = 0;
};

// Compares centered-difference d/dt μ_t(φ) against the recorded right-hand
// sides at interior samples of a uniform-cadence series.  The mismatch is
// normalized by max(|lhs|, |rhs|, scale_floor).  Needs ≥ 3 samples.
BrakkeResidualReport eps_brakke_residual(std::span<const double> times,
                                         std::span<const double> mu,
                                         std::span<const double> rhs,
                                         double scale_floor);

}  // namespace higgsflow
