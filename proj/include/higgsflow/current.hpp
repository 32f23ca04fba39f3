#pragma once

// Spacetime Jacobian accumulation: per-sample spatial and mixed (dt∧dx_j)
// components, discrete closedness of the combined form, time-slice degrees,
// window mass bounds, and pointwise slice-mass domination.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "field_state.hpp"
#include "flow.hpp"
#include "lattice.hpp"

namespace higgsflow {

struct SpacetimeSample {
    double t = 0.0;
    PlaqField J_spatial;                       // plaquette two-form, per plane
    std::array<std::vector<double>, 3> J_mixed;  // per axis: 2⟨i u̇, D_j u⟩ + (1−|u|²)α̇_j
    std::array<double, 3> flux_degree{};       // per plane: section curvature flux / 2π
};

// Ordered samples at uniform cadence.  append() enforces strictly increasing
// times; the cadence is set by the first two samples.
class SpacetimeCurrent {
  public:
    void append(SpacetimeSample sample);
    const std::vector<SpacetimeSample>& samples() const { return samples_; }
    double cadence() const { return cadence_; }
    bool empty() const { return samples_.empty(); }
    double t_front() const { return samples_.front().t; }
    double t_back() const { return samples_.back().t; }

  private:
    std::vector<SpacetimeSample> samples_;
    double cadence_ = 0.0;
};

// One spacetime sample from a state and its velocities:
// J_mixed,j = 2 Im(conj(u̇) D_j u) + (1−|u|²) α̇_j on links, J_spatial the
// gauge-invariant Jacobian two-form on plaquettes.
SpacetimeSample sample_current(const TorusLattice& lat, const FieldState& st,
                               const RhsFields& vel);

struct ClosednessReport {
    double max_residual = 0.0;     // mixed (time-space-space) cubes, max norm
    double pure_space_max = 0.0;   // spatial 3-cubes of the spatial Jacobian (n = 3)
    int pairs = 0;                 // consecutive sample pairs evaluated
};

// Discrete exterior derivative of the spacetime form over [t_lo, t_hi]:
// mixed cubes compare the time difference of the spatial component against
// the spatial curl of the mixed components (averaged over the two sample
// times); pure-space cubes of the spatial component are reported separately.
// Needs ≥ 3 samples in the window at uniform cadence.
ClosednessReport closedness_residual(const TorusLattice& lat, const SpacetimeCurrent& cur,
                                     double t_lo, double t_hi);

// Max over spatial 3-cubes of the exterior derivative of the total curvature
// form — zero to rounding by construction, isolating the spatial closedness
// remainder above as pure discretization of the pairing term.
double curvature_closedness(const TorusLattice& lat, const FieldState& st);

// Degree of the time slice nearest t against the given plane's homology
// class: the section flux h²Σω/2π of the sampled curvature form (the same on
// every transverse level and every slice, since the dynamical part telescopes
// away over a full section).  t outside the sampled range: throws.
double slice_flux_degree(const TorusLattice& lat, const SpacetimeCurrent& cur, double t,
                         int plane = 0);

// Flux through the half section {x₁ at center, x₀ ∈ [center₀, center₀+L₀/2)}
// of (0,2)-plaquettes, oriented along +e₁ so a positively oriented ring
// crossing once reads +1 — the disk-crossing probe for a null-homologous
// ring centred at `center` (n = 3 only).
double disk_crossing_degree(const TorusLattice& lat, const SpacetimeCurrent& cur, double t,
                            std::array<double, 3> center);

struct WindowMassReport {
    double length = 0.0;        // total window length ℒ
    double mass_over_2pi = 0.0;
    double bound = 0.0;         // (E₀/2π)(ℒ + 2√ℒ)·1.1
    bool pass = false;
    bool skipped = false;       // no full sample pair inside the window
    int pairs = 0;
};

// Spacetime mass of the form over the union of intervals, midpoint rule in
// time, against the absolute-continuity bound with 10% slack.
WindowMassReport window_mass_check(const TorusLattice& lat, const SpacetimeCurrent& cur,
                                   std::span<const std::array<double, 2>> windows,
                                   double initial_energy);

struct SliceDominationReport {
    double mass_over_2pi = 0.0;
    double energy_over_2pi = 0.0;
    double max_pointwise_excess = 0.0;  // max over sites of |J| − e
    bool pass = false;                  // excess ≤ 1e−8 and mass ≤ energy + 1e−10
};

// Pointwise |J| ≤ e (Euclidean norm over planes of the site-localized
// Jacobian) and the integrated slice-mass domination it implies.
SliceDominationReport slice_mass_domination(const TorusLattice& lat, const FieldState& st);

}  // namespace higgsflow
