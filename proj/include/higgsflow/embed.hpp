#pragma once
// Initial data: embedding a radial vortex profile along a cycle of the torus.
//
// Supported cycles:
//   vacuum        u ≡ 1, ã ≡ 0 (untwisted sector only);
//   planar_point  n = 2, degree-N vortex at `center` (twisted sector, q = N);
//   straight_line n = 3, degree-N vortex line along axis 2 through `center`
//                 (twisted sector, q = N);
//   circle        n = 3, degree-N vortex ring of radius `radius` in the
//                 (0,1)-plane at height center[2] (untwisted sector, q = 0).
//
// Twisted construction: the phase is built from a pair of Jacobi ϑ₁ factors —
// the physical core at `center` and a compensating phantom zero placed at the
// background field's defect plaquette — so the phase is exactly periodic and
// the phantom's 2π flux quantum cancels the background bookkeeping defect
// exactly.  The ring uses a sine pair (mirror image at the unphysical radius
// −r₀) which is exactly periodic on its own.
//
// The link field is assembled from principal-value increments of the site
// phase, decomposed near each phase singularity so that every increment stays
// strictly inside (−π, π); the covariant phase speed then reduces exactly to
// N·(1 − a(d/ε))·Δα_core, which decays like the profile away from the cycle.
#include <array>
#include <limits>

#include "higgsflow/field_state.hpp"
#include "higgsflow/lattice.hpp"
#include "higgsflow/profile.hpp"

namespace higgsflow {

enum class CycleKind { vacuum, planar_point, straight_line, circle };

struct CycleSpec {
    CycleKind kind = CycleKind::vacuum;
    int degree = 0;  // winding N; 0 only for vacuum
    // NaN components are replaced by the centered default (plaquette-centered,
    // and aligned with the background defect row in the twisted cases).
    std::array<double, 3> center{std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN()};
    double radius = 0.0;  // circle only
};

struct EmbedPolicy {
    // Rings thinner than this many core widths are refused; the hard floor
    // below survives even when a scenario opts into tight rings.
    double min_radius_in_eps = 6.0;
    static constexpr double hard_floor_in_eps = 2.5;
};

// Background cut index that places the defect row through the middle of the
// domain, so that default twisted centers are Im-aligned with the phantom.
int twist_cut_index(int N1);

// The numeric center embed_cycle resolves the spec to (NaN components filled
// with the same defaults) — for pointing diagnostics at the cycle.
std::array<double, 3> resolve_cycle_center(const TorusLattice& lat, const CycleSpec& spec);

FieldState embed_cycle(const TorusLattice& lat, const VortexProfile& profile,
                       const CycleSpec& spec, double eps, const EmbedPolicy& policy = {});

}  // namespace higgsflow
