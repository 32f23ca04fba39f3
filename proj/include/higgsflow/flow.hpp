#pragma once
// L² gradient flow of the torus energy
//   E(u, ã) = h^n [ Σ_links |Du|² + ε² Σ_plaq ω² + Σ_sites (1−|u|²)²/4ε² ]
// in the metric h^n Σ (⟨v,v'⟩ + ε² β·β'):
//   u̇ = −D*Du + (1/2ε²)(1−|u|²) u,     α̇ = −(d*ω) + (1/ε²) Im(ū Du),
// which satisfies dE/dt = −2 h^n Σ (|u̇|² + ε²|α̇|²) exactly in the spatial
// discretization.  Time stepping is classical RK4 (optionally explicit Euler)
// with dt = c·min(h², ε²), c ≤ 1/4; every step is audited against the
// dissipation identity.
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "higgsflow/field_state.hpp"
#include "higgsflow/lattice.hpp"

namespace higgsflow {

struct RhsFields {
    std::vector<Complex> du;
    LinkField da;
};

struct FlowParams {
    double dt_factor = 0.2;  // dt = dt_factor · min(h², ε²); must lie in (0, 1/4]
    double t_end = 1.0;
    double sample_every = 0.05;  // ≤ 0: samples only at the start and the end
    enum class Integrator { rk4, euler } integrator = Integrator::rk4;
};

struct StepAudit {
    double t0 = 0.0, dt = 0.0;
    double energy_before = 0.0, energy_after = 0.0;
    double dissipation = 0.0;  // quadrature of 2 h^n Σ(|u̇|²+ε²|α̇|²) over the step
    double residual = 0.0;     // |ΔE + dissipation|
};

struct EvolveTotals {
    int steps = 0;
    double energy_initial = 0.0;
    double energy_current = 0.0;
    double dissipation_cum = 0.0;
    double residual_cum = 0.0;  // Σ per-step |ΔE + dissipation|
};

// Thrown when the state leaves the trust region (max|u| > 2 or non-finite).
struct FlowAbort : std::runtime_error {
    double time;
    explicit FlowAbort(const std::string& msg, double t) : std::runtime_error(msg), time(t) {}
};

// Flow velocity at a state.
void flow_rhs(const TorusLattice& lat, const FieldState& st, RhsFields& out);
RhsFields flow_rhs(const TorusLattice& lat, const FieldState& st);

// h^n Σ (|u̇|² + ε²|α̇|²): half the instantaneous energy dissipation rate.
double dissipation_functional(const TorusLattice& lat, double eps, const RhsFields& v);

// Stateful stepper owning the work buffers; reuses the end-of-step velocity as
// the next step's first stage so each audited step costs four rhs evaluations.
class FlowDriver {
  public:
    explicit FlowDriver(const TorusLattice& lat);

    // Advance one step in place.  With reuse_cached = true the driver assumes
    // `st` is unchanged since its own previous step on the same object.
    void step(FieldState& st, double dt, StepAudit& audit, bool reuse_cached = false,
              FlowParams::Integrator integrator = FlowParams::Integrator::rk4);

    // Velocity at the state produced by the last step.
    const RhsFields& velocity_at_end() const { return k1_; }

    // Flow velocity at an arbitrary state (no stepping, no cache effect on
    // audits beyond invalidation).
    void velocity(const FieldState& st, RhsFields& out);

  private:
    struct EnergyProbe {
        double energy = 0.0;
        double max_u_sq = 0.0;
    };
    EnergyProbe rhs_with_energy(const FieldState& st, RhsFields& out);
    void rhs_only(const FieldState& st, RhsFields& out);
    double norm_d(const RhsFields& v, double eps);   // dissipation functional of v
    double norm_mid(const RhsFields& p, const RhsFields& q, double eps);  // of (p+q)/2

    const TorusLattice& lat_;
    RhsFields k1_, k2_, k3_, k4_;
    FieldState tmp_;
    std::array<std::vector<Complex>, 3> T_, Du_;
    PlaqField om_;
    LinkField dstar_;
    std::vector<double> sumbuf_;
    bool cache_valid_ = false;
    EnergyProbe cached_probe_{};
};

// One audited step, returning the advanced state (convenience wrapper).
FieldState flow_step(const TorusLattice& lat, const FieldState& st, double dt,
                     StepAudit* audit = nullptr);

// Callback at each sample instant: state, flow velocity there, running totals.
using SampleSink =
    std::function<void(const FieldState&, const RhsFields&, const EvolveTotals&)>;

// Run the flow to params.t_end in place.  dt is snapped down so that
// sample_every is an exact multiple of it (uniform sample cadence); samples
// fire at t = start, every sample_every, and t_end.  Aborts propagate as
// FlowAbort with the offending state left in `st`.
EvolveTotals evolve(const TorusLattice& lat, FieldState& st, const FlowParams& params,
                    const SampleSink& sink = {});

// h^n Σ φ·e for a site weight φ (localized mass of the energy measure).
double localized_mass(const TorusLattice& lat, const FieldState& st,
                      std::span<const double> phi);

// Dissipation-rate constant of a nonnegative test function:
//   C(φ) = min( sup_{φ>0} |∇φ|²/φ , 2·max ‖∇²φ‖_F ),
// by centered differences.  μ_t(φ) + C(φ)·Λ·t is then nonincreasing along the
// flow up to discretization error, where Λ bounds the energy along the run.
double test_function_rate(const TorusLattice& lat, std::span<const double> phi);

// Check that mu[k] + rate·times[k] is nonincreasing within an additive slack.
struct SemidecreasingReport {
    bool ok = false;
    double max_violation = 0.0;  // worst increase of the compensated series
    double rate = 0.0;
};
SemidecreasingReport semidecreasing_probe(std::span<const double> times,
                                          std::span<const double> mu, double rate,
                                          double slack);

// Periodic Gaussian bump exp(−dist²/2σ²) sampled at sites (test weight).
std::vector<double> gaussian_bump(const TorusLattice& lat, std::array<double, 3> center,
                                  double sigma);

}  // namespace higgsflow
