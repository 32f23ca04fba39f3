#include "higgsflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace higgsflow {

namespace {

void resize_rhs(const TorusLattice& lat, RhsFields& r) {
    r.du.resize(lat.num_sites);
    for (int j = 0; j < lat.n; ++j) r.da[j].resize(lat.num_sites);
}

// tmp = base + c·k (state-space axpy over u and ã).
void stage_state(const TorusLattice& lat, const FieldState& base, const RhsFields& k, double c,
                 FieldState& tmp) {
    tmp.eps = base.eps;
    tmp.time = base.time;
    tmp.u.resize(lat.num_sites);
    for (int x = 0; x < lat.num_sites; ++x) tmp.u[x] = base.u[x] + c * k.du[x];
    for (int j = 0; j < lat.n; ++j) {
        tmp.a[j].resize(lat.num_sites);
        const auto& bj = base.a[j];
        const auto& kj = k.da[j];
        auto& tj = tmp.a[j];
        for (int x = 0; x < lat.num_sites; ++x) tj[x] = bj[x] + c * kj[x];
    }
}

}  // namespace

FlowDriver::FlowDriver(const TorusLattice& lat) : lat_(lat) {
    resize_rhs(lat_, k1_);
    resize_rhs(lat_, k2_);
    resize_rhs(lat_, k3_);
    resize_rhs(lat_, k4_);
    for (int j = 0; j < lat_.n; ++j) {
        T_[j].resize(lat_.num_sites);
        Du_[j].resize(lat_.num_sites);
    }
    om_ = lat_.make_plaq_field();
    dstar_ = lat_.make_link_field();
    sumbuf_.resize(lat_.num_sites);
}

void FlowDriver::rhs_only(const FieldState& st, RhsFields& out) {
    const double h = lat_.h, inv_h = 1.0 / h;
    const double eps2 = st.eps * st.eps;
    const double inv_e2 = 1.0 / eps2, inv_2e2 = 0.5 / eps2;

    for (int j = 0; j < lat_.n; ++j) {
        const auto& abg = lat_.bg.a[j];
        const auto& adev = st.a[j];
        const auto& nx = lat_.next[j];
        auto& Tj = T_[j];
        auto& Dj = Du_[j];
        for (int x = 0; x < lat_.num_sites; ++x) {
            const double ph = -h * (abg[x] + adev[x]);
            const Complex T{std::cos(ph), std::sin(ph)};
            Tj[x] = T;
            Dj[x] = (T * st.u[nx[x]] - st.u[x]) * inv_h;
        }
    }

    d_link_to_plaquette(lat_, st.a, om_);  // constant background curvature drops under d*
    codifferential_plaquette_to_link(lat_, om_, dstar_);

    for (int j = 0; j < lat_.n; ++j) {
        const auto& Dj = Du_[j];
        const auto& ds = dstar_[j];
        auto& oj = out.da[j];
        for (int x = 0; x < lat_.num_sites; ++x) {
            const Complex& ux = st.u[x];
            const double im = ux.real() * Dj[x].imag() - ux.imag() * Dj[x].real();
            oj[x] = -ds[x] + inv_e2 * im;
        }
    }

    for (int x = 0; x < lat_.num_sites; ++x) {
        Complex acc{0.0, 0.0};
        for (int j = 0; j < lat_.n; ++j) {
            const int p = lat_.prev[j][x];
            acc += std::conj(T_[j][p]) * Du_[j][p] - Du_[j][x];
        }
        const double usq = std::norm(st.u[x]);
        out.du[x] = -inv_h * acc + inv_2e2 * (1.0 - usq) * st.u[x];
    }
}

FlowDriver::EnergyProbe FlowDriver::rhs_with_energy(const FieldState& st, RhsFields& out) {
    rhs_only(st, out);
    EnergyProbe probe;
    const double eps2 = st.eps * st.eps;
    double grad = 0.0, curv = 0.0;
    for (int j = 0; j < lat_.n; ++j) {
        const auto& Dj = Du_[j];
        for (int x = 0; x < lat_.num_sites; ++x) sumbuf_[x] = std::norm(Dj[x]);
        grad += pairwise_sum(sumbuf_.data(), sumbuf_.size());
    }
    for (int p = 0; p < lat_.plane_count(); ++p) {
        const double B = lat_.bg_curvature(p);
        const auto& wp = om_[p];
        for (int x = 0; x < lat_.num_sites; ++x) {
            const double w = wp[x] + B;
            sumbuf_[x] = w * w;
        }
        curv += pairwise_sum(sumbuf_.data(), sumbuf_.size());
    }
    double max_u_sq = 0.0;
    for (int x = 0; x < lat_.num_sites; ++x) {
        const double usq = std::norm(st.u[x]);
        max_u_sq = std::max(max_u_sq, usq);
        const double w = 1.0 - usq;
        sumbuf_[x] = 0.25 * w * w;
    }
    const double pot = pairwise_sum(sumbuf_.data(), sumbuf_.size());
    const double hn = std::pow(lat_.h, lat_.n);
    probe.energy = hn * (grad + eps2 * curv + pot / eps2);
    probe.max_u_sq = max_u_sq;
    return probe;
}

double FlowDriver::norm_d(const RhsFields& v, double eps) {
    double s = 0.0;
    for (int x = 0; x < lat_.num_sites; ++x) sumbuf_[x] = std::norm(v.du[x]);
    s += pairwise_sum(sumbuf_.data(), sumbuf_.size());
    const double eps2 = eps * eps;
    for (int j = 0; j < lat_.n; ++j) {
        const auto& vj = v.da[j];
        for (int x = 0; x < lat_.num_sites; ++x) sumbuf_[x] = vj[x] * vj[x];
        s += eps2 * pairwise_sum(sumbuf_.data(), sumbuf_.size());
    }
    return s * std::pow(lat_.h, lat_.n);
}

double FlowDriver::norm_mid(const RhsFields& p, const RhsFields& q, double eps) {
    double s = 0.0;
    for (int x = 0; x < lat_.num_sites; ++x) sumbuf_[x] = std::norm(0.5 * (p.du[x] + q.du[x]));
    s += pairwise_sum(sumbuf_.data(), sumbuf_.size());
    const double eps2 = eps * eps;
    for (int j = 0; j < lat_.n; ++j) {
        const auto& pj = p.da[j];
        const auto& qj = q.da[j];
        for (int x = 0; x < lat_.num_sites; ++x) {
            const double m = 0.5 * (pj[x] + qj[x]);
            sumbuf_[x] = m * m;
        }
        s += eps2 * pairwise_sum(sumbuf_.data(), sumbuf_.size());
    }
    return s * std::pow(lat_.h, lat_.n);
}

void FlowDriver::step(FieldState& st, double dt, StepAudit& audit, bool reuse_cached,
                      FlowParams::Integrator integrator) {
    if (!(dt > 0.0)) throw std::invalid_argument("FlowDriver::step: dt must be positive");
    if (!reuse_cached || !cache_valid_) cached_probe_ = rhs_with_energy(st, k1_);
    const EnergyProbe before = cached_probe_;
    const double d0 = norm_d(k1_, st.eps);
    audit.t0 = st.time;
    audit.dt = dt;
    audit.energy_before = before.energy;

    if (integrator == FlowParams::Integrator::rk4) {
        stage_state(lat_, st, k1_, 0.5 * dt, tmp_);
        rhs_only(tmp_, k2_);
        stage_state(lat_, st, k2_, 0.5 * dt, tmp_);
        rhs_only(tmp_, k3_);
        stage_state(lat_, st, k3_, dt, tmp_);
        rhs_only(tmp_, k4_);
        const double c = dt / 6.0;
        for (int x = 0; x < lat_.num_sites; ++x)
            st.u[x] += c * (k1_.du[x] + 2.0 * k2_.du[x] + 2.0 * k3_.du[x] + k4_.du[x]);
        for (int j = 0; j < lat_.n; ++j) {
            auto& aj = st.a[j];
            const auto& a1 = k1_.da[j];
            const auto& a2 = k2_.da[j];
            const auto& a3 = k3_.da[j];
            const auto& a4 = k4_.da[j];
            for (int x = 0; x < lat_.num_sites; ++x)
                aj[x] += c * (a1[x] + 2.0 * a2[x] + 2.0 * a3[x] + a4[x]);
        }
    } else {
        for (int x = 0; x < lat_.num_sites; ++x) st.u[x] += dt * k1_.du[x];
        for (int j = 0; j < lat_.n; ++j) {
            auto& aj = st.a[j];
            const auto& a1 = k1_.da[j];
            for (int x = 0; x < lat_.num_sites; ++x) aj[x] += dt * a1[x];
        }
    }
    st.time += dt;

    // Mid-step dissipation from the interior stages (Euler: endpoint average).
    const double dmid = (integrator == FlowParams::Integrator::rk4)
                            ? norm_mid(k2_, k3_, st.eps)
                            : -1.0;

    cached_probe_ = rhs_with_energy(st, k1_);
    cache_valid_ = true;
    const double d1 = norm_d(k1_, st.eps);
    audit.energy_after = cached_probe_.energy;
    // Simpson (trapezoid for Euler) quadrature of the dissipation rate 2·D(t).
    audit.dissipation = (dmid >= 0.0) ? 2.0 * dt / 6.0 * (d0 + 4.0 * dmid + d1)
                                      : dt * (d0 + d1);
    audit.residual = std::abs((audit.energy_after - audit.energy_before) + audit.dissipation);

    if (!std::isfinite(audit.energy_after) || cached_probe_.max_u_sq > 4.0)
        throw FlowAbort("flow aborted: state left the trust region (max|u| = " +
                            std::to_string(std::sqrt(cached_probe_.max_u_sq)) +
                            ", E = " + std::to_string(audit.energy_after) + ") at t = " +
                            std::to_string(st.time),
                        st.time);
}

void FlowDriver::velocity(const FieldState& st, RhsFields& out) {
    resize_rhs(lat_, out);
    rhs_only(st, out);
    cache_valid_ = false;
}

void flow_rhs(const TorusLattice& lat, const FieldState& st, RhsFields& out) {
    FlowDriver drv(lat);
    drv.velocity(st, out);
}

RhsFields flow_rhs(const TorusLattice& lat, const FieldState& st) {
    RhsFields out;
    flow_rhs(lat, st, out);
    return out;
}

double dissipation_functional(const TorusLattice& lat, double eps, const RhsFields& v) {
    std::vector<double> buf(lat.num_sites);
    double s = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) buf[x] = std::norm(v.du[x]);
    s += pairwise_sum(buf.data(), buf.size());
    for (int j = 0; j < lat.n; ++j) {
        const auto& vj = v.da[j];
        for (int x = 0; x < lat.num_sites; ++x) buf[x] = vj[x] * vj[x];
        s += eps * eps * pairwise_sum(buf.data(), buf.size());
    }
    return s * std::pow(lat.h, lat.n);
}

FieldState flow_step(const TorusLattice& lat, const FieldState& st, double dt, StepAudit* audit) {
    FieldState next = st;
    FlowDriver drv(lat);
    StepAudit local;
    drv.step(next, dt, audit ? *audit : local);
    return next;
}

EvolveTotals evolve(const TorusLattice& lat, FieldState& st, const FlowParams& params,
                    const SampleSink& sink) {
    if (!(params.dt_factor > 0.0) || params.dt_factor > 0.25)
        throw std::invalid_argument("evolve: dt_factor must lie in (0, 1/4]");
    if (!(params.t_end > st.time))
        throw std::invalid_argument("evolve: t_end must exceed the state time");

    const double scale = std::min(lat.h * lat.h, st.eps * st.eps);
    const double dt_raw = params.dt_factor * scale;
    double dt = dt_raw;
    long steps_per_sample = 0;
    if (params.sample_every > 0.0) {
        steps_per_sample = std::max(1L, std::lround(std::ceil(params.sample_every / dt_raw - 1e-12)));
        dt = params.sample_every / static_cast<double>(steps_per_sample);
    }

    FlowDriver drv(lat);
    EvolveTotals totals;
    RhsFields probe_rhs;
    resize_rhs(lat, probe_rhs);

    totals.energy_initial = energy_density(lat, st).total;
    totals.energy_current = totals.energy_initial;
    if (sink) {
        drv.velocity(st, probe_rhs);
        sink(st, probe_rhs, totals);
    }

    long step_index = 0;
    bool reuse = false;
    while (st.time < params.t_end - 1e-12) {
        const double dt_step = std::min(dt, params.t_end - st.time);
        StepAudit audit;
        // A clipped final step changes the state the cache refers to only via
        // its own stepping, so the cache stays valid.
        drv.step(st, dt_step, audit, reuse, params.integrator);
        reuse = true;
        ++step_index;
        totals.steps += 1;
        totals.dissipation_cum += audit.dissipation;
        totals.residual_cum += audit.residual;
        totals.energy_current = audit.energy_after;

        const bool on_cadence = steps_per_sample > 0 && step_index % steps_per_sample == 0;
        const bool at_end = st.time >= params.t_end - 1e-12;
        if (sink && (on_cadence || at_end)) sink(st, drv.velocity_at_end(), totals);
    }
    return totals;
}

double localized_mass(const TorusLattice& lat, const FieldState& st, std::span<const double> phi) {
    if (static_cast<int>(phi.size()) != lat.num_sites)
        throw std::invalid_argument("localized_mass: weight size mismatch");
    const DerivedDensities d = derive_densities(lat, st);
    std::vector<double> buf(lat.num_sites);
    for (int x = 0; x < lat.num_sites; ++x) buf[x] = phi[x] * d.e[x];
    return std::pow(lat.h, lat.n) * pairwise_sum(buf.data(), buf.size());
}

double test_function_rate(const TorusLattice& lat, std::span<const double> phi) {
    if (static_cast<int>(phi.size()) != lat.num_sites)
        throw std::invalid_argument("test_function_rate: weight size mismatch");
    double phi_max = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) phi_max = std::max(phi_max, phi[x]);
    if (phi_max <= 0.0) return 0.0;
    const double inv_2h = 0.5 / lat.h, inv_h2 = 1.0 / (lat.h * lat.h);

    double sup_grad_ratio = 0.0, sup_hess = 0.0;
    for (int x = 0; x < lat.num_sites; ++x) {
        double grad_sq = 0.0, hess_sq = 0.0;
        for (int i = 0; i < lat.n; ++i) {
            const double di = (phi[lat.next[i][x]] - phi[lat.prev[i][x]]) * inv_2h;
            grad_sq += di * di;
            const double dii = (phi[lat.next[i][x]] - 2.0 * phi[x] + phi[lat.prev[i][x]]) * inv_h2;
            hess_sq += dii * dii;
            for (int j = i + 1; j < lat.n; ++j) {
                const int pp = lat.next[j][lat.next[i][x]];
                const int pm = lat.prev[j][lat.next[i][x]];
                const int mp = lat.next[j][lat.prev[i][x]];
                const int mm = lat.prev[j][lat.prev[i][x]];
                const double dij = (phi[pp] - phi[pm] - phi[mp] + phi[mm]) * 0.25 * inv_h2;
                hess_sq += 2.0 * dij * dij;
            }
        }
        if (phi[x] > 1e-12 * phi_max)
            sup_grad_ratio = std::max(sup_grad_ratio, grad_sq / phi[x]);
        else if (grad_sq > 0.0)
            sup_grad_ratio = std::numeric_limits<double>::infinity();
        sup_hess = std::max(sup_hess, std::sqrt(hess_sq));
    }
    return std::min(sup_grad_ratio, 2.0 * sup_hess);
}

SemidecreasingReport semidecreasing_probe(std::span<const double> times,
                                          std::span<const double> mu, double rate,
                                          double slack) {
    if (times.size() != mu.size() || times.size() < 2)
        throw std::invalid_argument("semidecreasing_probe: need matching series of length >= 2");
    SemidecreasingReport rep;
    rep.rate = rate;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double compensated =
            (mu[k + 1] + rate * times[k + 1]) - (mu[k] + rate * times[k]);
        rep.max_violation = std::max(rep.max_violation, compensated);
    }
    rep.ok = rep.max_violation <= slack;
    return rep;
}

std::vector<double> gaussian_bump(const TorusLattice& lat, std::array<double, 3> center,
                                  double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_bump: sigma must be positive");
    std::vector<double> phi(lat.num_sites);
    const double inv_2s2 = 0.5 / (sigma * sigma);
    for (int x = 0; x < lat.num_sites; ++x) {
        const auto c = lat.coords(x);
        double d2 = 0.0;
        for (int j = 0; j < lat.n; ++j) {
            const double w = wrap_delta(lat.h * c[j] - center[j], lat.L[j]);
            d2 += w * w;
        }
        phi[x] = std::exp(-d2 * inv_2s2);
    }
    return phi;
}

}  // namespace higgsflow
