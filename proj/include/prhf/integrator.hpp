#pragma once

// Classical RK4 propagation of an orbital set with resolution and Gram
// monitoring. No operator splitting: the exchange term is nonlocal and
// non-multiplicative, so there is no exact potential flow to split against,
// and plain RK4 keeps one scheme across all three modes.
//
// Monitors run at sample cadence on committed states only; RK stage states
// deviate from orthonormality at O(dt^2) by construction and are never
// drift-checked. "Blow-up" is always reported as blow-up-indicated: loss of
// spectral resolution consistent with H^{1/2} growth, not a proof.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "prhf/hf_rhs.hpp"
#include "prhf/observables.hpp"
#include "prhf/orbital_set.hpp"

namespace prhf {

struct IntegratorConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    int sample_every = 10;           // steps between ObservableRecords
    double tail_frac_max = 1e-3;     // spectral-tail threshold
    double sobolev_growth_max = 10;  // H^{1/2} growth factor threshold
    double drift_tol = prhf::drift_tol;
    std::vector<double> radii;       // concentration radii carried into records
    bool relowdin = false;           // exploratory: project back after each step

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
        if (sample_every < 1) throw std::invalid_argument("IntegratorConfig: sample_every must be >= 1");
        if (!(tail_frac_max > 0.0) || !(sobolev_growth_max > 0.0) || !(drift_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: thresholds must be positive");
    }
};

enum class RunStatus { completed, blow_up_indicated, drift_exceeded };

inline std::string run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::blow_up_indicated: return "blow-up-indicated";
        case RunStatus::drift_exceeded: return "drift-exceeded";
    }
    return "?";
}

namespace detail {

inline OrbitalSet stage_state(const OrbitalSet& S, const std::vector<Field>& k, double c, double dt_frac) {
    OrbitalSet out = S;
    for (int j = 0; j < S.N(); ++j) axpy(cxd(c, 0.0), k[j], out.orbitals[j]);
    out.t = S.t + dt_frac;
    return out;
}

}  // namespace detail

// One RK4 step of i d/dt psi = H_eff psi; t advances by dt. check_state
// gates the Gram-drift precondition on the committed input (the integrator
// loop does its own cadence checks and passes false).
inline OrbitalSet rk4_step(const OrbitalSet& S, double dt, bool check_state = true) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
    const std::vector<Field> k1 = rhs(S, check_state);
    const std::vector<Field> k2 = rhs(detail::stage_state(S, k1, 0.5 * dt, 0.5 * dt), false);
    const std::vector<Field> k3 = rhs(detail::stage_state(S, k2, 0.5 * dt, 0.5 * dt), false);
    const std::vector<Field> k4 = rhs(detail::stage_state(S, k3, dt, dt), false);

    OrbitalSet out = S;
    const double w = dt / 6.0;
    for (int j = 0; j < S.N(); ++j) {
        cxd* dst = out.orbitals[j].data.data();
        const cxd* a = k1[j].data.data();
        const cxd* b = k2[j].data.data();
        const cxd* c = k3[j].data.data();
        const cxd* d = k4[j].data.data();
        const std::size_t sz = out.orbitals[j].size();
        for (std::size_t p = 0; p < sz; ++p)
            dst[p] += w * (a[p] + 2.0 * b[p] + 2.0 * c[p] + d[p]);
    }
    out.t = S.t + dt;
    return out;
}

struct ResolutionReport {
    double tail_frac = 0.0;
    double sobolev_half = 0.0;
    bool hint = false;  // under-resolution indicated
};

// sobolev_ref <= 0 disables the growth comparison (no baseline known).
inline ResolutionReport resolution_monitor(const OrbitalSet& S, double tail_frac_max = 1e-3,
                                           double sobolev_ref = -1.0,
                                           double sobolev_growth_max = 10.0) {
    ResolutionReport r;
    const MultiplierSymbol sob = MultiplierSymbol::sobolev_half();
    double outer = 0.0, total = 0.0;
    for (const Field& psi : S.orbitals) {
        const Field psi_hat = fft_forward(psi);
        r.sobolev_half += spectral_qform(psi_hat, sob);
        double o = 0.0, tt = 0.0;
        spectral_tail_masses(psi_hat, o, tt);
        outer += o;
        total += tt;
    }
    r.tail_frac = total > 0.0 ? outer / total : 0.0;
    r.hint = r.tail_frac > tail_frac_max ||
             (sobolev_ref > 0.0 && r.sobolev_half > sobolev_growth_max * sobolev_ref) ||
             !std::isfinite(r.tail_frac) || !std::isfinite(r.sobolev_half);
    return r;
}

struct EvolveResult {
    OrbitalSet state;          // state at termination
    RunStatus status = RunStatus::completed;
    double last_trusted_t = 0.0;  // last sample with tail_frac <= tail_frac_max/10
    double sobolev_initial = 0.0;
    long steps_taken = 0;
};

// Step until t_end or a monitor fires, emitting a record at t0 and every
// sample_every committed steps. All terminations are classified statuses.
inline EvolveResult evolve(const OrbitalSet& S0, const IntegratorConfig& cfg,
                           const std::function<void(const ObservableRecord&)>& sink) {
    cfg.validate();
    EvolveResult res{S0, RunStatus::completed, S0.t, 0.0, 0};

    ObservableRecord rec = make_record(res.state, cfg.radii);
    res.sobolev_initial = rec.sobolev_half;
    if (sink) sink(rec);

    auto classify = [&](const ObservableRecord& r) -> bool {
        if (!std::isfinite(r.gram_drift) || r.gram_drift > cfg.drift_tol) {
            res.status = RunStatus::drift_exceeded;
            return true;
        }
        if (!std::isfinite(r.tail_frac) || !std::isfinite(r.sobolev_half) ||
            r.tail_frac > cfg.tail_frac_max ||
            r.sobolev_half > cfg.sobolev_growth_max * res.sobolev_initial) {
            res.status = RunStatus::blow_up_indicated;
            return true;
        }
        if (r.tail_frac <= cfg.tail_frac_max / 10.0) res.last_trusted_t = r.t;
        return false;
    };
    if (classify(rec)) return res;

    while (res.state.t < cfg.t_end - 0.5 * cfg.dt) {
        res.state = rk4_step(res.state, cfg.dt, false);
        if (cfg.relowdin) res.state = lowdin_orthonormalize(res.state);
        ++res.steps_taken;
        if (res.steps_taken % cfg.sample_every == 0 ||
            !(res.state.t < cfg.t_end - 0.5 * cfg.dt)) {
            rec = make_record(res.state, cfg.radii);
            if (sink) sink(rec);
            if (classify(rec)) return res;
        }
    }
    res.status = RunStatus::completed;
    return res;
}

}  // namespace prhf
