// prhf: spectral simulator and verification suite for pseudo-relativistic
// Hartree-Fock dynamics in a periodic box.
//
// Subcommands: simulate, blowup, verify, make-initial.
// Exit codes: 0 = scientific outcome obtained (completed or blow-up-indicated),
//             1 = numerical-quality failure, 2 = configuration error.
// Every flag has an environment mirror with the PRHF_ prefix (PRHF_CONFIG,
// PRHF_OUT, PRHF_SEED, PRHF_THREADS); flags win over the environment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "prhf/config.hpp"
#include "prhf/lemma_verify.hpp"
#include "prhf/orbital_io.hpp"

namespace fs = std::filesystem;
using namespace prhf;

namespace {

struct Args {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    int threads = 0;
};

struct CommonOpts {
    CLI::Option* out = nullptr;
    CLI::Option* seed = nullptr;
};

CommonOpts add_common_options(CLI::App* cmd, Args& a) {
    CommonOpts o;
    cmd->add_option("--config", a.config_path, "run configuration (JSON)")
        ->required()
        ->envname("PRHF_CONFIG");
    o.out = cmd->add_option("--out", a.out_override, "output directory (overrides config)")
                ->envname("PRHF_OUT");
    o.seed = cmd->add_option("--seed", a.seed_override, "rng seed (overrides config)")
                 ->envname("PRHF_SEED");
    cmd->add_option("--threads", a.threads, "worker threads, 0 = auto (kernels are serial)")
        ->envname("PRHF_THREADS")
        ->check(CLI::Range(0, 4096));
    return o;
}

SimConfig resolve_config(const Args& a, const CommonOpts& o) {
    SimConfig c = load_config(a.config_path);
    if (o.out->count() > 0 || !a.out_override.empty()) {
        if (!a.out_override.empty()) c.out_dir = a.out_override;
    }
    if (o.seed->count() > 0) c.seed = a.seed_override;
    return c;
}

void write_text_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
    out << text;
    if (!out.good()) throw std::runtime_error("write failed: " + p.string());
}

struct Prepared {
    OrbitalSet state;
    double kappa = 0.0;
    double kappa_star = std::numeric_limits<double>::quiet_NaN();
};

Prepared build_initial_state(const SimConfig& c) {
    const Grid g = make_grid(c.n, c.L, c.m);
    OrbitalSet S = [&] {
        if (!c.container.empty()) {
            OrbitalSet loaded = load_orbitals(c.container);
            if (loaded.grid() != g)
                throw ConfigError("config: container grid (n=" + std::to_string(loaded.grid().n) +
                                  ", L=" + std::to_string(loaded.grid().L) +
                                  ", m=" + std::to_string(loaded.grid().m) +
                                  ") does not match $.grid");
            return loaded;
        }
        return shell_state(c.shells, g);
    }();
    if (c.dilation) S = dilate(S, *c.dilation);
    S.mode = c.mode;

    Prepared p{std::move(S), 0.0, std::numeric_limits<double>::quiet_NaN()};
    if (c.margin_over_critical) {
        p.kappa_star = critical_coupling(p.state);  // throws when no finite coupling exists
        p.kappa = p.kappa_star * (1.0 + *c.margin_over_critical);
    } else {
        p.kappa = *c.kappa;
        if (c.mode != Mode::free_particle) {
            try {
                p.kappa_star = critical_coupling(p.state);
            } catch (const std::invalid_argument&) {
                // reporting only; explicit kappa does not need a finite critical value
            }
        }
    }
    p.state.kappa = p.kappa;
    return p;
}

double record_rhs(const ObservableRecord& r, Mode mode, double kappa) {
    switch (mode) {
        case Mode::hartree_fock: return 2.0 * r.T_p2 - kappa * r.D + kappa * r.X;
        case Mode::hartree: return 2.0 * r.T_p2 - kappa * r.D;
        case Mode::free_particle: return 2.0 * r.T_p2;
    }
    return 0.0;
}

struct RunOutputs {
    EvolveResult result;
    std::vector<ObservableRecord> records;
};

// Shared simulate/blowup pipeline: resolved config echo, CSV/JSON-lines
// streams, final-state container.
RunOutputs run_and_write(const SimConfig& cfg, const Prepared& prep) {
    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "resolved_config.json",
                    resolved_json(cfg).dump(2) + "\n");

    std::ofstream csv, jsonl;
    if (cfg.write_csv) {
        csv.open(fs::path(cfg.out_dir) / "observables.csv", std::ios::binary | std::ios::trunc);
        if (!csv) throw std::runtime_error("cannot open observables.csv for writing");
        csv << "# prhf-observables-v1\n" << csv_header(cfg.conc_radii.size()) << "\n";
    }
    if (cfg.write_jsonl) {
        jsonl.open(fs::path(cfg.out_dir) / "records.jsonl", std::ios::binary | std::ios::trunc);
        if (!jsonl) throw std::runtime_error("cannot open records.jsonl for writing");
    }

    RunOutputs out;
    auto sink = [&](const ObservableRecord& r) {
        out.records.push_back(r);
        if (csv.is_open()) csv << csv_row(r) << "\n";
        if (jsonl.is_open()) jsonl << json_line(r) << "\n";
    };
    out.result = evolve(prep.state, cfg.integrator, sink);
    if (csv.is_open()) csv.flush();
    if (jsonl.is_open()) jsonl.flush();
    save_orbitals(out.result.state, (fs::path(cfg.out_dir) / "final.orb").string());
    return out;
}

json drift_summary(const std::vector<ObservableRecord>& recs, Mode mode, double kappa) {
    json d;
    if (recs.empty()) return d;
    const ObservableRecord& r0 = recs.front();
    double dE = 0.0, dN = 0.0, dL2 = 0.0, gram = 0.0, viol = 0.0, gap_rel = 0.0;
    for (const ObservableRecord& r : recs) {
        dE = std::max(dE, std::abs(r.E_hf - r0.E_hf));
        dN = std::max(dN, std::abs(r.N - r0.N));
        dL2 = std::max(dL2, std::abs(r.L2 - r0.L2));
        gram = std::max(gram, r.gram_drift);
        const double rhs = record_rhs(r, mode, kappa);
        viol = std::max(viol, rhs - 2.0 * r.E_hf);
        const double gap_a = 2.0 * r.E_hf - rhs;          // energy route
        const double gap_b = 2.0 * (r.T - r.T_p2);        // kinetic route
        const double scale = std::max({std::abs(gap_a), std::abs(gap_b), 1e-30});
        gap_rel = std::max(gap_rel, std::abs(gap_a - gap_b) / scale);
    }
    d["E_drift_abs"] = dE;
    d["E_drift_rel"] = dE / std::max(std::abs(r0.E_hf), 1e-30);
    d["N_drift_rel"] = dN / std::max(r0.N, 1e-30);
    d["L2_drift_abs"] = dL2;
    d["L2_drift_rel"] = dL2 / std::max(std::abs(r0.L2), 1.0);
    d["gram_drift_max"] = gram;
    d["virial_violation_max"] = viol;  // positive part of rhs - 2 E_hf
    d["virial_gap_route_mismatch_rel"] = gap_rel;
    return d;
}

int cmd_simulate(const SimConfig& cfg) {
    const Prepared prep = build_initial_state(cfg);
    const RunOutputs out = run_and_write(cfg, prep);

    json summary;
    summary["command"] = "simulate";
    summary["status"] = run_status_name(out.result.status);
    summary["t_final"] = out.result.state.t;
    summary["last_trusted_t"] = out.result.last_trusted_t;
    summary["steps_taken"] = out.result.steps_taken;
    summary["kappa"] = prep.kappa;
    if (std::isfinite(prep.kappa_star)) summary["kappa_star"] = prep.kappa_star;
    summary["drifts"] = drift_summary(out.records, cfg.mode, prep.kappa);
    write_text_file(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");

    std::printf("status: %s  t_final=%.6g  last_trusted_t=%.6g  samples=%zu\n",
                run_status_name(out.result.status).c_str(), out.result.state.t,
                out.result.last_trusted_t, out.records.size());
    return out.result.status == RunStatus::drift_exceeded ? 1 : 0;
}

int cmd_blowup(const SimConfig& cfg) {
    if (!cfg.margin_over_critical)
        throw ConfigError("blowup: config must set $.physics.margin_over_critical > 0");
    if (!cfg.container.empty())
        throw ConfigError("blowup: config must use $.initial.shells (not a container)");

    const Prepared prep = build_initial_state(cfg);
    const double E0 = energy(prep.state).E_hf;
    if (!(E0 < 0.0))
        throw ConfigError("blowup: hypothesis E_hf < 0 unmet (E_hf = " + std::to_string(E0) +
                          " at kappa = " + std::to_string(prep.kappa) + ")");

    const RunOutputs out = run_and_write(cfg, prep);
    const std::vector<ObservableRecord>& recs = out.records;

    // records inside the trusted window
    std::vector<const ObservableRecord*> tw;
    for (const ObservableRecord& r : recs)
        if (r.t <= out.result.last_trusted_t + 1e-12) tw.push_back(&r);

    json summary;
    summary["command"] = "blowup";
    summary["status"] = run_status_name(out.result.status);
    summary["kappa"] = prep.kappa;
    summary["kappa_star"] = prep.kappa_star;
    summary["E_hf"] = E0;
    summary["last_trusted_t"] = out.result.last_trusted_t;
    summary["t_final"] = out.result.state.t;
    summary["trusted_samples"] = tw.size();
    summary["drifts"] = drift_summary(recs, cfg.mode, prep.kappa);

    bool all_pass = true;
    auto assert_item = [&](const char* name, bool ok, json detail) {
        detail["pass"] = ok;
        summary["assertions"][name] = detail;
        std::printf("%s  blowup assertion %s\n", ok ? "PASS" : "FAIL", name);
        all_pass = all_pass && ok;
    };

    // (0) the run must actually indicate blow-up in finite time
    assert_item("terminates-blow-up-indicated",
                out.result.status == RunStatus::blow_up_indicated,
                {{"status", run_status_name(out.result.status)}});

    if (tw.size() < 5) {
        assert_item("trusted-window-populated", false,
                    {{"trusted_samples", tw.size()}, {"needed", 5}});
        write_text_file(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");
        return 1;
    }

    // (i) virial inequality at every trusted sample
    double viol = -1e300;
    for (const ObservableRecord* r : tw)
        viol = std::max(viol, record_rhs(*r, cfg.mode, prep.kappa) - 2.0 * r->E_hf);
    const double tol_i = 1e-8 * std::max(1.0, 2.0 * std::abs(E0));
    assert_item("virial-inequality", viol <= tol_i,
                {{"max_violation", viol}, {"tolerance", tol_i}});

    // centered differences on the uniformly spaced interior of the window
    auto centered = [&](auto getter) {
        std::vector<std::pair<std::size_t, double>> out_d;
        for (std::size_t k = 1; k + 1 < tw.size(); ++k) {
            const double dp = tw[k + 1]->t - tw[k]->t, dm = tw[k]->t - tw[k - 1]->t;
            if (std::abs(dp - dm) > 1e-9 * std::max(dp, dm)) continue;
            out_d.push_back({k, (getter(*tw[k + 1]) - getter(*tw[k - 1])) / (dp + dm)});
        }
        return out_d;
    };

    // (ii) d/dt A_dil tracks the virial rhs
    double rhs_scale = 1.0, resid_ii = 0.0;
    for (const ObservableRecord* r : tw)
        rhs_scale = std::max(rhs_scale, std::abs(record_rhs(*r, cfg.mode, prep.kappa)));
    for (const auto& [k, dAdt] : centered([](const ObservableRecord& r) { return r.A_dil; }))
        resid_ii = std::max(resid_ii,
                            std::abs(dAdt - record_rhs(*tw[k], cfg.mode, prep.kappa)));
    assert_item("dilation-derivative-identity", resid_ii <= 0.05 * rhs_scale,
                {{"max_residual", resid_ii}, {"rhs_scale", rhs_scale}});

    // (iii) quadratic bound with the correction constant measured on the run:
    // C_hat = sup |d/dt M_vir - A_dil|, then
    // M_vir(t) <= t^2 E + t (A_dil(0) + C_hat) + M_vir(0).
    double c_hat = 0.0;
    for (const auto& [k, dMdt] : centered([](const ObservableRecord& r) { return r.M_vir; }))
        c_hat = std::max(c_hat, std::abs(dMdt - tw[k]->A_dil));
    const double M0 = tw.front()->M_vir, A0 = tw.front()->A_dil, t0 = tw.front()->t;
    double excess = -1e300;
    for (const ObservableRecord* r : tw) {
        const double t = r->t - t0;
        const double bound = t * t * E0 + t * (A0 + c_hat) + M0;
        excess = std::max(excess, r->M_vir - bound);
    }
    const double tol_iii = 1e-6 * std::max(1.0, std::abs(M0));
    assert_item("quadratic-bound", excess <= tol_iii,
                {{"C_hat", c_hat}, {"max_excess", excess}, {"tolerance", tol_iii}});
    summary["C_hat"] = c_hat;

    // quadratic least-squares fit of M_vir over the trusted window, reported
    {
        Eigen::MatrixXd Afit(tw.size(), 3);
        Eigen::VectorXd b(tw.size());
        for (std::size_t k = 0; k < tw.size(); ++k) {
            const double t = tw[k]->t - t0;
            Afit(k, 0) = t * t;
            Afit(k, 1) = t;
            Afit(k, 2) = 1.0;
            b(k) = tw[k]->M_vir;
        }
        const Eigen::Vector3d coef = Afit.colPivHouseholderQr().solve(b);
        summary["M_vir_quadratic_fit"] = {{"t2", coef(0)}, {"t1", coef(1)}, {"t0", coef(2)}};
    }

    // (iv) sobolev_half monotone on the final quarter of the trusted window
    const double span = tw.back()->t - t0;
    const double q_start = tw.back()->t - 0.25 * span;
    bool monotone = true;
    double prev = -1e300;
    for (const ObservableRecord* r : tw) {
        if (r->t < q_start) continue;
        if (r->sobolev_half < prev * (1.0 - 1e-9)) monotone = false;
        prev = r->sobolev_half;
    }
    assert_item("sobolev-growth-final-quarter", monotone, {{"window_start", q_start}});

    // (v) concentration at the smallest configured radius increases
    const double conc0 = tw.front()->conc.empty() ? 0.0 : tw.front()->conc.front();
    const double conc1 = tw.back()->conc.empty() ? 0.0 : tw.back()->conc.front();
    assert_item("concentration-increase", conc1 > conc0 + 1e-12,
                {{"initial", conc0}, {"final", conc1}});

    summary["all_pass"] = all_pass;
    write_text_file(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");
    std::printf("blowup: %s  last_trusted_t=%.6g  C_hat=%.6g\n", all_pass ? "PASS" : "FAIL",
                out.result.last_trusted_t, c_hat);
    return all_pass ? 0 : 1;
}

int cmd_verify(const SimConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "resolved_config.json",
                    resolved_json(cfg).dump(2) + "\n");
    const Grid g = make_grid(cfg.n, cfg.L, cfg.m);

    json checks = json::array();
    bool all_pass = true;
    auto check = [&](const std::string& name, bool ok, json detail) {
        detail["name"] = name;
        detail["pass"] = ok;
        checks.push_back(detail);
        std::printf("%s  %s\n", ok ? "PASS" : "FAIL", name.c_str());
        all_pass = all_pass && ok;
    };

    // --- Newton's-law battery ---
    const double L = cfg.L;
    std::vector<RadialProfile> battery;
    {
        // flat core with a quintic-smoothstep edge; the grid cross-check needs
        // profiles smooth at the grid scale (a jump edge leaves an O(h)
        // dipole-layer error in the lattice sum that no sampling rule fixes)
        const double R = L / 8.0, d = L / 16.0;
        battery.push_back({"smoothed-ball",
                           [R, d](double r) {
                               if (r <= R - d) return 1.0;
                               if (r >= R + d) return 0.0;
                               const double t = (r - (R - d)) / (2.0 * d);
                               return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
                           },
                           R + d});
    }
    {
        const double s = L / 12.0;
        battery.push_back({"gaussian",
                           [s](double r) { return std::exp(-r * r / (2.0 * s * s)); }, L / 3.0});
    }
    {
        const double r0 = L / 8.0, w = L / 24.0;
        battery.push_back({"shell-annulus",
                           [r0, w](double r) {
                               const double u = (r - r0) / w;
                               return std::exp(-u * u);
                           },
                           L / 3.0});
    }
    {
        std::mt19937_64 rng(cfg.seed ^ 0x6e77746fULL);
        std::uniform_real_distribution<double> wdist(L / 20.0, L / 10.0);
        std::uniform_real_distribution<double> adist(0.5, 2.0);
        const double s1 = wdist(rng), s2 = wdist(rng), s3 = wdist(rng);
        const double a1 = adist(rng), a2 = adist(rng), a3 = adist(rng);
        battery.push_back({"gaussian-mixture",
                           [=](double r) {
                               return a1 * std::exp(-r * r / (2.0 * s1 * s1)) +
                                      a2 * std::exp(-r * r / (2.0 * s2 * s2)) +
                                      a3 * std::exp(-r * r / (2.0 * s3 * s3));
                           },
                           L / 3.0});
    }
    {
        const double s = L / 16.0;
        battery.push_back({"narrow-bump",
                           [s](double r) { return std::exp(-r * r / (2.0 * s * s)); }, L / 3.0});
    }
    const std::vector<double> radii = {L / 24.0, L / 12.0, L / 8.0, L / 6.0, L / 4.0, 0.4 * L};
    for (const RadialProfile& p : battery) {
        const NewtonReport rep = newton_check(p, radii, g);
        check("newton/" + p.name, rep.pass,
              {{"N", rep.N},
               {"worst_rV_margin", rep.worst_rV_margin},
               {"worst_r2dV_margin", rep.worst_r2dV_margin},
               {"grid_rel_err", rep.grid_rel_err}});
    }

    // --- sphere integral ---
    {
        const double four_pi = 4.0 * M_PI;
        const double v0 = sphere_integral(0.0);
        check("sphere/I0", std::abs(v0 - four_pi) <= 1e-10 * four_pi, {{"value", v0}});
        const double pinned = 4.0 * std::sqrt(2.0) * M_PI;
        const double v1 = sphere_integral(1.0);
        check("sphere/I1", std::abs(v1 - pinned) <= 1e-6 * pinned, {{"value", v1}});
        const double v100 = sphere_integral(100.0);
        check("sphere/decay", v100 <= 1e-2, {{"value", v100}});

        // route consistency at the documented 2^{3/2} ratio
        double worst = 0.0;
        for (double lam : {0.25, 0.5, 2.0, 4.0}) {
            const SphereIntegralValues v = sphere_integral_detail(lam);
            worst = std::max(worst,
                             std::abs(v.reduced - std::pow(2.0, 1.5) * v.surface) / v.reduced);
        }
        check("sphere/route-consistency", worst <= 1e-4, {{"worst_rel", worst}});

        const auto [sup1, arg1] = sup_sphere_integral(10.0, 200);
        const auto [sup2, arg2] = sup_sphere_integral(10.0, 400);
        check("sphere/sup-finite-near-1",
              std::isfinite(sup1) && std::abs(arg1 - 1.0) <= 0.25,
              {{"sup", sup1}, {"arg_lambda", arg1}});
        check("sphere/sup-refinement", std::abs(sup2 - sup1) <= 1e-3 * sup1,
              {{"sup_200", sup1}, {"sup_400", sup2}});

        // scan continuity after refinement, single route
        double max_jump = 0.0;
        double prev_val = -1.0;
        for (const auto& [lam, v] : sphere_scan(1e-3, 10.0, 200)) {
            (void)lam;
            if (prev_val > 0.0)
                max_jump = std::max(max_jump, std::abs(v - prev_val) / prev_val);
            prev_val = v;
        }
        check("sphere/scan-continuity", max_jump <= 0.05, {{"max_adjacent_jump", max_jump}});
    }

    // --- commutator norm ---
    {
        const Field fconst = sample(g, [](double, double, double) { return 1.0; });
        const CommutatorReport rc = commutator_norm_estimate(fconst, 8);
        check("commutator/constant", rc.sigma_max <= 1e-10, {{"sigma_max", rc.sigma_max}});

        // smooth periodic coordinate wave: gradient sup norm exactly 1 on-grid
        const double w = 2.0 * M_PI / g.L;
        const Field fwave = sample(g, [w](double x, double, double) { return std::sin(w * x) / w; });
        const CommutatorReport rw = commutator_norm_estimate(fwave, 60);
        bool mono = true;
        for (std::size_t i = 1; i < rw.rq_history.size(); ++i)
            if (rw.rq_history[i] < rw.rq_history[i - 1] * (1.0 - 1e-12)) mono = false;
        check("commutator/monotone-rayleigh", mono, {{"iterations", rw.iterations}});
        check("commutator/coordinate-wave", rw.ratio > 0.5 && rw.ratio < 1.0 + 1e-9,
              {{"sigma_max", rw.sigma_max}, {"grad_inf", rw.grad_inf}, {"ratio", rw.ratio}});

        double worst_ratio = 0.0;
        for (double s : {g.L / 6.0, g.L / 10.0, g.L / 16.0}) {
            const Field bump = sample(g, [s](double x, double y, double z) {
                return std::exp(-(x * x + y * y + z * z) / (2.0 * s * s));
            });
            const CommutatorReport rb = commutator_norm_estimate(bump, 60);
            worst_ratio = std::max(worst_ratio, rb.ratio);
        }
        check("commutator/bump-family", worst_ratio <= 2.0, {{"max_ratio", worst_ratio}});
    }

    // --- conservation and identity suite on a short trajectory ---
    {
        const Prepared prep = build_initial_state(cfg);
        IntegratorConfig icfg = cfg.integrator;
        icfg.t_end = std::min(icfg.t_end, prep.state.t + 50.0 * icfg.dt);
        icfg.sample_every = std::min(icfg.sample_every, 5);
        std::vector<ObservableRecord> recs;
        const EvolveResult res =
            evolve(prep.state, icfg, [&](const ObservableRecord& r) { recs.push_back(r); });
        const json d = drift_summary(recs, cfg.mode, prep.kappa);
        check("trajectory/completed", res.status == RunStatus::completed,
              {{"status", run_status_name(res.status)}});
        check("trajectory/gram-drift", d["gram_drift_max"].get<double>() <= icfg.drift_tol,
              {{"gram_drift_max", d["gram_drift_max"]}});
        check("trajectory/energy-conservation", d["E_drift_rel"].get<double>() <= 1e-7,
              {{"E_drift_rel", d["E_drift_rel"]}});
        check("trajectory/mass-conservation", d["N_drift_rel"].get<double>() <= 1e-9,
              {{"N_drift_rel", d["N_drift_rel"]}});
        if (!recs.empty() && recs.front().anisotropy <= 1e-6)
            check("trajectory/L2-conservation", d["L2_drift_rel"].get<double>() <= 1e-5,
                  {{"L2_drift_rel", d["L2_drift_rel"]}});
        check("trajectory/virial-inequality",
              d["virial_violation_max"].get<double>() <=
                  1e-8 * std::max(1.0, 2.0 * std::abs(recs.front().E_hf)),
              {{"virial_violation_max", d["virial_violation_max"]}});
        check("trajectory/virial-gap-route-identity",
              d["virial_gap_route_mismatch_rel"].get<double>() <= 1e-6,
              {{"mismatch_rel", d["virial_gap_route_mismatch_rel"]}});

        // centered-difference check of d/dt A_dil against the virial rhs
        double resid = 0.0, scale = 1.0;
        for (std::size_t k = 1; k + 1 < recs.size(); ++k) {
            const double dp = recs[k + 1].t - recs[k].t, dm = recs[k].t - recs[k - 1].t;
            if (std::abs(dp - dm) > 1e-9 * std::max(dp, dm)) continue;
            const double dAdt = (recs[k + 1].A_dil - recs[k - 1].A_dil) / (dp + dm);
            resid = std::max(resid, std::abs(dAdt - record_rhs(recs[k], cfg.mode, prep.kappa)));
            scale = std::max(scale, std::abs(record_rhs(recs[k], cfg.mode, prep.kappa)));
        }
        check("trajectory/dilation-derivative", resid <= 1e-2 * scale,
              {{"max_residual", resid}, {"rhs_scale", scale}});
    }

    json report;
    report["command"] = "verify";
    report["checks"] = checks;
    report["all_pass"] = all_pass;
    write_text_file(fs::path(cfg.out_dir) / "verify_report.json", report.dump(2) + "\n");
    std::printf("verify: %s (%zu checks)\n", all_pass ? "PASS" : "FAIL", checks.size());
    return all_pass ? 0 : 1;
}

int cmd_make_initial(const SimConfig& cfg) {
    const Prepared prep = build_initial_state(cfg);
    const HypothesisChecklist hc = hypothesis_checklist(prep.state);

    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "resolved_config.json",
                    resolved_json(cfg).dump(2) + "\n");
    save_orbitals(prep.state, (fs::path(cfg.out_dir) / "initial.orb").string());

    json summary;
    summary["command"] = "make-initial";
    summary["N"] = prep.state.N();
    summary["kappa"] = prep.kappa;
    if (std::isfinite(prep.kappa_star)) summary["kappa_star"] = prep.kappa_star;
    summary["checklist"] = {{"E_hf", hc.E_hf},         {"anisotropy", hc.anisotropy},
                            {"L2", hc.L2},             {"tr_x4", hc.tr_x4},
                            {"tr_laplacian", hc.tr_lap}, {"all_pass", hc.all_pass}};
    write_text_file(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");

    if (std::isfinite(prep.kappa_star))
        std::printf("kappa_star = %.12g\n", prep.kappa_star);
    else
        std::printf("kappa_star = (none)\n");
    std::printf("kappa      = %.12g\n", prep.kappa);
    std::printf("E_hf       = %.12g\n", hc.E_hf);
    std::printf("L2         = %.12g\n", hc.L2);
    std::printf("N          = %d\n", prep.state.N());
    std::printf("checklist  = %s\n", hc.all_pass ? "all-pass" : "FAIL");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-relativistic Hartree-Fock spectral simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "prhf 1.0.0");

    Args args;
    CLI::App* c_sim = app.add_subcommand("simulate", "evolve a configured state");
    CLI::App* c_blow = app.add_subcommand("blowup", "run the collapse experiment");
    CLI::App* c_ver = app.add_subcommand("verify", "run the estimate verification battery");
    CLI::App* c_mk = app.add_subcommand("make-initial", "build and save initial data");
    const CommonOpts o_sim = add_common_options(c_sim, args);
    const CommonOpts o_blow = add_common_options(c_blow, args);
    const CommonOpts o_ver = add_common_options(c_ver, args);
    const CommonOpts o_mk = add_common_options(c_mk, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help / --version
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad invocation is a configuration error
    }

    try {
        if (app.got_subcommand(c_sim)) return cmd_simulate(resolve_config(args, o_sim));
        if (app.got_subcommand(c_blow)) return cmd_blowup(resolve_config(args, o_blow));
        if (app.got_subcommand(c_ver)) return cmd_verify(resolve_config(args, o_ver));
        if (app.got_subcommand(c_mk)) return cmd_make_initial(resolve_config(args, o_mk));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
