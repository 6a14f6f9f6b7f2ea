#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "prhf/integrator.hpp"

using namespace prhf;
using Catch::Approx;

namespace {

// normalized single harmonic along z with integer frequency fz
OrbitalSet single_mode(const Grid& g, int fz, Mode mode) {
    Field f(g);
    const double a = 1.0 / std::sqrt(g.L * g.L * g.L);
    const double k = fz * 2.0 * M_PI / g.L;
    for (int iz = 0; iz < g.n; ++iz) {
        const cxd v = std::polar(a, k * g.coord(iz));
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy) f(ix, iy, iz) = v;
    }
    return OrbitalSet{{f}, 0.0, 0.0, mode};
}

cxd rk4_polynomial(cxd z) {
    return cxd(1.0) + z + 0.5 * z * z + z * z * z / 6.0 + z * z * z * z / 24.0;
}

}  // namespace

TEST_CASE("one step on a single mode is the RK4 stability polynomial", "[integrator]") {
    const Grid g = make_grid(16, 16.0, 1.0);
    const int fz = 2;
    const OrbitalSet S = single_mode(g, fz, Mode::free_particle);
    const double k = fz * 2.0 * M_PI / g.L;
    const double w = std::sqrt(k * k + g.m * g.m);

    const double dt = 0.1;
    const OrbitalSet out = rk4_step(S, dt);
    REQUIRE(out.t == Approx(dt));

    const cxd R = rk4_polynomial(cxd(0.0, -w * dt));
    double worst = 0.0;
    for (std::size_t p = 0; p < S.orbitals[0].size(); ++p)
        worst = std::max(worst, std::abs(out.orbitals[0].data[p] - R * S.orbitals[0].data[p]));
    REQUIRE(worst < 1e-15);
}

TEST_CASE("one-step defect against the exact propagator is the fifth-order term", "[integrator]") {
    const Grid g = make_grid(16, 16.0, 1.0);
    const int fz = 2;
    const OrbitalSet S = single_mode(g, fz, Mode::free_particle);
    const double k = fz * 2.0 * M_PI / g.L;
    const double w = std::sqrt(k * k + g.m * g.m);

    const double dt = 0.1;
    const OrbitalSet out = rk4_step(S, dt);
    const Field exact = free_propagate(S.orbitals[0], dt);
    const double measured = testutil::max_abs_diff(out.orbitals[0], exact);

    const cxd z(0.0, -w * dt);
    const double amp = 1.0 / std::sqrt(g.L * g.L * g.L);
    const double theory = std::abs(rk4_polynomial(z) - std::exp(z)) * amp;
    REQUIRE(measured == Approx(theory).epsilon(1e-9));
    // and the defect really is O(|z|^5/120)
    REQUIRE(theory == Approx(std::pow(w * dt, 5) / 120.0 * amp).epsilon(0.05));
}

TEST_CASE("step-halving shows fifth-order local error on an interacting state", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    const OrbitalSet S = testutil::gaussian_set(g, {1.0, 1.4}, 0.9, Mode::hartree_fock);
    const double dt = 0.05;

    const OrbitalSet s1 = rk4_step(S, dt);
    const OrbitalSet s2 = rk4_step(rk4_step(S, 0.5 * dt), 0.5 * dt);
    OrbitalSet ref = S;
    for (int i = 0; i < 4; ++i) ref = rk4_step(ref, 0.25 * dt);

    const double e1 = testutil::max_abs_diff(s1, ref);
    const double e2 = testutil::max_abs_diff(s2, ref);
    REQUIRE(e2 > 1e-13);  // above round-off, so the ratio is meaningful
    // local error C*dt^5: e1 ~ C(1-1/256), e2 ~ C(1/16-1/256): ratio 17
    REQUIRE(e1 / e2 > 12.0);
    REQUIRE(e1 / e2 < 22.0);
}

TEST_CASE("free evolution conserves norm and energy at small phase angles", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    OrbitalSet S{{testutil::gaussian_orbital(g, 1.5)}, 0.0, 0.0, Mode::free_particle};

    IntegratorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 0.1;
    cfg.sample_every = 4;
    std::vector<ObservableRecord> recs;
    const EvolveResult res = evolve(S, cfg, [&](const ObservableRecord& r) { recs.push_back(r); });

    REQUIRE(res.status == RunStatus::completed);
    REQUIRE(res.steps_taken == 20);
    REQUIRE(recs.size() == 6);  // t0 + steps 4,8,12,16,20
    REQUIRE(recs.back().t == Approx(0.1).margin(1e-12));
    REQUIRE(res.last_trusted_t == Approx(0.1).margin(1e-12));
    REQUIRE(res.state.t == Approx(0.1).margin(1e-12));

    for (const ObservableRecord& r : recs) {
        REQUIRE(std::abs(r.N - recs.front().N) < 1e-12);
        REQUIRE(std::abs(r.E_hf - recs.front().E_hf) < 1e-10);
    }
}

TEST_CASE("resolution monitor flags tails and growth", "[integrator]") {
    const Grid g = make_grid(16, 8.0, 1.0);

    SECTION("well-resolved state: clean report") {
        OrbitalSet S{{testutil::gaussian_orbital(g, 1.6)}, 0.0, 0.0, Mode::free_particle};
        const ResolutionReport r = resolution_monitor(S);
        REQUIRE(r.tail_frac < 1e-12);
        REQUIRE_FALSE(r.hint);
    }
    SECTION("unresolvable width: tail hint fires") {
        OrbitalSet S{{testutil::gaussian_orbital(g, 0.3)}, 0.0, 0.0, Mode::free_particle};
        const ResolutionReport r = resolution_monitor(S);
        REQUIRE(r.tail_frac > 1e-3);
        REQUIRE(r.hint);
    }
    SECTION("sobolev growth hint against a reference") {
        OrbitalSet S{{testutil::gaussian_orbital(g, 1.6)}, 0.0, 0.0, Mode::free_particle};
        const ResolutionReport r = resolution_monitor(S);
        REQUIRE_FALSE(resolution_monitor(S, 1e-3, r.sobolev_half, 10.0).hint);
        REQUIRE(resolution_monitor(S, 1e-3, r.sobolev_half / 20.0, 10.0).hint);
    }
    SECTION("single harmonic has sobolev norm sqrt(1+k^2)") {
        const int fz = 3;
        const OrbitalSet S = single_mode(g, fz, Mode::free_particle);
        const double k = fz * 2.0 * M_PI / g.L;
        const ResolutionReport r = resolution_monitor(S);
        REQUIRE(r.sobolev_half == Approx(std::sqrt(1.0 + k * k)).epsilon(1e-12));
    }
}

TEST_CASE("evolve classifies an under-resolved initial state immediately", "[integrator]") {
    const Grid g = make_grid(16, 8.0, 1.0);
    OrbitalSet S{{testutil::gaussian_orbital(g, 0.3)}, 0.0, 0.0, Mode::free_particle};
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 1.0;
    int n_records = 0;
    const EvolveResult res = evolve(S, cfg, [&](const ObservableRecord&) { ++n_records; });
    REQUIRE(res.status == RunStatus::blow_up_indicated);
    REQUIRE(res.steps_taken == 0);
    REQUIRE(n_records == 1);
}

TEST_CASE("evolve reports gram-drift termination on an exploding run", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    OrbitalSet S{{testutil::gaussian_orbital(g, 1.3)}, 8.0, 0.0, Mode::hartree};
    IntegratorConfig cfg;
    cfg.dt = 5.0;  // wildly unstable step
    cfg.t_end = 50.0;
    cfg.sample_every = 1;
    const EvolveResult res = evolve(S, cfg, nullptr);
    REQUIRE(res.status != RunStatus::completed);
    REQUIRE(res.steps_taken >= 1);
}

TEST_CASE("optional re-orthonormalization keeps the gram matrix at identity", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    const OrbitalSet S = testutil::gaussian_set(g, {1.0, 1.4}, 0.9, Mode::hartree_fock);
    IntegratorConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 0.2;
    cfg.relowdin = true;
    const EvolveResult res = evolve(S, cfg, nullptr);
    REQUIRE(res.status == RunStatus::completed);
    REQUIRE(gram_drift(res.state) < 1e-12);
}

TEST_CASE("record streams are bit-identical across reruns in one process", "[integrator][determinism]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    const OrbitalSet S = testutil::gaussian_set(g, {1.0, 1.4}, 0.9, Mode::hartree);
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.1;
    cfg.sample_every = 2;
    cfg.radii = {1.0, 2.0};

    auto run = [&]() {
        std::string all;
        evolve(S, cfg, [&](const ObservableRecord& r) { all += csv_row(r); });
        return all;
    };
    const std::string a = run();
    const std::string b = run();
    REQUIRE(a == b);
    REQUIRE_FALSE(a.empty());
}

TEST_CASE("configuration and step validation", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    const OrbitalSet S = testutil::gaussian_set(g, {1.0}, 0.0, Mode::free_particle);
    REQUIRE_THROWS_AS(rk4_step(S, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rk4_step(S, -0.1), std::invalid_argument);

    IntegratorConfig bad;
    bad.dt = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.dt = 1e-3;
    bad.sample_every = 0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.sample_every = 1;
    bad.tail_frac_max = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("single-orbital trajectory matches the exact propagator", "[integrator]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    OrbitalSet S{{testutil::gaussian_orbital(g, 1.3)}, 10.0, 0.0, Mode::hartree_fock};
    OrbitalSet cur = S;
    const double dt = 0.01;
    for (int i = 0; i < 20; ++i) cur = rk4_step(cur, dt);
    const Field exact = free_propagate(S.orbitals[0], 20 * dt);
    Field diff = cur.orbitals[0];
    axpy(cxd(-1.0, 0.0), exact, diff);
    REQUIRE(norm(diff) < 1e-8);
}
