#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "helpers.hpp"
#include "prhf/lemma_verify.hpp"

using namespace prhf;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

RadialProfile uniform_ball(double R, double rho0) {
    RadialProfile p;
    p.name = "ball";
    p.r_max = R;
    p.rho = [rho0](double) { return rho0; };
    return p;
}

RadialProfile gaussian_profile(double N, double sigma, double r_max) {
    RadialProfile p;
    p.name = "gaussian";
    p.r_max = r_max;
    const double c = N / std::pow(2.0 * M_PI * sigma * sigma, 1.5);
    p.rho = [c, sigma](double r) { return c * std::exp(-r * r / (2.0 * sigma * sigma)); };
    return p;
}

}  // namespace

TEST_CASE("quadrature wrapper on closed forms", "[lemma]") {
    REQUIRE(integrate_qags([](double x) { return x * x; }, 0.0, 1.0) ==
            Approx(1.0 / 3.0).epsilon(1e-13));
    REQUIRE(integrate_qags([](double x) { return std::sin(x); }, 0.0, M_PI) ==
            Approx(2.0).epsilon(1e-12));
}

TEST_CASE("radial potential closed forms", "[lemma][newton]") {
    SECTION("uniform ball") {
        const double R = 2.0, rho0 = 0.3;
        const RadialProfile p = uniform_ball(R, rho0);
        const double N = 4.0 / 3.0 * M_PI * R * R * R * rho0;
        REQUIRE(radial_inner_mass(p, R) == Approx(N).epsilon(1e-11));
        REQUIRE(radial_inner_mass(p, R / 2) == Approx(N / 8.0).epsilon(1e-11));
        REQUIRE(radial_inner_mass(p, 10.0 * R) == Approx(N).epsilon(1e-11));

        auto v_in = [&](double r) { return 2.0 * M_PI * rho0 * (R * R - r * r / 3.0); };
        REQUIRE(radial_potential(p, 0.0) == Approx(v_in(0.0)).epsilon(1e-10));
        REQUIRE(radial_potential(p, 1.0) == Approx(v_in(1.0)).epsilon(1e-10));
        REQUIRE(radial_potential(p, R) == Approx(N / R).epsilon(1e-10));
        REQUIRE(radial_potential(p, 3.0) == Approx(N / 3.0).epsilon(1e-10));
    }
    SECTION("gaussian: V = N erf(r / sqrt(2) sigma) / r") {
        const double N = 2.5, sigma = 1.0;
        const RadialProfile p = gaussian_profile(N, sigma, 8.0 * sigma);
        REQUIRE(radial_potential(p, 0.0) ==
                Approx(N * std::sqrt(2.0 / M_PI) / sigma).epsilon(1e-9));
        for (double r : {0.7, 1.0, 2.0, 4.0})
            REQUIRE(radial_potential(p, r) ==
                    Approx(N * std::erf(r / (std::sqrt(2.0) * sigma)) / r).epsilon(1e-9));
    }
    SECTION("linear ramp through the tabulated path") {
        const double R = 2.0, rho0 = 0.5;
        const RadialProfile p = make_tabulated_profile(
            "ramp", {0.0, 0.5 * R, R}, {rho0, 0.5 * rho0, 0.0});
        auto v = [&](double r) {
            return 4.0 * M_PI * rho0 * (R * R / 6.0 - r * r / 6.0 + r * r * r / (12.0 * R));
        };
        for (double r : {0.0, 0.6, 1.3, 2.0})
            REQUIRE(radial_potential(p, r) == Approx(v(r)).epsilon(1e-9));
    }
}

TEST_CASE("tabulated profile validation", "[lemma][newton]") {
    REQUIRE_THROWS_WITH(make_tabulated_profile("x", {0.0}, {1.0}),
                        ContainsSubstring("size >= 2"));
    REQUIRE_THROWS_WITH(make_tabulated_profile("x", {0.0, 1.0}, {1.0}),
                        ContainsSubstring("matching"));
    REQUIRE_THROWS_WITH(make_tabulated_profile("x", {0.0, 1.0, 1.0}, {1.0, 0.5, 0.2}),
                        ContainsSubstring("strictly increasing"));
}

TEST_CASE("newton bound check on a contained gaussian", "[lemma][newton]") {
    const Grid g = make_grid(32, 16.0, 1.0);
    const RadialProfile p = gaussian_profile(3.0, 0.9, 7.1);
    const std::vector<double> radii{0.5, 1.0, 2.0, 3.0, 4.5};
    const NewtonReport rep = newton_check(p, radii, g);

    REQUIRE(rep.N == Approx(3.0).epsilon(1e-9));
    REQUIRE(rep.samples.size() == radii.size());
    // r V <= N and r^2 |V'| <= N hold strictly for any non-negative density
    REQUIRE(rep.worst_rV_margin >= -1e-8);
    REQUIRE(rep.worst_r2dV_margin >= -1e-8);
    REQUIRE(rep.grid_rel_err <= 1e-3);
    REQUIRE(rep.pass);

    for (const NewtonSample& s : rep.samples) {
        REQUIRE(s.V == Approx(radial_potential(p, s.r)).epsilon(1e-12));
        if (s.r > 0.0)
            REQUIRE(s.dV == Approx(-radial_inner_mass(p, s.r) / (s.r * s.r)).epsilon(1e-12));
    }
}

TEST_CASE("newton grid cross-check converges under refinement", "[lemma][newton]") {
    const RadialProfile p = gaussian_profile(3.0, 0.9, 7.1);
    const std::vector<double> radii{0.5, 1.0, 2.0, 3.0};
    const NewtonReport r24 = newton_check(p, radii, make_grid(24, 16.0, 1.0));
    const NewtonReport r48 = newton_check(p, radii, make_grid(48, 16.0, 1.0));
    REQUIRE(r48.grid_rel_err < r24.grid_rel_err / 3.0);  // at least ~2nd order
    REQUIRE(r48.grid_rel_err < 1e-3);
}

TEST_CASE("newton check validation", "[lemma][newton]") {
    const Grid g = make_grid(24, 16.0, 1.0);
    RadialProfile p = uniform_ball(2.0, 0.1);

    p.r_max = 0.0;
    REQUIRE_THROWS_WITH(newton_check(p, {1.0}, g), ContainsSubstring("r_max > 0"));
    p.r_max = 8.0;  // > 0.45 L
    REQUIRE_THROWS_WITH(newton_check(p, {1.0}, g), ContainsSubstring("exceeds the box"));
    p.r_max = 2.0;
    REQUIRE_THROWS_WITH(newton_check(p, {-1.0}, g), ContainsSubstring("negative sample radius"));
    p.rho = [](double) { return 0.0; };
    REQUIRE_THROWS_WITH(newton_check(p, {1.0}, g), ContainsSubstring("no mass"));
}

TEST_CASE("radiality gate", "[lemma][newton]") {
    const Grid g = make_grid(24, 12.0, 1.0);
    const Field radial = sample(g, [](double x, double y, double z) {
        return std::exp(-(x * x + y * y + z * z) / 3.0);
    });
    REQUIRE_NOTHROW(require_radial(radial));

    const Field pz = sample(g, [](double x, double y, double z) {
        return z * z * std::exp(-(x * x + y * y + z * z) / 3.0);
    });
    REQUIRE_THROWS_WITH(require_radial(pz), ContainsSubstring("not radial"));
}

TEST_CASE("sphere integral closed forms", "[lemma][sphere]") {
    const double I0 = 4.0 * M_PI;

    SECTION("lambda = 0 gives exactly the sphere area") {
        REQUIRE(sphere_integral(0.0) == Approx(I0).epsilon(1e-12));
    }
    SECTION("inside: the surface integral is flat at 4 pi") {
        for (double lam : {0.2, 0.5, 0.8})
            REQUIRE(sphere_integral_detail(lam).surface == Approx(I0).epsilon(1e-10));
    }
    SECTION("outside: 4 pi (lambda - sqrt(lambda^2 - 1)) / lambda") {
        for (double lam : {1.5, 2.0, 4.0})
            REQUIRE(sphere_integral_detail(lam).surface ==
                    Approx(I0 * (lam - std::sqrt(lam * lam - 1.0)) / lam).epsilon(1e-9));
    }
    SECTION("the conventional reduction carries the 2^{3/2} factor") {
        for (double lam : {0.5, 2.0})
            REQUIRE(sphere_integral_detail(lam).reduced ==
                    Approx(std::pow(2.0, 1.5) * sphere_integral_detail(lam).surface)
                        .epsilon(1e-8));
    }
    SECTION("coincidence point lambda = 1") {
        REQUIRE(sphere_integral(1.0) == Approx(4.0 * std::sqrt(2.0) * M_PI).epsilon(1e-10));
    }
    SECTION("routing switches to the reduced form near lambda = 1") {
        const SphereIntegralValues a = sphere_integral_detail(0.95);
        REQUIRE(sphere_integral(0.95) == a.reduced);
        const SphereIntegralValues b = sphere_integral_detail(0.5);
        REQUIRE(sphere_integral(0.5) == b.surface);
    }
    SECTION("negative lambda rejected") {
        REQUIRE_THROWS_AS(sphere_integral(-0.1), std::invalid_argument);
    }
}

TEST_CASE("sphere scan and supremum", "[lemma][sphere]") {
    SECTION("scan validation") {
        REQUIRE_THROWS_AS(sphere_scan(0.0, 1.0, 10), std::invalid_argument);
        REQUIRE_THROWS_AS(sphere_scan(2.0, 1.0, 10), std::invalid_argument);
        REQUIRE_THROWS_AS(sphere_scan(0.1, 1.0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(sup_sphere_integral(-1.0, 10), std::invalid_argument);
    }
    SECTION("refined scan has no large jumps left") {
        const auto pts = sphere_scan(0.2, 3.0, 25);
        REQUIRE(pts.size() >= 25);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double jump = std::abs(pts[i].second - pts[i - 1].second) /
                                std::min(std::abs(pts[i].second), std::abs(pts[i - 1].second));
            const bool tiny_gap = pts[i].first / pts[i - 1].first < 1.0 + 3.1e-6;
            REQUIRE((jump <= 0.026 || tiny_gap));
        }
        for (const auto& [lam, v] : pts) {
            REQUIRE(std::isfinite(v));
            REQUIRE(v > 0.0);
        }
    }
    SECTION("supremum sits on the inner plateau at 8 sqrt(2) pi") {
        const auto [sup, arg] = sup_sphere_integral(4.0, 60);
        REQUIRE(sup == Approx(8.0 * std::sqrt(2.0) * M_PI).epsilon(1e-6));
        REQUIRE(arg >= 0.9);
        REQUIRE(arg <= 1.0 + 1e-3);
    }
    SECTION("lambda_max = 0 degenerates to the area") {
        const auto [sup, arg] = sup_sphere_integral(0.0, 10);
        REQUIRE(sup == Approx(4.0 * M_PI).epsilon(1e-12));
        REQUIRE(arg == 0.0);
    }
    SECTION("far outside the integral decays") {
        REQUIRE(sphere_integral(6.0) < 0.5 * sphere_integral(0.5));
    }
}

TEST_CASE("commutator norm: exact fiber oracle for a sine wave", "[lemma][commutator]") {
    const int n = 16;
    const double L = 16.0;
    const Grid g = make_grid(n, L, 1.0);
    const Field f = sample(g, [L](double x, double, double) {
        return L / (2.0 * M_PI) * std::sin(2.0 * M_PI * x / L);
    });

    // f couples kx bins r -> r +- 1 only, so K = [sqrt(p^2+m^2), f] is block
    // cyclic-tridiagonal over each transverse (ky, kz) fiber; i K is Hermitian
    // and its extreme eigenvalue over all fibers is the exact sigma_max.
    auto kv = [&](int i) { return 2.0 * M_PI / L * (i < n / 2 ? i : i - n); };
    const cxd fp(0.0, L / (4.0 * M_PI)), fm(0.0, -L / (4.0 * M_PI));
    double oracle = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
            const double kt2 = kv(iy) * kv(iy) + kv(iz) * kv(iz);
            auto T = [&](int r) { return std::sqrt(kv(r) * kv(r) + kt2 + 1.0); };
            Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
            for (int r = 0; r < n; ++r) {
                const int cm = (r + n - 1) % n, cp = (r + 1) % n;
                K(r, cm) += fp * (T(r) - T(cm));
                K(r, cp) += fm * (T(r) - T(cp));
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cxd(0.0, 1.0) * K);
            oracle = std::max(oracle, es.eigenvalues().cwiseAbs().maxCoeff());
        }

    const CommutatorReport rep = commutator_norm_estimate(f, 400);
    REQUIRE(rep.grad_inf == Approx(1.0).margin(1e-12));
    REQUIRE(rep.sigma_max <= oracle * (1.0 + 1e-10));  // certified lower bound
    REQUIRE(rep.sigma_max >= oracle * (1.0 - 5e-3));

    for (std::size_t i = 1; i < rep.rq_history.size(); ++i)
        REQUIRE(rep.rq_history[i] >= rep.rq_history[i - 1] * (1.0 - 1e-12));
}

TEST_CASE("commutator norm: edge cases", "[lemma][commutator]") {
    const Grid g = make_grid(16, 12.0, 1.0);

    SECTION("constant f commutes") {
        Field c(g);
        for (cxd& v : c.data) v = cxd(3.5, 0.0);
        const CommutatorReport rep = commutator_norm_estimate(c, 30);
        REQUIRE(rep.sigma_max <= 1e-10);
        REQUIRE(rep.ratio == 0.0);
    }
    SECTION("deterministic restarts") {
        const Field f = sample(g, [](double x, double y, double) {
            return std::sin(2.0 * M_PI * x / 12.0) + 0.3 * std::cos(4.0 * M_PI * y / 12.0);
        });
        const CommutatorReport a = commutator_norm_estimate(f, 50);
        const CommutatorReport b = commutator_norm_estimate(f, 50);
        REQUIRE(a.sigma_max == b.sigma_max);
        REQUIRE(a.iterations == b.iterations);
    }
    SECTION("validation") {
        Field z(g);
        REQUIRE_THROWS_AS(commutator_norm_estimate(z, 0), std::invalid_argument);
        Field cplx(g);
        for (cxd& v : cplx.data) v = cxd(0.0, 1.0);
        REQUIRE_THROWS_WITH(commutator_norm_estimate(cplx, 10),
                            ContainsSubstring("must be real"));
    }
}
