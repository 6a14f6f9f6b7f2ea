#pragma once

// Shared builders for the test suite: deterministic pseudo-random fields and
// small hand-made orbital sets. The manual builders bypass the shell-spec
// resolution guards on purpose so coarse grids (n = 16) stay usable in fast
// tests; algebraic identities do not care about resolution.

#include <array>
#include <random>

#include "prhf/field.hpp"
#include "prhf/orbital_set.hpp"

namespace testutil {

using namespace prhf;

inline Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (cxd& v : f.data) v = cxd(u(rng), u(rng));
    return f;
}

// exp(-r^2/(2 sigma^2)) * exp(i p.x), normalized; p = 0 gives a real orbital.
inline Field gaussian_orbital(const Grid& g, double sigma,
                              std::array<double, 3> p = {0.0, 0.0, 0.0}) {
    Field f(g);
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const double y = g.coord(iy);
            for (int iz = 0; iz < g.n; ++iz) {
                const double z = g.coord(iz);
                const double r2 = x * x + y * y + z * z;
                const double amp = std::exp(-r2 / (2.0 * sigma * sigma));
                const double phase = p[0] * x + p[1] * y + p[2] * z;
                f.data[g.index(ix, iy, iz)] = std::polar(amp, phase);
            }
        }
    }
    scale(f, cxd(1.0 / norm(f), 0.0));
    return f;
}

// Loewdin-orthonormalized set of centered gaussians with distinct widths and
// mild plane-wave phases (complex-valued state).
inline OrbitalSet gaussian_set(const Grid& g, const std::vector<double>& sigmas, double kappa,
                               Mode mode, bool with_phases = true) {
    std::vector<Field> orbs;
    orbs.reserve(sigmas.size());
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
        const double a = with_phases ? 0.25 * static_cast<double>(j + 1) : 0.0;
        orbs.push_back(gaussian_orbital(g, sigmas[j], {a, -0.5 * a, 0.3 * a}));
    }
    OrbitalSet raw{std::move(orbs), kappa, 0.0, mode};
    return lowdin_orthonormalize(raw);
}

inline double max_abs_diff(const Field& a, const Field& b) {
    double worst = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        worst = std::max(worst, std::abs(a.data[p] - b.data[p]));
    return worst;
}

inline double max_abs(const Field& a) {
    double worst = 0.0;
    for (const cxd& v : a.data) worst = std::max(worst, std::abs(v));
    return worst;
}

inline double max_abs_diff(const OrbitalSet& a, const OrbitalSet& b) {
    double worst = 0.0;
    for (int j = 0; j < a.N(); ++j) worst = std::max(worst, max_abs_diff(a.orbitals[j], b.orbitals[j]));
    return worst;
}

}  // namespace testutil
