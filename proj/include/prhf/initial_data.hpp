#pragma once

// Construction of spherically symmetric orthonormal orbital sets: filled
// angular-momentum multiplets over radial envelopes, Loewdin-corrected, plus
// the L^2-preserving dilation and the closed-form coupling tuner.
//
// Orbitals are sampled as real solid harmonics times a radial profile, so no
// 1/r appears anywhere; filling all 2l+1 members of each shell makes the
// total density radial (Unsoeld) and commutes Q with rotations.

#include <string>
#include <vector>

#include "prhf/observables.hpp"
#include "prhf/orbital_set.hpp"

namespace prhf {

enum class ProfileKind {
    gaussian,               // exp(-r^2 / (2 sigma^2)), scale = sigma
    smoothed_exponential,   // exp(-sqrt(r^2 + (a/2)^2) / a), scale = a
    polynomial_gaussian,    // r^degree * exp(-r^2 / (2 sigma^2))
};

inline std::string profile_name(ProfileKind k) {
    switch (k) {
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::smoothed_exponential: return "exponential";
        case ProfileKind::polynomial_gaussian: return "polynomial-gaussian";
    }
    return "?";
}

inline ProfileKind profile_from_name(const std::string& s) {
    if (s == "gaussian") return ProfileKind::gaussian;
    if (s == "exponential") return ProfileKind::smoothed_exponential;
    if (s == "polynomial-gaussian") return ProfileKind::polynomial_gaussian;
    throw std::invalid_argument("unknown radial profile '" + s +
                                "' (expected gaussian, exponential or polynomial-gaussian)");
}

struct Shell {
    int l = 0;                                   // fills all 2l+1 m values
    ProfileKind kind = ProfileKind::gaussian;
    double scale = 1.0;                          // sigma or a, in length units
    int degree = 0;                              // polynomial-gaussian only
};

struct ShellSpec {
    std::vector<Shell> shells;

    int orbital_count() const {
        int N = 0;
        for (const Shell& s : shells) N += 2 * s.l + 1;
        return N;
    }
};

namespace detail {

inline double radial_profile(const Shell& shell, double r2) {
    switch (shell.kind) {
        case ProfileKind::gaussian:
            return std::exp(-r2 / (2.0 * shell.scale * shell.scale));
        case ProfileKind::smoothed_exponential: {
            const double s = 0.5 * shell.scale;
            return std::exp(-std::sqrt(r2 + s * s) / shell.scale);
        }
        case ProfileKind::polynomial_gaussian: {
            double p = 1.0;
            const double r = std::sqrt(r2);
            for (int d = 0; d < shell.degree; ++d) p *= r;
            return p * std::exp(-r2 / (2.0 * shell.scale * shell.scale));
        }
    }
    return 0.0;
}

// Real solid harmonics of degree l (constants dropped: Loewdin renormalizes).
inline double solid_harmonic(int l, int m, double x, double y, double z) {
    if (l == 0) return 1.0;
    if (l == 1) {
        switch (m) {
            case 0: return x;
            case 1: return y;
            default: return z;
        }
    }
    // l == 2
    switch (m) {
        case 0: return x * y;
        case 1: return y * z;
        case 2: return z * x;
        case 3: return x * x - y * y;
        default: return 2.0 * z * z - x * x - y * y;
    }
}

}  // namespace detail

inline OrbitalSet shell_state(const ShellSpec& spec, const Grid& g) {
    if (spec.shells.empty()) throw std::invalid_argument("shell_state: spec has no shells");
    const double h = g.h();
    for (const Shell& s : spec.shells) {
        if (s.l < 0 || s.l > 2)
            throw std::invalid_argument("shell_state: angular momentum l=" + std::to_string(s.l) +
                                        " out of the supported range 0..2");
        if (!(s.scale > 0.0))
            throw std::invalid_argument("shell_state: radial scale must be positive");
        if (s.kind == ProfileKind::polynomial_gaussian && (s.degree < 0 || s.degree > 8))
            throw std::invalid_argument("shell_state: polynomial degree out of range 0..8");
        if (s.scale < 4.0 * h)
            throw std::invalid_argument("shell_state: profile unresolvable: scale/h = " +
                                        std::to_string(s.scale / h) + " < 4");
        if (s.scale > g.L / 8.0)
            throw std::invalid_argument("shell_state: profile fills the box: scale/L = " +
                                        std::to_string(s.scale / g.L) + " > 1/8");
    }

    std::vector<Field> orbitals;
    orbitals.reserve(spec.orbital_count());
    for (const Shell& s : spec.shells)
        for (int m = 0; m < 2 * s.l + 1; ++m) {
            Field f = sample(g, [&](double x, double y, double z) {
                const double r2 = x * x + y * y + z * z;
                return detail::solid_harmonic(s.l, m, x, y, z) * detail::radial_profile(s, r2);
            });
            const double nf = norm(f);
            if (!(nf > 0.0)) throw std::runtime_error("shell_state: degenerate zero orbital");
            scale(f, cxd(1.0 / nf, 0.0));
            orbitals.push_back(std::move(f));
        }

    OrbitalSet raw{std::move(orbitals), 0.0, 0.0, Mode::hartree_fock};
    return lowdin_orthonormalize(raw);
}

// psi -> lambda^{3/2} psi(lambda x) by trigonometric resampling, one axis at
// a time. The output is checked for containment (boundary mass) and
// resolution (spectral tail) since both can be destroyed by dilation.
inline OrbitalSet dilate(const OrbitalSet& S, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("dilate: lambda must be positive and finite");
    const Grid& g = S.grid();
    const int n = g.n;

    // Resampling matrix M[i][j]: value of the trigonometric interpolant
    // built from samples at x_j, evaluated at lambda * x_i.
    std::vector<cxd> M(static_cast<std::size_t>(n) * n, cxd(0.0, 0.0));
    for (int i = 0; i < n; ++i) {
        const double target = lambda * g.coord(i);
        for (int j = 0; j < n; ++j) {
            const double dx = target - g.coord(j);
            cxd acc(0.0, 0.0);
            for (int f = -n / 2; f < n / 2; ++f)
                acc += std::polar(1.0, 2.0 * M_PI / g.L * f * dx);
            M[static_cast<std::size_t>(i) * n + j] = acc / static_cast<double>(n);
        }
    }

    auto resample_axis = [&](const Field& in, int axis) {
        Field out(g);
        // out[idx with i on `axis`] = sum_j M[i][j] * in[idx with j on `axis`]
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int i = 0; i < n; ++i) {
                    cxd acc(0.0, 0.0);
                    for (int j = 0; j < n; ++j) {
                        const std::size_t src = axis == 0 ? g.index(j, a, b)
                                              : axis == 1 ? g.index(a, j, b)
                                                          : g.index(a, b, j);
                        acc += M[static_cast<std::size_t>(i) * n + j] * in.data[src];
                    }
                    const std::size_t dst = axis == 0 ? g.index(i, a, b)
                                          : axis == 1 ? g.index(a, i, b)
                                                      : g.index(a, b, i);
                    out.data[dst] = acc;
                }
        return out;
    };

    OrbitalSet out = S;
    const double amp = std::pow(lambda, 1.5);
    for (Field& psi : out.orbitals) {
        Field f = resample_axis(psi, 0);
        f = resample_axis(f, 1);
        f = resample_axis(f, 2);
        scale(f, cxd(amp, 0.0));
        psi = std::move(f);
    }

    const Field rho = density(out);
    const double total = particle_number(out);
    const double leaked = boundary_mass(rho, 0.9);
    if (std::abs(leaked) > 1e-6 * total)
        throw std::invalid_argument("dilate: state no longer contained (boundary mass " +
                                    std::to_string(leaked) + " of " + std::to_string(total) + ")");
    double tail = 0.0, outer = 0.0, mass = 0.0;
    for (const Field& psi : out.orbitals) {
        double o = 0.0, t = 0.0;
        spectral_tail_masses(fft_forward(psi), o, t);
        outer += o;
        mass += t;
    }
    tail = mass > 0.0 ? outer / mass : 0.0;
    if (tail > 1e-6)
        throw std::invalid_argument("dilate: state no longer resolvable (spectral tail fraction " +
                                    std::to_string(tail) + ")");
    return out;
}

// kappa* = 2T / (D - X): the coupling at which E_HF crosses zero.
inline double critical_coupling(const OrbitalSet& S) {
    if (S.mode == Mode::free_particle)
        throw std::invalid_argument("critical_coupling: free mode has no interaction to tune");
    const EnergySplit e = energy(S);
    const double denom = S.mode == Mode::hartree ? e.D : e.D - e.X;
    if (!(denom > 1e-10 * std::max(e.D, 1.0)))
        throw std::invalid_argument(
            "critical_coupling: no finite critical coupling (D - X = " + std::to_string(denom) +
            "; exchange cancels direct at N=1)");
    return 2.0 * e.T / denom;
}

struct HypothesisChecklist {
    double E_hf = 0.0;       // must be < 0
    double anisotropy = 0.0; // must be <= 1e-6
    double L2 = 0.0;         // must be finite
    double tr_x4 = 0.0;      // must be finite
    double tr_lap = 0.0;     // must be finite
    bool all_pass = false;
};

inline HypothesisChecklist hypothesis_checklist(const OrbitalSet& S) {
    HypothesisChecklist c;
    c.E_hf = energy(S).E_hf;
    c.anisotropy = angular_anisotropy(density(S));
    c.L2 = angular_momentum_sq(S);
    const Grid& g = S.grid();
    double x4 = 0.0;
    for (const Field& psi : S.orbitals)
        for (int ix = 0; ix < g.n; ++ix) {
            const double x2 = g.coord(ix) * g.coord(ix);
            for (int iy = 0; iy < g.n; ++iy) {
                const double xy2 = x2 + g.coord(iy) * g.coord(iy);
                for (int iz = 0; iz < g.n; ++iz) {
                    const double r2 = xy2 + g.coord(iz) * g.coord(iz);
                    x4 += r2 * r2 * std::norm(psi.data[g.index(ix, iy, iz)]);
                }
            }
        }
    const double h = g.h();
    c.tr_x4 = x4 * h * h * h;
    const MultiplierSymbol lap = MultiplierSymbol::laplacian();
    for (const Field& psi : S.orbitals) c.tr_lap += qform(psi, lap);
    c.all_pass = c.E_hf < 0.0 && c.anisotropy <= 1e-6 && std::isfinite(c.L2) &&
                 std::isfinite(c.tr_x4) && std::isfinite(c.tr_lap);
    return c;
}

// Shell state at kappa = kappa_star * (1 + margin), strictly negative energy.
inline std::pair<OrbitalSet, double> prepare_negative_energy(const ShellSpec& spec, const Grid& g,
                                                             double margin) {
    if (!(margin > 0.0))
        throw std::invalid_argument(
            "prepare_negative_energy: margin over the critical coupling must be > 0 "
            "(strict negativity of the energy is required)");
    OrbitalSet S = shell_state(spec, g);
    const double kappa_star = critical_coupling(S);
    const double kappa = kappa_star * (1.0 + margin);
    S.kappa = kappa;
    return {std::move(S), kappa};
}

}  // namespace prhf
