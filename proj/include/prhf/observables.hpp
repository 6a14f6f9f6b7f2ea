#pragma once

// Every functional the blow-up argument tracks: the energy and its split,
// particle number, angular momentum, the virial pair M_vir = tr x T x Q and
// A_dil = tr (p.x + x.p) Q, the exact dilation derivative, the H^{1/2}
// diagnostic, mass concentration, Gram drift and anisotropy.
//
// Position-weighted quantities use box-centered coordinates and are only
// meaningful while the state stays away from the periodic seam; they share
// the boundary-mass guard (warning at 1e-6 of the total mass outside 80% of
// the box half-width).

#include <cstdio>
#include <string>
#include <vector>

#include "prhf/hf_rhs.hpp"
#include "prhf/orbital_set.hpp"
#include "prhf/spectral.hpp"

namespace prhf {

struct EnergySplit {
    double T = 0.0;     // tr sqrt(p^2+m^2) Q
    double D = 0.0;     // direct: integral rho(x) rho(y) / |x-y|
    double X = 0.0;     // exchange: integral |Q(x,y)|^2 / |x-y|
    double E_hf = 0.0;  // T - (kappa/2)(D - X), per mode
};

struct VirialReport {
    double rhs = 0.0;  // d/dt A_dil along the active dynamics
    double gap = 0.0;  // 2 E_hf - rhs = 2 (T - T_p2) >= 0
};

struct ObservableRecord {
    double t = 0.0;
    double T = 0.0, D = 0.0, X = 0.0, E_hf = 0.0;
    double N = 0.0;
    double L2 = 0.0;
    double M_vir = 0.0, A_dil = 0.0, T_p2 = 0.0;
    double sobolev_half = 0.0;
    std::vector<double> conc;  // mass inside |x| <= R for each configured radius
    double tail_frac = 0.0;
    double gram_drift = 0.0;
    double anisotropy = 0.0;
};

namespace detail {

inline double assemble_energy(Mode mode, double kappa, double T, double D, double X) {
    switch (mode) {
        case Mode::hartree_fock: return T - 0.5 * kappa * (D - X);
        case Mode::hartree: return T - 0.5 * kappa * D;
        case Mode::free_particle: return T;
    }
    return T;
}

// D and X from precomputed pair potentials; fixed summation order keeps the
// assembly bit-deterministic.
inline void direct_exchange(const OrbitalSet& S, const PairPotentials& P, double& D, double& X) {
    const Grid& g = S.grid();
    const std::size_t sz = g.size();
    const double h3 = g.h() * g.h() * g.h();
    const int N = S.N();

    const Field rho = density(S);
    double d_acc = 0.0;
    for (std::size_t p = 0; p < sz; ++p) d_acc += (rho.data[p] * P.direct.data[p]).real();
    D = d_acc * h3;

    double x_acc = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            const Field rho_ij = pair_density(S, i, j);
            const Field& W = P.at(i, j);
            double term = 0.0;
            for (std::size_t p = 0; p < sz; ++p)
                term += (rho_ij.data[p] * std::conj(W.data[p])).real();
            x_acc += (i == j ? 1.0 : 2.0) * term;
        }
    X = x_acc * h3;
}

inline void warn_position_guard(const OrbitalSet& S, const Field& rho, const char* what) {
    const double leaked = boundary_mass(rho, 0.8);
    double total = 0.0;
    for (const cxd& v : rho.data) total += v.real();
    total *= std::pow(S.grid().h(), 3);
    if (std::abs(leaked) > 1e-6 * total) {
        std::fprintf(stderr,
                     "[prhf] warning: %s on a state with boundary mass %.3e (total %.3e); "
                     "position operators unreliable near the periodic seam\n",
                     what, leaked, total);
    }
}

}  // namespace detail

inline double particle_number(const OrbitalSet& S) {
    double acc = 0.0;
    for (const Field& psi : S.orbitals) acc += norm_sq(psi);
    return acc;
}

inline EnergySplit energy(const OrbitalSet& S) {
    EnergySplit e;
    const MultiplierSymbol disp = MultiplierSymbol::dispersion(S.grid().m);
    for (const Field& psi : S.orbitals) e.T += qform(psi, disp);
    if (S.mode != Mode::free_particle) {
        const PairPotentials P = compute_pair_potentials(S);
        detail::direct_exchange(S, P, e.D, e.X);
    }
    e.E_hf = detail::assemble_energy(S.mode, S.kappa, e.T, e.D, e.X);
    return e;
}

inline double sobolev_half(const OrbitalSet& S) {
    double acc = 0.0;
    const MultiplierSymbol sob = MultiplierSymbol::sobolev_half();
    for (const Field& psi : S.orbitals) acc += qform(psi, sob);
    return acc;
}

inline double concentration(const OrbitalSet& S, double R) {
    const Grid& g = S.grid();
    const Field rho = density(S);
    const double R2 = R * R;
    double acc = 0.0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double x2 = g.coord(ix) * g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const double xy2 = x2 + g.coord(iy) * g.coord(iy);
            for (int iz = 0; iz < g.n; ++iz) {
                const double z = g.coord(iz);
                if (xy2 + z * z <= R2) acc += rho.data[g.index(ix, iy, iz)].real();
            }
        }
    }
    const double h = g.h();
    return acc * (h * h * h);
}

// Sum_j sum_l || (x ^ p)_l psi_j ||^2 via spectral gradients.
inline double angular_momentum_sq(const OrbitalSet& S) {
    const Grid& g = S.grid();
    detail::warn_position_guard(S, density(S), "angular_momentum_sq");
    double acc = 0.0;
    for (const Field& psi : S.orbitals) {
        const std::array<Field, 3> d = gradient(psi);
        double part = 0.0;
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = g.coord(ix);
            for (int iy = 0; iy < g.n; ++iy) {
                const double y = g.coord(iy);
                for (int iz = 0; iz < g.n; ++iz) {
                    const double z = g.coord(iz);
                    const std::size_t p = g.index(ix, iy, iz);
                    // |L psi|^2 with L = -i (x ^ grad); the -i drops in modulus
                    part += std::norm(y * d[2].data[p] - z * d[1].data[p]) +
                            std::norm(z * d[0].data[p] - x * d[2].data[p]) +
                            std::norm(x * d[1].data[p] - y * d[0].data[p]);
                }
            }
        }
        acc += part;
    }
    const double h = g.h();
    return acc * (h * h * h);
}

// tr M Q with M = x sqrt(p^2+m^2) x, in the manifestly non-negative form
// sum over axes a of <x_a psi, sqrt(p^2+m^2) x_a psi>.
inline double m_virial(const OrbitalSet& S) {
    const Grid& g = S.grid();
    detail::warn_position_guard(S, density(S), "m_virial");
    const MultiplierSymbol disp = MultiplierSymbol::dispersion(g.m);
    double acc = 0.0;
    for (const Field& psi : S.orbitals) {
        for (int a = 0; a < 3; ++a) {
            Field xpsi(g);
            for (int ix = 0; ix < g.n; ++ix)
                for (int iy = 0; iy < g.n; ++iy)
                    for (int iz = 0; iz < g.n; ++iz) {
                        const int idx3[3] = {ix, iy, iz};
                        const std::size_t p = g.index(ix, iy, iz);
                        xpsi.data[p] = g.coord(idx3[a]) * psi.data[p];
                    }
            acc += qform(xpsi, disp);
        }
    }
    return acc;
}

// tr (p.x + x.p) Q = 2 sum_j Im <psi_j, x . grad psi_j>.
inline double dilation(const OrbitalSet& S) {
    const Grid& g = S.grid();
    detail::warn_position_guard(S, density(S), "dilation");
    double acc = 0.0;
    for (const Field& psi : S.orbitals) {
        const std::array<Field, 3> d = gradient(psi);
        cxd part(0.0, 0.0);
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = g.coord(ix);
            for (int iy = 0; iy < g.n; ++iy) {
                const double y = g.coord(iy);
                for (int iz = 0; iz < g.n; ++iz) {
                    const double z = g.coord(iz);
                    const std::size_t p = g.index(ix, iy, iz);
                    part += std::conj(psi.data[p]) *
                            (x * d[0].data[p] + y * d[1].data[p] + z * d[2].data[p]);
                }
            }
        }
        acc += part.imag();
    }
    const double h = g.h();
    return 2.0 * acc * (h * h * h);
}

// Exact derivative of the dilation observable along the active dynamics:
//   hartree-fock: 2 T_p2 - kappa D + kappa X
//   hartree:      2 T_p2 - kappa D
//   free:         2 T_p2
// and the Step 2 gap 2 E_hf - rhs = 2 (T - T_p2), identical in every mode.
inline VirialReport virial_rhs(const OrbitalSet& S) {
    const MultiplierSymbol p2d = MultiplierSymbol::p2_over_dispersion(S.grid().m);
    double T_p2 = 0.0;
    for (const Field& psi : S.orbitals) T_p2 += qform(psi, p2d);
    const EnergySplit e = energy(S);
    VirialReport r;
    switch (S.mode) {
        case Mode::hartree_fock: r.rhs = 2.0 * T_p2 - S.kappa * e.D + S.kappa * e.X; break;
        case Mode::hartree: r.rhs = 2.0 * T_p2 - S.kappa * e.D; break;
        case Mode::free_particle: r.rhs = 2.0 * T_p2; break;
    }
    r.gap = 2.0 * e.E_hf - r.rhs;
    return r;
}

// Full record, sharing transforms and pair potentials across entries.
inline ObservableRecord make_record(const OrbitalSet& S, const std::vector<double>& radii) {
    const Grid& g = S.grid();
    const std::size_t sz = g.size();
    const double h = g.h();
    const double h3 = h * h * h;

    ObservableRecord rec;
    rec.t = S.t;
    rec.gram_drift = gram_drift(S);

    const Field rho = density(S);
    double mass = 0.0;
    for (const cxd& v : rho.data) mass += v.real();
    rec.N = mass * h3;
    detail::warn_position_guard(S, rho, "make_record");
    rec.anisotropy = angular_anisotropy(rho);

    rec.conc.reserve(radii.size());
    for (double R : radii) {
        const double R2 = R * R;
        double acc = 0.0;
        for (int ix = 0; ix < g.n; ++ix) {
            const double x2 = g.coord(ix) * g.coord(ix);
            for (int iy = 0; iy < g.n; ++iy) {
                const double xy2 = x2 + g.coord(iy) * g.coord(iy);
                for (int iz = 0; iz < g.n; ++iz) {
                    const double z = g.coord(iz);
                    if (xy2 + z * z <= R2) acc += rho.data[g.index(ix, iy, iz)].real();
                }
            }
        }
        rec.conc.push_back(acc * h3);
    }

    // One forward transform per orbital serves four spectral functionals and
    // seeds the gradient fields.
    const MultiplierSymbol disp = MultiplierSymbol::dispersion(g.m);
    const MultiplierSymbol p2d = MultiplierSymbol::p2_over_dispersion(g.m);
    const MultiplierSymbol sob = MultiplierSymbol::sobolev_half();
    double tail_outer = 0.0, tail_total = 0.0;
    const std::vector<double> kax = axis_wavenumbers(g);
    for (const Field& psi : S.orbitals) {
        const Field psi_hat = fft_forward(psi);
        rec.T += spectral_qform(psi_hat, disp);
        rec.T_p2 += spectral_qform(psi_hat, p2d);
        rec.sobolev_half += spectral_qform(psi_hat, sob);
        double outer = 0.0, total = 0.0;
        spectral_tail_masses(psi_hat, outer, total);
        tail_outer += outer;
        tail_total += total;

        // gradients from the cached transform
        std::array<Field, 3> d{Field(g), Field(g), Field(g)};
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const cxd v = psi_hat.data[idx];
                    d[0].data[idx] = cxd(0.0, kax[ix]) * v;
                    d[1].data[idx] = cxd(0.0, kax[iy]) * v;
                    d[2].data[idx] = cxd(0.0, kax[iz]) * v;
                }
        const double inv = 1.0 / static_cast<double>(sz);
        for (Field& f : d) {
            FftEngine::instance().execute(g.n, FFTW_BACKWARD, f.data.data());
            for (cxd& v : f.data) v *= inv;
        }

        cxd dil(0.0, 0.0);
        double l2 = 0.0;
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = g.coord(ix);
            for (int iy = 0; iy < g.n; ++iy) {
                const double y = g.coord(iy);
                for (int iz = 0; iz < g.n; ++iz) {
                    const double z = g.coord(iz);
                    const std::size_t p = g.index(ix, iy, iz);
                    dil += std::conj(psi.data[p]) *
                           (x * d[0].data[p] + y * d[1].data[p] + z * d[2].data[p]);
                    l2 += std::norm(y * d[2].data[p] - z * d[1].data[p]) +
                          std::norm(z * d[0].data[p] - x * d[2].data[p]) +
                          std::norm(x * d[1].data[p] - y * d[0].data[p]);
                }
            }
        }
        rec.A_dil += 2.0 * dil.imag() * h3;
        rec.L2 += l2 * h3;

        for (int a = 0; a < 3; ++a) {
            Field xpsi(g);
            for (int ix = 0; ix < g.n; ++ix)
                for (int iy = 0; iy < g.n; ++iy)
                    for (int iz = 0; iz < g.n; ++iz) {
                        const int idx3[3] = {ix, iy, iz};
                        const std::size_t p = g.index(ix, iy, iz);
                        xpsi.data[p] = g.coord(idx3[a]) * psi.data[p];
                    }
            rec.M_vir += qform(xpsi, disp);
        }
    }
    rec.tail_frac = tail_total > 0.0 ? tail_outer / tail_total : 0.0;

    // D and X are state functionals worth reporting even at kappa = 0.
    if (S.mode != Mode::free_particle) {
        const PairPotentials P = compute_pair_potentials(S);
        detail::direct_exchange(S, P, rec.D, rec.X);
    }
    rec.E_hf = detail::assemble_energy(S.mode, S.kappa, rec.T, rec.D, rec.X);
    return rec;
}

// --- serialization -------------------------------------------------------

namespace detail {
inline void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}
}  // namespace detail

inline std::string csv_header(std::size_t n_radii) {
    std::string h = "t,T,D,X,E_hf,N,L2,M_vir,A_dil,T_p2,sobolev_half";
    for (std::size_t i = 0; i < n_radii; ++i) h += ",conc_R" + std::to_string(i + 1);
    h += ",tail_frac,gram_drift,anisotropy";
    return h;
}

inline std::string csv_row(const ObservableRecord& r) {
    std::string out;
    out.reserve(420);
    const double head[] = {r.t, r.T, r.D, r.X, r.E_hf, r.N, r.L2, r.M_vir, r.A_dil, r.T_p2, r.sobolev_half};
    for (double v : head) {
        if (!out.empty()) out += ',';
        detail::append_num(out, v);
    }
    for (double v : r.conc) {
        out += ',';
        detail::append_num(out, v);
    }
    const double tailv[] = {r.tail_frac, r.gram_drift, r.anisotropy};
    for (double v : tailv) {
        out += ',';
        detail::append_num(out, v);
    }
    return out;
}

inline std::string json_line(const ObservableRecord& r) {
    std::string out = "{";
    auto field = [&out](const char* name, double v, bool first = false) {
        if (!first) out += ',';
        out += '"';
        out += name;
        out += "\":";
        detail::append_num(out, v);
    };
    field("t", r.t, true);
    field("T", r.T);
    field("D", r.D);
    field("X", r.X);
    field("E_hf", r.E_hf);
    field("N", r.N);
    field("L2", r.L2);
    field("M_vir", r.M_vir);
    field("A_dil", r.A_dil);
    field("T_p2", r.T_p2);
    field("sobolev_half", r.sobolev_half);
    out += ",\"conc\":[";
    for (std::size_t i = 0; i < r.conc.size(); ++i) {
        if (i) out += ',';
        detail::append_num(out, r.conc[i]);
    }
    out += ']';
    field("tail_frac", r.tail_frac);
    field("gram_drift", r.gram_drift);
    field("anisotropy", r.anisotropy);
    out += '}';
    return out;
}

}  // namespace prhf
