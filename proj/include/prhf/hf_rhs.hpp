#pragma once

// Hartree-Fock generator
//   H_eff psi_j = sqrt(p^2+m^2) psi_j - kappa*(1/|x| * rho) psi_j
//                 + kappa * sum_i (1/|x| * psi_j conj(psi_i)) psi_i
// and the time derivative rhs = -i * H_eff psi_j.
//
// The hartree mode drops the exchange sum, free drops both potential terms.
// Pair potentials W_ij = 1/|x| * rho_ij are computed once per evaluation for
// i <= j only (W_ji = conj(W_ij), real kernel); the direct potential is the
// sum of the diagonals. The potential part is assembled per grid point as
// kappa*(sum_i W_ij psi_i - V psi_j), so at N=1 direct and exchange cancel
// bit-exactly and the trajectory coincides with the free one.

#include <vector>

#include "prhf/coulomb.hpp"
#include "prhf/orbital_set.hpp"
#include "prhf/spectral.hpp"

namespace prhf {

constexpr double drift_tol = 1e-6;

// Upper-triangular pair potentials W_ij, i <= j, plus their diagonal sum.
struct PairPotentials {
    int N = 0;
    std::vector<Field> W;  // packed: (i,j), i <= j, at index i*N - i*(i-1)/2 + (j-i)
    Field direct;

    const Field& at(int i, int j) const {
        // only i <= j is stored; callers conjugate for the transpose
        return W[static_cast<std::size_t>(i) * N - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i)];
    }
};

// All pair potentials needed by the exchange term and the energy split.
inline PairPotentials compute_pair_potentials(const OrbitalSet& S) {
    const int N = S.N();
    PairPotentials P;
    P.N = N;
    P.W.reserve(static_cast<std::size_t>(N) * (N + 1) / 2);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            const Field rho_ij = pair_density(S, i, j);
            // diagonal pair densities are |psi_j|^2, real by construction
            P.W.push_back(i == j ? coulomb_convolve_real(rho_ij) : coulomb_convolve(rho_ij));
        }
    P.direct = Field(S.grid());
    for (int j = 0; j < N; ++j) {
        const Field& Wjj = P.at(j, j);
        const std::size_t sz = P.direct.size();
        for (std::size_t p = 0; p < sz; ++p) P.direct.data[p] += Wjj.data[p];
    }
    return P;
}

inline std::vector<Field> apply_hamiltonian(const OrbitalSet& S, bool check_drift = true) {
    if (check_drift) {
        const double drift = gram_drift(S);
        if (drift > drift_tol)
            throw std::runtime_error("apply_hamiltonian: Gram drift " + std::to_string(drift) +
                                     " exceeds tolerance " + std::to_string(drift_tol) +
                                     "; state no longer represents a projection");
    }

    const int N = S.N();
    const std::size_t sz = S.grid().size();
    const MultiplierSymbol disp = MultiplierSymbol::dispersion(S.grid().m);

    std::vector<Field> out;
    out.reserve(N);
    for (int j = 0; j < N; ++j) out.push_back(apply_multiplier(S.orbitals[j], disp));
    if (S.mode == Mode::free_particle || S.kappa == 0.0) return out;

    if (S.mode == Mode::hartree) {
        const Field V = coulomb_convolve_real(density(S));
        for (int j = 0; j < N; ++j)
            for (std::size_t p = 0; p < sz; ++p)
                out[j].data[p] -= S.kappa * V.data[p] * S.orbitals[j].data[p];
        return out;
    }

    const PairPotentials P = compute_pair_potentials(S);
    std::vector<const cxd*> w(N), psi(N);
    std::vector<char> conj_w(N);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            w[i] = (i <= j ? P.at(i, j) : P.at(j, i)).data.data();
            conj_w[i] = i > j;
            psi[i] = S.orbitals[i].data.data();
        }
        cxd* dst = out[j].data.data();
        const cxd* psij = S.orbitals[j].data.data();
        const cxd* V = P.direct.data.data();
        for (std::size_t p = 0; p < sz; ++p) {
            cxd acc(0.0, 0.0);
            for (int i = 0; i < N; ++i)
                acc += (conj_w[i] ? std::conj(w[i][p]) : w[i][p]) * psi[i][p];
            dst[p] += S.kappa * (acc - V[p] * psij[p]);
        }
    }
    return out;
}

inline std::vector<Field> rhs(const OrbitalSet& S, bool check_drift = true) {
    std::vector<Field> H = apply_hamiltonian(S, check_drift);
    const cxd minus_i(0.0, -1.0);
    for (Field& f : H) scale(f, minus_i);
    return H;
}

}  // namespace prhf
