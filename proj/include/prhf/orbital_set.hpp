#pragma once

// Orbital representation of the rank-N projection Q = sum_j |psi_j><psi_j|,
// with densities, Gram bookkeeping and symmetry/boundary diagnostics.

#include <Eigen/Dense>

#include <string>
#include <unordered_map>
#include <vector>

#include "prhf/field.hpp"

namespace prhf {

enum class Mode { hartree_fock, hartree, free_particle };

inline std::string mode_name(Mode m) {
    switch (m) {
        case Mode::hartree_fock: return "hartree-fock";
        case Mode::hartree: return "hartree";
        case Mode::free_particle: return "free";
    }
    return "?";
}

inline Mode mode_from_name(const std::string& s) {
    if (s == "hartree-fock") return Mode::hartree_fock;
    if (s == "hartree") return Mode::hartree;
    if (s == "free") return Mode::free_particle;
    throw std::invalid_argument("unknown mode '" + s + "' (expected hartree-fock, hartree or free)");
}

constexpr double ortho_tol = 1e-8;

// The evolving state. Aggregate-constructible for assembly code (e.g. raw
// shells before orthonormalization); simulation entry points go through
// make_orbital_set, which enforces the orthonormality contract.
struct OrbitalSet {
    std::vector<Field> orbitals;
    double kappa = 0.0;  // coupling in front of direct and exchange terms
    double t = 0.0;      // simulation time carried with the state
    Mode mode = Mode::hartree_fock;

    int N() const { return static_cast<int>(orbitals.size()); }
    const Grid& grid() const {
        if (orbitals.empty()) throw std::logic_error("OrbitalSet: empty set has no grid");
        return orbitals.front().grid;
    }
};

inline Eigen::MatrixXcd gram(const OrbitalSet& S) {
    const int N = S.N();
    Eigen::MatrixXcd G(N, N);
    for (int i = 0; i < N; ++i) {
        G(i, i) = inner(S.orbitals[i], S.orbitals[i]);
        for (int j = i + 1; j < N; ++j) {
            const cxd v = inner(S.orbitals[i], S.orbitals[j]);
            G(i, j) = v;
            G(j, i) = std::conj(v);
        }
    }
    return G;
}

// max_ij |G_ij - delta_ij|, the orthonormality defect.
inline double gram_drift(const OrbitalSet& S) {
    const Eigen::MatrixXcd G = gram(S);
    double worst = 0.0;
    for (int i = 0; i < G.rows(); ++i)
        for (int j = 0; j < G.cols(); ++j) {
            const double d = std::abs(G(i, j) - (i == j ? cxd(1.0) : cxd(0.0)));
            if (d > worst) worst = d;
        }
    return worst;
}

inline OrbitalSet make_orbital_set(std::vector<Field> orbitals, double kappa, double t, Mode mode) {
    if (orbitals.empty()) throw std::invalid_argument("make_orbital_set: need at least one orbital");
    for (const Field& f : orbitals)
        require_same_grid(orbitals.front().grid, f.grid, "make_orbital_set");
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("make_orbital_set: coupling must be >= 0 and finite");
    OrbitalSet S{std::move(orbitals), kappa, t, mode};
    const double drift = gram_drift(S);
    if (drift > ortho_tol)
        throw std::invalid_argument("make_orbital_set: orbitals not orthonormal (Gram defect " +
                                    std::to_string(drift) + " > " + std::to_string(ortho_tol) + ")");
    return S;
}

// Symmetric (Loewdin) orthonormalization S -> S*G^{-1/2}: the orthonormal
// family closest to the input, spanning the same subspace.
inline OrbitalSet lowdin_orthonormalize(const OrbitalSet& S) {
    const int N = S.N();
    const Eigen::MatrixXcd G = gram(S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("lowdin_orthonormalize: eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    if (lam(0) <= 1e-10)
        throw std::invalid_argument(
            "lowdin_orthonormalize: Gram matrix near-singular (smallest eigenvalue " +
            std::to_string(lam(0)) + "), orbitals not linearly independent");
    Eigen::VectorXd inv_sqrt(N);
    for (int i = 0; i < N; ++i) inv_sqrt(i) = 1.0 / std::sqrt(lam(i));
    const Eigen::MatrixXcd A =
        es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();

    OrbitalSet out = S;
    const std::size_t sz = S.grid().size();
    for (int i = 0; i < N; ++i) {
        Field acc(S.grid());
        for (int j = 0; j < N; ++j) {
            const cxd a = A(j, i);
            const cxd* src = S.orbitals[j].data.data();
            cxd* dst = acc.data.data();
            for (std::size_t p = 0; p < sz; ++p) dst[p] += a * src[p];
        }
        out.orbitals[i] = std::move(acc);
    }
    return out;
}

// Apply an N x N mixing matrix: psi'_i = sum_j psi_j U_ji. For unitary U
// this leaves Q, the density and every observable unchanged.
inline OrbitalSet mix_orbitals(const OrbitalSet& S, const Eigen::MatrixXcd& U) {
    const int N = S.N();
    if (U.rows() != N || U.cols() != N)
        throw std::invalid_argument("mix_orbitals: matrix shape does not match orbital count");
    OrbitalSet out = S;
    const std::size_t sz = S.grid().size();
    for (int i = 0; i < N; ++i) {
        Field acc(S.grid());
        for (int j = 0; j < N; ++j) {
            const cxd a = U(j, i);
            const cxd* src = S.orbitals[j].data.data();
            cxd* dst = acc.data.data();
            for (std::size_t p = 0; p < sz; ++p) dst[p] += a * src[p];
        }
        out.orbitals[i] = std::move(acc);
    }
    return out;
}

// rho(x) = sum_j |psi_j(x)|^2, stored in the real part.
inline Field density(const OrbitalSet& S) {
    Field rho(S.grid());
    for (const Field& psi : S.orbitals) {
        const std::size_t sz = rho.size();
        for (std::size_t i = 0; i < sz; ++i) rho.data[i] += std::norm(psi.data[i]);
    }
    return rho;
}

// rho_ij(x) = psi_j(x) * conj(psi_i(x)); rho_ji = conj(rho_ij).
inline Field pair_density(const OrbitalSet& S, int i, int j) {
    if (i < 0 || j < 0 || i >= S.N() || j >= S.N())
        throw std::invalid_argument("pair_density: orbital index out of range");
    Field out(S.grid());
    const cxd* a = S.orbitals[i].data.data();
    const cxd* b = S.orbitals[j].data.data();
    const std::size_t sz = out.size();
    for (std::size_t p = 0; p < sz; ++p) out.data[p] = b[p] * std::conj(a[p]);
    return out;
}

// Deviation of a real field from discrete rotational symmetry.
//
// Grid points are grouped into orbits of the cube symmetry group (axis
// permutations and sign flips, i.e. equal sorted |lattice coordinate|
// triples); the dynamics commutes with that group exactly, so orbit spread
// isolates genuine symmetry breaking from radial profile variation. Spread
// is aggregated in radial shells of width h and normalized by the largest
// shell mean: returned value is
//   max_shell rms(value - orbit mean) / max_shell |shell mean|.
// Exactly radial fields give 0 up to round-off; a density proportional to
// |Y_10|^2 gives an O(1) value.
inline double angular_anisotropy(const Field& rho) {
    const Grid& g = rho.grid;

    struct OrbitStat {
        double sum = 0.0, dev_sq = 0.0;
        long count = 0;
    };
    std::unordered_map<int, OrbitStat> orbits;
    orbits.reserve(static_cast<std::size_t>(g.n) * g.n);

    const auto for_each_point = [&](auto&& fn) {
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix) {
            const int ax = std::abs(g.lattice(ix));
            for (int iy = 0; iy < g.n; ++iy) {
                const int ay = std::abs(g.lattice(iy));
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const int az = std::abs(g.lattice(iz));
                    int s1 = ax, s2 = ay, s3 = az;
                    if (s1 < s2) std::swap(s1, s2);
                    if (s2 < s3) std::swap(s2, s3);
                    if (s1 < s2) std::swap(s1, s2);
                    fn(idx, (s1 * 256 + s2) * 256 + s3);
                }
            }
        }
    };

    for_each_point([&](std::size_t idx, int key) {
        OrbitStat& o = orbits[key];
        o.sum += rho.data[idx].real();
        ++o.count;
    });
    // second pass against the orbit means: cancellation-free, so exactly
    // radial fields stay at round-off instead of the sqrt(eps) floor the
    // one-pass variance formula would impose
    for_each_point([&](std::size_t idx, int key) {
        OrbitStat& o = orbits[key];
        const double d = rho.data[idx].real() - o.sum / static_cast<double>(o.count);
        o.dev_sq += d * d;
    });

    struct ShellStat {
        double dev_sq = 0.0, sum = 0.0;
        long count = 0;
    };
    std::unordered_map<int, ShellStat> shells;
    for (const auto& [key, o] : orbits) {
        const int s1 = key >> 16, s2 = (key >> 8) & 255, s3 = key & 255;
        const int shell = static_cast<int>(
            std::sqrt(double(s1) * s1 + double(s2) * s2 + double(s3) * s3));
        ShellStat& s = shells[shell];
        s.dev_sq += o.dev_sq;
        s.sum += o.sum;
        s.count += o.count;
    }

    double max_mean = 0.0;
    for (const auto& [shell, s] : shells)
        max_mean = std::max(max_mean, std::abs(s.sum / static_cast<double>(s.count)));
    if (max_mean == 0.0) return 0.0;

    double worst = 0.0;
    for (const auto& [shell, s] : shells)
        worst = std::max(worst, std::sqrt(s.dev_sq / static_cast<double>(s.count)));
    return worst / max_mean;
}

}  // namespace prhf
