#pragma once

// Binary orbital container + JSON sidecar.
//
// Layout (native little-endian doubles, no struct padding on disk):
//   bytes 0..7    magic "PRHFORB1"
//   uint32        endianness tag 0x01020304 (readers reject a mismatch)
//   int32         n, N, mode (0 hartree-fock, 1 hartree, 2 free), reserved
//   double        L, m, kappa, t
//   N * n^3       complex<double> arrays, x-major/z-fastest grid order
// The sidecar <path>.json carries the same metadata for humans and scripts.
//
// Loading does not re-validate orthonormality: legitimately evolved states
// carry Gram drift above construction tolerance, and round-tripping bits is
// this layer's only job.

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "prhf/orbital_set.hpp"

namespace prhf {

namespace detail {

constexpr char orbital_magic[8] = {'P', 'R', 'H', 'F', 'O', 'R', 'B', '1'};
constexpr std::uint32_t endian_tag = 0x01020304u;

template <class T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

inline std::int32_t mode_tag(Mode m) {
    switch (m) {
        case Mode::hartree_fock: return 0;
        case Mode::hartree: return 1;
        case Mode::free_particle: return 2;
    }
    return 0;
}

inline Mode mode_from_tag(std::int32_t v) {
    switch (v) {
        case 0: return Mode::hartree_fock;
        case 1: return Mode::hartree;
        case 2: return Mode::free_particle;
    }
    throw std::runtime_error("orbital container: unknown mode tag " + std::to_string(v));
}

}  // namespace detail

inline void save_orbitals(const OrbitalSet& S, const std::string& path) {
    const Grid& g = S.grid();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_orbitals: cannot open '" + path + "' for writing");

    out.write(detail::orbital_magic, sizeof(detail::orbital_magic));
    detail::write_pod(out, detail::endian_tag);
    detail::write_pod(out, static_cast<std::int32_t>(g.n));
    detail::write_pod(out, static_cast<std::int32_t>(S.N()));
    detail::write_pod(out, detail::mode_tag(S.mode));
    detail::write_pod(out, std::int32_t{0});
    detail::write_pod(out, g.L);
    detail::write_pod(out, g.m);
    detail::write_pod(out, S.kappa);
    detail::write_pod(out, S.t);
    for (const Field& psi : S.orbitals)
        out.write(reinterpret_cast<const char*>(psi.data.data()),
                  static_cast<std::streamsize>(psi.data.size() * sizeof(cxd)));
    if (!out) throw std::runtime_error("save_orbitals: write failed on '" + path + "'");
    out.close();

    nlohmann::json side{{"format", "prhf-orbitals-v1"},
                        {"n", g.n},
                        {"L", g.L},
                        {"m", g.m},
                        {"kappa", S.kappa},
                        {"N", S.N()},
                        {"t", S.t},
                        {"mode", mode_name(S.mode)}};
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) throw std::runtime_error("save_orbitals: cannot open '" + path + ".json'");
    js << side.dump(2) << "\n";
}

inline OrbitalSet load_orbitals(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_orbitals: cannot open '" + path + "'");

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::orbital_magic, sizeof(magic)) != 0)
        throw std::runtime_error("load_orbitals: '" + path + "' is not an orbital container");
    std::uint32_t endian = 0;
    detail::read_pod(in, endian);
    if (endian != detail::endian_tag)
        throw std::runtime_error("load_orbitals: endianness mismatch in '" + path + "'");

    std::int32_t n = 0, N = 0, mode_tag = 0, reserved = 0;
    detail::read_pod(in, n);
    detail::read_pod(in, N);
    detail::read_pod(in, mode_tag);
    detail::read_pod(in, reserved);
    double L = 0.0, m = 0.0, kappa = 0.0, t = 0.0;
    detail::read_pod(in, L);
    detail::read_pod(in, m);
    detail::read_pod(in, kappa);
    detail::read_pod(in, t);
    if (!in) throw std::runtime_error("load_orbitals: truncated header in '" + path + "'");
    if (N < 1 || N > 4096) throw std::runtime_error("load_orbitals: implausible orbital count");

    const Grid g = make_grid(n, L, m);
    OrbitalSet S;
    S.kappa = kappa;
    S.t = t;
    S.mode = detail::mode_from_tag(mode_tag);
    S.orbitals.reserve(N);
    for (int j = 0; j < N; ++j) {
        Field psi(g);
        in.read(reinterpret_cast<char*>(psi.data.data()),
                static_cast<std::streamsize>(psi.data.size() * sizeof(cxd)));
        if (!in) throw std::runtime_error("load_orbitals: truncated orbital data in '" + path + "'");
        S.orbitals.push_back(std::move(psi));
    }
    return S;
}

}  // namespace prhf
