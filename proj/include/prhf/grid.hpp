#pragma once

// Cubic periodic grid with coordinates centered at the origin.
//
// Conventions used throughout the library:
//   coordinates   x_i = -L/2 + i*h,  h = L/n,  i = 0..n-1
//   wavenumbers   k_i = (2*pi/L) * (i < n/2 ? i : i - n),  so k spans
//                 (2*pi/L) * {-n/2, ..., n/2 - 1} in FFT storage order
//   flat index    (ix*n + iy)*n + iz
//
// The particle mass rides along on the grid because every dispersion
// multiplier sqrt(|k|^2 + m^2) needs it; carrying it here keeps field
// headers, operators and containers agreeing on one (n, L, m) triple.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace prhf {

struct Grid {
    int n = 0;       // points per axis (even, >= 8)
    double L = 0.0;  // box edge length
    double m = 0.0;  // particle mass entering the dispersion relation

    double h() const { return L / n; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }

    double coord(int i) const { return -0.5 * L + i * h(); }

    // Wavenumber for FFT bin i along one axis.
    double wavenumber(int i) const {
        int f = (i < n / 2) ? i : i - n;
        return 2.0 * M_PI / L * f;
    }

    // Largest representable |k| along one axis, pi*n/L.
    double k_max() const { return M_PI * n / L; }

    // Signed integer lattice coordinate of grid point i (coord = a*h).
    int lattice(int i) const { return i - n / 2; }

    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
    }

    bool operator==(const Grid& o) const { return n == o.n && L == o.L && m == o.m; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline Grid make_grid(int n, double L, double m) {
    if (n < 8) throw std::invalid_argument("make_grid: n must be >= 8, got " + std::to_string(n));
    if (n % 2 != 0) throw std::invalid_argument("make_grid: n must be even, got " + std::to_string(n));
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("make_grid: box edge L must be positive and finite");
    if (!(m >= 0.0) || !std::isfinite(m))
        throw std::invalid_argument("make_grid: mass m must be >= 0 and finite");
    return Grid{n, L, m};
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": fields live on different grids (n=" +
                                    std::to_string(a.n) + ",L=" + std::to_string(a.L) + ",m=" +
                                    std::to_string(a.m) + " vs n=" + std::to_string(b.n) + ",L=" +
                                    std::to_string(b.L) + ",m=" + std::to_string(b.m) + ")");
}

}  // namespace prhf
