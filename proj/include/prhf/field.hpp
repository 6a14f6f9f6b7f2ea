#pragma once

// Complex scalar field sampled on a Grid, stored 64-byte aligned so FFTW's
// SIMD paths stay usable through the new-array execute interface.

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <new>
#include <vector>

#include "prhf/grid.hpp"

namespace prhf {

using cxd = std::complex<double>;

template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t count) {
        std::size_t bytes = ((count * sizeof(T) + alignment - 1) / alignment) * alignment;
        void* p = std::aligned_alloc(alignment, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
    template <class U>
    bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

using cvec = std::vector<cxd, AlignedAllocator<cxd>>;
using rvec = std::vector<double, AlignedAllocator<double>>;

struct Field {
    Grid grid;
    cvec data;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), data(g.size(), cxd(0.0, 0.0)) {}
    Field(const Grid& g, cvec d) : grid(g), data(std::move(d)) {
        if (data.size() != g.size())
            throw std::invalid_argument("Field: data size does not match grid");
    }

    cxd& operator()(int ix, int iy, int iz) { return data[grid.index(ix, iy, iz)]; }
    const cxd& operator()(int ix, int iy, int iz) const { return data[grid.index(ix, iy, iz)]; }
    std::size_t size() const { return data.size(); }
};

// h^3-weighted inner product, conjugate-linear in the first slot:
// inner(f,g) = h^3 * sum conj(f) g, the discrete stand-in for integral(conj(f) g).
inline cxd inner(const Field& f, const Field& g) {
    require_same_grid(f.grid, g.grid, "inner");
    cxd acc(0.0, 0.0);
    const std::size_t m = f.size();
    for (std::size_t i = 0; i < m; ++i) acc += std::conj(f.data[i]) * g.data[i];
    const double h = f.grid.h();
    return acc * (h * h * h);
}

inline double norm_sq(const Field& f) {
    double acc = 0.0;
    for (const cxd& v : f.data) acc += std::norm(v);
    const double h = f.grid.h();
    return acc * (h * h * h);
}

inline double norm(const Field& f) { return std::sqrt(norm_sq(f)); }

// y += a*x, the workhorse of the integrator.
inline void axpy(const cxd& a, const Field& x, Field& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    const std::size_t m = x.size();
    for (std::size_t i = 0; i < m; ++i) y.data[i] += a * x.data[i];
}

inline void scale(Field& f, const cxd& a) {
    for (cxd& v : f.data) v *= a;
}

// Mass of the real part of rho outside the centered cube of half-width
// fraction*L/2: integral over {max_a |x_a| > fraction*L/2} of Re(rho) h^3.
// Guards the free-space reading of the periodic box: interacting runs are
// only trustworthy while this stays negligible against the total mass.
inline double boundary_mass(const Field& rho, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("boundary_mass: fraction must lie in (0,1)");
    const Grid& g = rho.grid;
    const double cut = fraction * 0.5 * g.L;
    double acc = 0.0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double ax = std::abs(g.coord(ix));
        for (int iy = 0; iy < g.n; ++iy) {
            const double axy = std::max(ax, std::abs(g.coord(iy)));
            for (int iz = 0; iz < g.n; ++iz) {
                if (std::max(axy, std::abs(g.coord(iz))) > cut)
                    acc += rho.data[g.index(ix, iy, iz)].real();
            }
        }
    }
    const double h = g.h();
    return acc * (h * h * h);
}

// Sample a function of the centered coordinates onto a grid.
template <class F>
Field sample(const Grid& g, F&& fn) {
    Field out(g);
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const double y = g.coord(iy);
            for (int iz = 0; iz < g.n; ++iz)
                out.data[g.index(ix, iy, iz)] = cxd(fn(x, y, g.coord(iz)));
        }
    }
    return out;
}

}  // namespace prhf
