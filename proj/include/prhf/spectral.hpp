#pragma once

// Fourier multiplier operators on periodic fields.
//
// A multiplier acts as  f -> ifft( s(k) * fft(f) )  with s real and
// non-negative for every kind provided here. The same symbols drive the
// quadratic forms used by the diagnostics: with the unnormalized-forward
// convention of fft.hpp,
//   <f, s(p) f> = (h^3 / n^3) * sum_k s(|k|^2) |fhat(k)|^2.

#include <array>
#include <cmath>
#include <vector>

#include "prhf/fft.hpp"
#include "prhf/field.hpp"

namespace prhf {

struct MultiplierSymbol {
    enum class Kind {
        dispersion,         // sqrt(|k|^2 + m^2)
        inverse_dispersion, // 1 / sqrt(|k|^2 + m^2)
        p2_over_dispersion, // |k|^2 / sqrt(|k|^2 + m^2)
        sobolev_half,       // (1 + |k|^2)^{1/2}
        laplacian,          // |k|^2
        coulomb_truncated,  // 4*pi*(1 - cos(rho_c*|k|)) / |k|^2,  2*pi*rho_c^2 at k=0
    };

    Kind kind = Kind::laplacian;
    double m = 0.0;      // mass parameter of the dispersion family
    double rho_c = 0.0;  // truncation radius of the Coulomb kernel

    static MultiplierSymbol dispersion(double m) { return {Kind::dispersion, m, 0.0}; }
    static MultiplierSymbol inverse_dispersion(double m) { return {Kind::inverse_dispersion, m, 0.0}; }
    static MultiplierSymbol p2_over_dispersion(double m) { return {Kind::p2_over_dispersion, m, 0.0}; }
    static MultiplierSymbol sobolev_half() { return {Kind::sobolev_half, 0.0, 0.0}; }
    static MultiplierSymbol laplacian() { return {Kind::laplacian, 0.0, 0.0}; }
    static MultiplierSymbol coulomb_truncated(double rho_c) { return {Kind::coulomb_truncated, 0.0, rho_c}; }

    // Evaluate the symbol at squared wavenumber |k|^2.
    double operator()(double k2) const {
        switch (kind) {
            case Kind::dispersion:
                return std::sqrt(k2 + m * m);
            case Kind::inverse_dispersion: {
                // For m=0 the k=0 mode sits outside the operator's domain;
                // it is projected out (value 0) rather than left infinite.
                const double w = std::sqrt(k2 + m * m);
                return w > 0.0 ? 1.0 / w : 0.0;
            }
            case Kind::p2_over_dispersion: {
                const double w = std::sqrt(k2 + m * m);
                return w > 0.0 ? k2 / w : 0.0;
            }
            case Kind::sobolev_half:
                return std::sqrt(1.0 + k2);
            case Kind::laplacian:
                return k2;
            case Kind::coulomb_truncated:
                if (k2 == 0.0) return 2.0 * M_PI * rho_c * rho_c;
                return 4.0 * M_PI * (1.0 - std::cos(rho_c * std::sqrt(k2))) / k2;
        }
        return 0.0;
    }
};

// Per-axis wavenumbers in FFT bin order.
inline std::vector<double> axis_wavenumbers(const Grid& g) {
    std::vector<double> k(g.n);
    for (int i = 0; i < g.n; ++i) k[i] = g.wavenumber(i);
    return k;
}

namespace detail {

// Walk all bins of a spectral cube, handing (flat index, |k|^2) to fn.
template <class F>
void for_each_k2(const Grid& g, F&& fn) {
    const std::vector<double> k = axis_wavenumbers(g);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double kx2 = k[ix] * k[ix];
        for (int iy = 0; iy < g.n; ++iy) {
            const double kxy2 = kx2 + k[iy] * k[iy];
            for (int iz = 0; iz < g.n; ++iz, ++idx) fn(idx, kxy2 + k[iz] * k[iz]);
        }
    }
}

}  // namespace detail

inline Field apply_multiplier(const Field& f, const MultiplierSymbol& s) {
    Field out = fft_forward(f);
    detail::for_each_k2(out.grid, [&](std::size_t idx, double k2) { out.data[idx] *= s(k2); });
    FftEngine::instance().execute(out.grid.n, FFTW_BACKWARD, out.data.data());
    const double norm = 1.0 / static_cast<double>(out.size());
    for (cxd& v : out.data) v *= norm;
    return out;
}

// Quadratic form <f, s(p) f> evaluated from an already-transformed field.
inline double spectral_qform(const Field& fhat, const MultiplierSymbol& s) {
    double acc = 0.0;
    detail::for_each_k2(fhat.grid, [&](std::size_t idx, double k2) {
        acc += s(k2) * std::norm(fhat.data[idx]);
    });
    const Grid& g = fhat.grid;
    const double h = g.h();
    return acc * (h * h * h) / static_cast<double>(g.size());
}

inline double qform(const Field& f, const MultiplierSymbol& s) {
    return spectral_qform(fft_forward(f), s);
}

// Spectral partial derivatives (d/dx_1 f, d/dx_2 f, d/dx_3 f).
inline std::array<Field, 3> gradient(const Field& f) {
    const Grid& g = f.grid;
    const Field fhat = fft_forward(f);
    const std::vector<double> k = axis_wavenumbers(g);
    std::array<Field, 3> out{Field(g), Field(g), Field(g)};
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix) {
        for (int iy = 0; iy < g.n; ++iy) {
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                const cxd v = fhat.data[idx];
                out[0].data[idx] = cxd(0.0, k[ix]) * v;
                out[1].data[idx] = cxd(0.0, k[iy]) * v;
                out[2].data[idx] = cxd(0.0, k[iz]) * v;
            }
        }
    }
    const double norm = 1.0 / static_cast<double>(g.size());
    for (Field& d : out) {
        FftEngine::instance().execute(g.n, FFTW_BACKWARD, d.data.data());
        for (cxd& v : d.data) v *= norm;
    }
    return out;
}

// Exact evolution under i d/dt f = sqrt(-Laplacian + m^2) f for time t,
// i.e. multiplication by exp(-i*sqrt(|k|^2+m^2)*t) mode by mode.
inline Field free_propagate(const Field& f, double t) {
    Field out = fft_forward(f);
    const double m = f.grid.m;
    detail::for_each_k2(out.grid, [&](std::size_t idx, double k2) {
        const double w = std::sqrt(k2 + m * m);
        out.data[idx] *= std::polar(1.0, -w * t);
    });
    FftEngine::instance().execute(out.grid.n, FFTW_BACKWARD, out.data.data());
    const double norm = 1.0 / static_cast<double>(out.size());
    for (cxd& v : out.data) v *= norm;
    return out;
}

// Fraction of spectral mass in the corner shell |k|_inf > (2/3)*k_max,
// the under-resolution indicator. Takes the already-transformed field.
inline double spectral_tail_masses(const Field& fhat, double& outer, double& total) {
    const Grid& g = fhat.grid;
    const double cut = (2.0 / 3.0) * g.k_max();
    const std::vector<double> k = axis_wavenumbers(g);
    outer = 0.0;
    total = 0.0;
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double akx = std::abs(k[ix]);
        for (int iy = 0; iy < g.n; ++iy) {
            const double aky = std::abs(k[iy]);
            const double mxy = akx > aky ? akx : aky;
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                const double akz = std::abs(k[iz]);
                const double p = std::norm(fhat.data[idx]);
                total += p;
                if ((mxy > akz ? mxy : akz) > cut) outer += p;
            }
        }
    }
    return total > 0.0 ? outer / total : 0.0;
}

inline double spectral_tail_fraction(const Field& fhat) {
    double outer = 0.0, total = 0.0;
    return spectral_tail_masses(fhat, outer, total);
}

}  // namespace prhf
