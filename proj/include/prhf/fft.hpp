#pragma once

// FFTW plan cache.
//
// Transform convention: forward is FFTW_FORWARD unnormalized,
//   fhat(k) = sum_x f(x) exp(-i k.x_index),
// inverse divides by n^3. Parseval therefore reads
//   sum_x |f(x)|^2 h^3 = (h^3/n^3) sum_k |fhat(k)|^2.
//
// Plans are created with FFTW_MEASURE the first time a (n, direction) pair is
// seen and reused for the life of the process. MEASURE picks the plan by
// timing candidate algorithms, which is not reproducible between processes,
// so accumulated wisdom is persisted to disk (PRHF_WISDOM, or
// $XDG_CACHE_HOME/prhf/fftw-wisdom, or $HOME/.cache/prhf/fftw-wisdom):
// a rerun loads identical wisdom, derives identical plans, and produces
// bit-identical results.

#include <fftw3.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "prhf/field.hpp"

namespace prhf {

class FftEngine {
  public:
    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    // In-place unnormalized transform of an n^3 complex cube.
    void execute(int n, int sign, cxd* data) {
        fftw_plan plan = plan_for(n, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

    // Out-of-place unnormalized transform of an n^3 real cube into its
    // n*n*(n/2+1) half-spectrum (the conjugate-symmetric remainder is implied).
    void execute_r2c(int n, double* in, cxd* out) {
        fftw_execute_dft_r2c(plan_for(n, kR2C), in, reinterpret_cast<fftw_complex*>(out));
    }

    // Inverse of execute_r2c, unnormalized; overwrites the spectral input.
    void execute_c2r(int n, cxd* in, double* out) {
        fftw_execute_dft_c2r(plan_for(n, kC2R), reinterpret_cast<fftw_complex*>(in), out);
    }

    // Plan-map keys for the real transforms; FFTW_FORWARD/FFTW_BACKWARD are -1/+1.
    static constexpr int kR2C = 2;
    static constexpr int kC2R = -2;

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

  private:
    FftEngine() {
        wisdom_path_ = resolve_wisdom_path();
        if (!wisdom_path_.empty())
            fftw_import_wisdom_from_filename(wisdom_path_.c_str());
    }

    ~FftEngine() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    static std::string resolve_wisdom_path() {
        if (const char* p = std::getenv("PRHF_WISDOM")) return p;
        std::string base;
        if (const char* x = std::getenv("XDG_CACHE_HOME")) base = x;
        else if (const char* h = std::getenv("HOME")) base = std::string(h) + "/.cache";
        else return {};
        std::error_code ec;
        std::filesystem::create_directories(base + "/prhf", ec);
        if (ec) return {};
        return base + "/prhf/fftw-wisdom";
    }

    fftw_plan plan_for(int n, int kind) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, kind);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        const std::size_t full = static_cast<std::size_t>(n) * n * n;
        fftw_plan plan = nullptr;
        if (kind == FFTW_FORWARD || kind == FFTW_BACKWARD) {
            fftw_complex* probe = fftw_alloc_complex(full);
            if (!probe) throw std::bad_alloc();
            plan = fftw_plan_dft_3d(n, n, n, probe, probe, kind, FFTW_MEASURE);
            fftw_free(probe);
        } else if (kind == kR2C || kind == kC2R) {
            const std::size_t half = static_cast<std::size_t>(n) * n * (n / 2 + 1);
            double* pr = fftw_alloc_real(full);
            fftw_complex* pc = fftw_alloc_complex(half);
            if (!pr || !pc) {
                fftw_free(pr);
                fftw_free(pc);
                throw std::bad_alloc();
            }
            plan = (kind == kR2C) ? fftw_plan_dft_r2c_3d(n, n, n, pr, pc, FFTW_MEASURE)
                                  : fftw_plan_dft_c2r_3d(n, n, n, pc, pr, FFTW_MEASURE);
            fftw_free(pc);
            fftw_free(pr);
        } else {
            throw std::invalid_argument("FftEngine: unknown transform kind " + std::to_string(kind));
        }
        if (!plan) throw std::runtime_error("FftEngine: plan creation failed for n=" + std::to_string(n));
        plans_.emplace(key, plan);
        if (!wisdom_path_.empty())
            fftw_export_wisdom_to_filename(wisdom_path_.c_str());
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
    std::string wisdom_path_;
};

// Forward transform of a field into FFT-ordered spectral coefficients (unnormalized).
inline Field fft_forward(const Field& f) {
    Field out = f;
    FftEngine::instance().execute(f.grid.n, FFTW_FORWARD, out.data.data());
    return out;
}

// Inverse of fft_forward (includes the 1/n^3 normalization).
inline Field fft_inverse(const Field& fhat) {
    Field out = fhat;
    FftEngine::instance().execute(fhat.grid.n, FFTW_BACKWARD, out.data.data());
    const double s = 1.0 / static_cast<double>(fhat.size());
    for (cxd& v : out.data) v *= s;
    return out;
}

inline void fft_forward_inplace(int n, cxd* data) {
    FftEngine::instance().execute(n, FFTW_FORWARD, data);
}

inline void fft_inverse_unscaled_inplace(int n, cxd* data) {
    FftEngine::instance().execute(n, FFTW_BACKWARD, data);
}

}  // namespace prhf
