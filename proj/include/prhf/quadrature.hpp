#pragma once

// Thin RAII wrapper over GSL adaptive quadrature (QAGS), which handles the
// integrable endpoint singularities the lemma checks run into.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <functional>
#include <stdexcept>
#include <string>

namespace prhf {

namespace detail {

struct QagsWorkspace {
    gsl_integration_workspace* w = nullptr;
    QagsWorkspace() : w(gsl_integration_workspace_alloc(4096)) {
        if (!w) throw std::bad_alloc();
    }
    ~QagsWorkspace() { gsl_integration_workspace_free(w); }
    QagsWorkspace(const QagsWorkspace&) = delete;
    QagsWorkspace& operator=(const QagsWorkspace&) = delete;
};

inline double call_trampoline(double x, void* params) {
    return (*static_cast<const std::function<double(double)>*>(params))(x);
}

}  // namespace detail

// Definite integral of f over [a, b] with adaptive subdivision; throws on
// GSL failure instead of aborting (handler disabled once per process).
inline double integrate_qags(const std::function<double(double)>& f, double a, double b,
                             double epsabs = 0.0, double epsrel = 1e-10) {
    static thread_local detail::QagsWorkspace ws;
    static const bool handler_off = (gsl_set_error_handler_off(), true);
    (void)handler_off;

    gsl_function gf;
    gf.function = &detail::call_trampoline;
    gf.params = const_cast<std::function<double(double)>*>(&f);

    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qags(&gf, a, b, epsabs, epsrel, 4096, ws.w, &result, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw std::runtime_error(std::string("integrate_qags: ") + gsl_strerror(status));
    return result;
}

}  // namespace prhf
