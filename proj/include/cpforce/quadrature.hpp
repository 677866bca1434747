#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cpforce/errors.hpp"

namespace cpforce {

// Adaptive Gauss-Kronrod 7-15 integration. Works for real or complex
// integrands; the error estimate is |K15 - G7| per panel, refined globally.

namespace detail {

// QUADPACK dqk15 abscissae/weights, positive half of [-1,1].
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
auto gk15(const F& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    using R = decltype(f(c));
    R k15 = gk_wk[7] * f(c);
    R g7 = gk_wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const R lo = f(c - h * gk_x[i]);
        const R hi = f(c + h * gk_x[i]);
        k15 += gk_wk[i] * (lo + hi);
        if (i % 2 == 1) g7 += gk_wg[i / 2] * (lo + hi);
    }
    k15 *= h;
    g7 *= h;
    err = std::abs(k15 - g7);
    return k15;
}

}  // namespace detail

struct QuadResult {
    std::complex<double> value;
    double error_estimate;
    bool converged;
};

template <typename F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                              double rel_tol = 1e-12, int max_panels = 4000) {
    struct Panel {
        double a, b, err;
        std::complex<double> val;
    };
    std::vector<Panel> panels;
    double e0 = 0.0;
    std::complex<double> v0 = detail::gk15(f, a, b, e0);
    panels.push_back({a, b, e0, v0});

    for (;;) {
        std::complex<double> total = 0.0;
        double err = 0.0;
        for (const auto& p : panels) {
            total += p.val;
            err += p.err;
        }
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (err <= tol) return {total, err, true};
        if (static_cast<int>(panels.size()) >= max_panels) return {total, err, false};

        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& p, const Panel& q) { return p.err < q.err; });
        const Panel w = *worst;
        panels.erase(worst);
        const double mid = 0.5 * (w.a + w.b);
        double e1 = 0.0, e2 = 0.0;
        std::complex<double> v1 = detail::gk15(f, w.a, mid, e1);
        std::complex<double> v2 = detail::gk15(f, mid, w.b, e2);
        panels.push_back({w.a, mid, e1, v1});
        panels.push_back({mid, w.b, e2, v2});
    }
}

template <typename F>
std::complex<double> integrate_or_throw(const F& f, double a, double b, double abs_tol,
                                        double rel_tol = 1e-12, int max_panels = 4000) {
    const QuadResult r = integrate_adaptive(f, a, b, abs_tol, rel_tol, max_panels);
    if (!r.converged)
        throw integration_error("adaptive quadrature did not converge", r.error_estimate);
    return r.value;
}

// Least-squares slope of log(y) against t; used for decay-rate fits.
inline double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const auto n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
    }
    return -(n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace cpforce
