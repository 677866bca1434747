#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "cpforce/dynamics.hpp"
#include "cpforce/errors.hpp"
#include "cpforce/quadrature.hpp"
#include "cpforce/spectral.hpp"
#include "cpforce/statics.hpp"
#include "cpforce/vec3.hpp"

namespace cpforce {

// Resonant force components on the atom. Electric forces point along
// grad Omega_R; magnetic forces along the configured structure vector.
// Everything is per hbar = mu0 = 1 and time is measured from t0.
//
// The electric force has two equivalent representations:
//   force_el_general - q term plus numeric frequency integral of the s kernel
//   force_el_modal   - the same integral summed in closed form (residues of
//                      the Lorentzian poles), no quadrature
// They agree to the quadrature tolerance; the general path exists as an
// independent check and for spectral diagnostics.

namespace detail {

inline cdouble lorentzian_c(cdouble z, double omega_nu, double gamma_nu) {
    const double hw = 0.5 * gamma_nu;
    const cdouble d = z - omega_nu;
    return hw * hw / (d * d + hw * hw);
}

// shared assembly: F = -sin(theta) Re[q] grad_rabi + (rabi/(pi gamma_nu)) Re[S] grad_rabi
// with S the frequency integral of L(omega) s(omega, t)
inline Vec3 assemble_force_el(const ModalSolution& sol, const Vec3& grad_rabi, cdouble q,
                              cdouble s_integral) {
    const double term1 = -std::sin(sol.theta) * q.real();
    const double term2 =
        sol.point.rabi / (std::numbers::pi * sol.level.gamma_nu) * s_integral.real();
    return (term1 + term2) * grad_rabi;
}

}  // namespace detail

struct GeneralForceOptions {
    double core_half_width_gammas = 20.0;   // finely resolved window around omega_nu
    double tail_half_width_gammas = 2000.0; // Lorentzian tails integrated out to here
    double rel_tol = 1e-9;
    int max_panels = 6000;
};

// Electric force by direct frequency quadrature of the s kernel against the
// Lorentzian weight. The core window matches the mode line; the tails carry
// a ~1% share of the integral and are included so that this path agrees with
// the closed-form evaluation below.
inline Vec3 force_el_general(const ModalSolution& sol, const ModeSpec& mode,
                             const Vec3& grad_rabi, double t,
                             const GeneralForceOptions& opt = {}) {
    if (t < 0.0) throw argument_error("force_el_general: t must be >= 0");
    const double wn = mode.omega_nu;
    const double gn = mode.gamma_nu;
    const auto integrand = [&](double w) {
        return lorentzian(w, wn, gn) * s_kernel(sol, w, t);
    };
    const double abs_tol = 1e-12 * gn;
    cdouble total = 0.0;
    const double core = opt.core_half_width_gammas * gn;
    total += integrate_or_throw(integrand, wn - core, wn + core, abs_tol, opt.rel_tol,
                                opt.max_panels);
    // geometric panels for the 1/(w-wn)^2 tails
    double lo = core;
    while (lo < opt.tail_half_width_gammas * gn) {
        const double hi = std::min(4.0 * lo, opt.tail_half_width_gammas * gn);
        total += integrate_or_throw(integrand, wn + lo, wn + hi, abs_tol, opt.rel_tol,
                                    opt.max_panels);
        total += integrate_or_throw(integrand, wn - hi, wn - lo, abs_tol, opt.rel_tol,
                                    opt.max_panels);
        lo = hi;
    }
    return detail::assemble_force_el(sol, grad_rabi, q_factor(sol, t), total);
}

// Closed-form electric force: the frequency integral of L(omega) s(omega, t)
// evaluated by residues over the full line. Per root pair (a, b) with
// z_b = omega_tilde - i Gamma'/2 + i W_b:
//   persistent piece: E_ab [ (pi g/2)/(w_+ - z_b) + 2 pi i L(z_b) ]
//   mode-ringdown piece: -P_a e^{i(wt - w_-) t} (pi g/2)/(w_- - z_b)
// where w_pm = omega_nu +- i gamma_nu/2 are the Lorentzian poles.
inline Vec3 force_el_modal(const ModalSolution& sol, const Vec3& grad_rabi, double t,
                           bool check_regime = false) {
    if (t < 0.0) throw argument_error("force_el_modal: t must be >= 0");
    if (sol.degenerate)
        throw regime_error("force_el_modal: repeated roots, closed kernel form unavailable");
    if (check_regime && !sol.level.moderate_ok)
        throw regime_error("force_el_modal: moderately-strong coupling conditions violated");
    const double gn = sol.level.gamma_nu;
    const double gp = sol.level.gamma_prime;
    const double wt = sol.level.omega_tilde;
    const double wn = sol.level.omega_nu;
    const cdouble wpole_up(wn, 0.5 * gn);
    const cdouble wpole_dn(wn, -0.5 * gn);
    const cdouble cs[2] = {sol.c_plus, sol.c_minus};
    const cdouble ws[2] = {sol.root_plus, sol.root_minus};
    cdouble total = 0.0;
    for (int a = 0; a < 2; ++a) {
        const cdouble wa_conj = std::conj(ws[a]);
        const cdouble ringdown =
            std::exp((cdouble(-0.5 * gp, wt) + wa_conj - cdouble(0.0, 1.0) * wpole_dn) * t);
        for (int b = 0; b < 2; ++b) {
            const cdouble zb = cdouble(wt, -0.5 * gp) + cdouble(0.0, 1.0) * ws[b];
            const cdouble persistent = std::exp((cdouble(-gp, 0.0) + wa_conj + ws[b]) * t);
            cdouble piece = persistent * (0.5 * std::numbers::pi * gn / (wpole_up - zb) +
                                          cdouble(0.0, 2.0 * std::numbers::pi) *
                                              detail::lorentzian_c(zb, wn, gn));
            piece -= ringdown * 0.5 * std::numbers::pi * gn / (wpole_dn - zb);
            total += std::conj(cs[a]) * cs[b] * piece;
        }
    }
    return detail::assemble_force_el(sol, grad_rabi, q_factor(sol, t), total);
}

// Strong-coupling electric force,
//   F(t) = e^{-gamma t} (cos 2[th-th_c] + cot(2 th_c) sin 2[th-th_c] cos(Omega t)) F_+,
// evaluated in the pre-cancellation form that stays finite at th_c in {0, pi/2}.
inline Vec3 force_el_strong(const ModalSolution& sol, const Vec3& grad_rabi, double t,
                            bool check_regime = true) {
    if (t < 0.0) throw argument_error("force_el_strong: t must be >= 0");
    if (check_regime && !sol.level.strong_ok)
        throw regime_error("force_el_strong: strong-coupling inequalities violated; "
                           "use force_el_modal");
    const double theta_c = sol.point.theta_c;
    const double om = sol.point.omega;  // sqrt(Omega_R^2 + Delta(rA)^2)
    const double two_d = 2.0 * (sol.theta - theta_c);
    const double coef = std::sin(2.0 * theta_c) * std::cos(two_d) +
                        std::cos(2.0 * theta_c) * std::sin(two_d) * std::cos(om * t);
    return -0.5 * std::exp(-sol.level.gamma_total * t) * coef * grad_rabi;
}

// Magnetic force in the moderately-strong closed form: pure cross terms of the
// dressed components, structure vector mag_im, prefactor omega_nu gamma_nu Omega_R.
inline Vec3 force_mag_modal(const ModalSolution& sol, const AtomSpec& atom, const ModeSpec& mode,
                            double t, bool check_regime = false) {
    if (t < 0.0) throw argument_error("force_mag_modal: t must be >= 0");
    if (check_regime && !sol.level.moderate_ok)
        throw regime_error("force_mag_modal: moderately-strong coupling conditions violated");
    const double rabi = sol.point.rabi;
    const double om = omega_moderate(sol.level, rabi);
    const auto roots = roots_strong(sol.level, rabi);
    const auto c = amplitude_coeffs(sol.theta, roots, rabi);
    const double eps = 0.5 * (sol.level.gamma_nu - sol.level.gamma_prime);
    const double det = sol.level.detuning_shifted;
    const cdouble rot = std::exp(cdouble(0.0, -om * t));
    const cdouble bracket = std::conj(c.second) * c.first * rot / cdouble(det - om, -eps) -
                            std::conj(c.first) * c.second / rot / cdouble(det + om, -eps);
    const double scalar = -2.0 * (mode.omega_nu * mode.gamma_nu * rabi *
                                  std::exp(-sol.level.gamma_total * t) * bracket).real();
    return scalar * atom.mag_im;
}

// Strong-coupling limit of the magnetic force: purely oscillating,
//   F(t) = -e^{-gamma t} sin(2[th - th_c]) cos(Omega t) omega_nu gamma_nu mag_im,
// the analytic limit of force_mag_modal above. The conjugate contribution is
// already folded in (doubling convention "cc_doubled" in run metadata).
inline Vec3 force_mag_strong(const ModalSolution& sol, const AtomSpec& atom, const ModeSpec& mode,
                             double t, bool check_regime = true) {
    if (t < 0.0) throw argument_error("force_mag_strong: t must be >= 0");
    if (check_regime && !sol.level.strong_ok)
        throw regime_error("force_mag_strong: strong-coupling inequalities violated");
    const double scalar = -std::exp(-sol.level.gamma_total * t) *
                          std::sin(2.0 * (sol.theta - sol.point.theta_c)) *
                          std::cos(sol.point.omega * t) * mode.omega_nu * mode.gamma_nu;
    return scalar * atom.mag_im;
}

// Weak-coupling force for the initially excited atom: exponential decay of
// the perturbative resonant force, magnetic part identically zero.
//   F_10 = (Omega_R grad Omega_R / 2) Delta(rA) / (Delta(rA)^2 + (gamma_nu - Gamma_1)^2/4)
inline Vec3 force_weak(const LevelData& lv, double rabi, const Vec3& grad_rabi, double t,
                       bool check_regime = true) {
    if (t < 0.0) throw argument_error("force_weak: t must be >= 0");
    if (check_regime && !lv.weak_ok)
        throw regime_error("force_weak: weak-coupling conditions violated");
    const double det = lv.detuning_shifted;
    const double half = 0.5 * (lv.gamma_nu - lv.gamma1_full);
    const double f10 = 0.5 * rabi * det / (det * det + half * half);
    return std::exp(-lv.gamma1_full * t) * f10 * grad_rabi;
}

// Exponentially decaying dressed-state forces F_pm(t) = -+ 1/2 e^{-gamma t} grad Omega;
// at t = 0 these coincide with the static dressed forces at the shifted detuning.
inline std::pair<Vec3, Vec3> dressed_force_decay(const CouplingPoint& point, const LevelData& lv,
                                                 const Vec3& grad_rabi, double t) {
    if (t < 0.0) throw argument_error("dressed_force_decay: t must be >= 0");
    const Vec3 grad_omega = std::sin(2.0 * point.theta_c) * grad_rabi;
    const Vec3 plus = -0.5 * std::exp(-lv.gamma_total * t) * grad_omega;
    return {plus, -plus};
}

// Magnetic structure vector matched to the electric gradient scale: with the
// mode's Green-function resonance driving both contractions, the magnitude of
// d x [curl Im G d] tracks |grad(d Im G d)| = pi (g grad g) / omega_nu^2.
inline Vec3 matched_mag_im(const ModeSpec& mode, double z, Vec3 direction = {0.0, 1.0, 0.0}) {
    const Vec3 gg = g_grad_g(mode, z);
    return std::numbers::pi * gg.norm() / (mode.omega_nu * mode.omega_nu) * direction;
}

}  // namespace cpforce
