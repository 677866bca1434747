#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "cpforce/errors.hpp"
#include "cpforce/spectral.hpp"
#include "cpforce/statics.hpp"
#include "cpforce/vec3.hpp"

namespace cpforce {

using cdouble = std::complex<double>;

// Time-dependent single-excitation dynamics: the upper-level amplitude
// psi_1(t) solves a damped-oscillator equation once the residual field is
// treated in Markov approximation, with the Lorentzian mode kept exactly.
// All times below are measured from the preparation time t0.

struct AtomSpec {
    double omega_10 = 0.0;  // bare transition frequency (rad/s), vacuum Lamb shift absorbed
    double e0 = 0.0;        // ground-level reference energy
    ResidualBackground background;
    bool dipole_real = true;  // required by the electric/magnetic force formulas
    // geometry vectors for the magnetic force, d_10 x [curl Im/Re G(1)(omega_nu) d_01],
    // in units that make omega_nu*gamma_nu*mag a force. Zero disables the magnetic part.
    Vec3 mag_im{};
    Vec3 mag_re{};

    double e1() const { return e0 + omega_10; }

    void validate() const {
        if (!(omega_10 > 0.0)) throw argument_error("atom: omega_10 must be positive");
        background.validate();
    }
};

// thresholds used by the regime predicates; "much less" reads as a factor 10
inline constexpr double kStrongMargin = 0.1;
inline constexpr double kWeakMargin = 10.0;

struct LevelData {
    double delta_shift = 0.0;       // residual-field level shift of the upper state
    double gamma_prime = 0.0;       // residual-field width Gamma'_1
    double omega_tilde = 0.0;       // shifted transition frequency omega_10 + delta_shift
    double detuning_shifted = 0.0;  // Delta(rA) = Delta - delta_shift
    double gamma_total = 0.0;       // gamma = (gamma_nu + Gamma'_1)/2
    double gamma1_full = 0.0;       // full upper-level rate Gamma_1 at omega_tilde
    double gamma_nu = 0.0;          // mode FWHM, carried along for the force formulas
    double omega_nu = 0.0;          // mode mid-frequency
    double rabi = 0.0;

    bool gamma_prime_negative = false;  // configured Gamma_1 below the mode-subtraction term
    int iterations = 0;                 // fixed-point steps used (full_pv model only)

    // regime predicates
    bool weak_ok = false;            // spectrally wide mode or large detuning
    bool moderate_ok = false;        // gamma_nu, Gamma'_1 <= 2 Omega_R and detuning window
    bool strong_ok = false;          // strict strong-coupling inequalities
    bool small_detuning = false;     // |Delta(rA)| << gamma_nu/2  -> gamma ~ gamma_nu/2
    bool detuning_window = false;    // gamma_nu/2 << |Delta(rA)| << 2 Omega_R^2/gamma_nu
};

namespace detail {

inline double mode_shift_term(double rabi, double gamma_nu, double det) {
    return 0.25 * rabi * rabi * det / (det * det + 0.25 * gamma_nu * gamma_nu);
}

inline double mode_rate_term(double rabi, double gamma_nu, double det) {
    return 0.25 * rabi * rabi * gamma_nu / (det * det + 0.25 * gamma_nu * gamma_nu);
}

inline void fill_regime_flags(LevelData& lv) {
    const double r = lv.rabi;
    const double ad = std::abs(lv.detuning_shifted);
    const double weak_det_scale = (lv.gamma_nu > 0.0) ? 2.0 * r * r / lv.gamma_nu
                                                      : std::numeric_limits<double>::infinity();
    lv.weak_ok = (lv.gamma_nu >= kWeakMargin * 2.0 * r) || (ad >= kWeakMargin * weak_det_scale);
    lv.moderate_ok = (lv.gamma_nu <= 2.0 * r) && (lv.gamma_prime <= 2.0 * r) &&
                     (ad < weak_det_scale);
    lv.strong_ok = (lv.gamma_nu <= kStrongMargin * 2.0 * r) &&
                   (lv.gamma_prime <= kStrongMargin * 2.0 * r) &&
                   (ad <= kStrongMargin * weak_det_scale);
    lv.small_detuning = ad < 0.5 * lv.gamma_nu;
    lv.detuning_window = (ad > 0.5 * lv.gamma_nu) && (ad < weak_det_scale);
}

}  // namespace detail

// Residual-field shift/width of the upper level, with the shifted detuning
// resolved per the configured shift model:
//  - residual: delta_shift is the configured background shift itself.
//  - full_pv : delta_shift = delta_bg + mode dispersive term at the shifted
//              detuning; solved by fixed-point iteration (the definitions are
//              simultaneous). Tolerance 1e-12*omega_10, at most 100 steps.
// The full rate Gamma_1 defaults to gamma_bg plus the mode's Lorentzian tail
// at the shifted detuning, so Gamma'_1 reduces to gamma_bg exactly; a
// configured gamma1_total overrides it (and may drive Gamma'_1 negative,
// which is flagged, not fatal).
inline LevelData primed_level(const AtomSpec& atom, const ModeSpec& mode,
                              const CouplingPoint& point) {
    const ResidualBackground& bg = atom.background;
    const double rabi = point.rabi;
    const double delta_bare = point.detuning;

    LevelData lv;
    lv.rabi = rabi;
    lv.gamma_nu = mode.gamma_nu;
    lv.omega_nu = mode.omega_nu;

    if (bg.shift_model == ShiftModel::residual) {
        lv.delta_shift = bg.delta_bg;
        lv.iterations = 0;
    } else {
        double x = bg.delta_bg;
        bool converged = false;
        const double tol = 1e-12 * atom.omega_10;
        for (int it = 1; it <= 100; ++it) {
            const double next =
                bg.delta_bg + detail::mode_shift_term(rabi, mode.gamma_nu, delta_bare - x);
            lv.iterations = it;
            if (std::abs(next - x) <= tol) {
                x = next;
                converged = true;
                break;
            }
            x = next;
        }
        if (!converged)
            throw convergence_error(
                "primed_level: self-consistent shift did not converge in 100 steps "
                "(full_pv shift model outside its validity range)");
        lv.delta_shift = x;
    }

    lv.omega_tilde = atom.omega_10 + lv.delta_shift;
    lv.detuning_shifted = delta_bare - lv.delta_shift;

    const double mode_rate = detail::mode_rate_term(rabi, mode.gamma_nu, lv.detuning_shifted);
    if (bg.gamma1_total) {
        lv.gamma1_full = *bg.gamma1_total;
        lv.gamma_prime = lv.gamma1_full - mode_rate;
        lv.gamma_prime_negative = lv.gamma_prime < 0.0;
    } else {
        lv.gamma_prime = bg.gamma_bg();
        lv.gamma1_full = lv.gamma_prime + mode_rate;
    }
    lv.gamma_total = 0.5 * (mode.gamma_nu + lv.gamma_prime);

    detail::fill_regime_flags(lv);
    return lv;
}

// Test/bench hook: build a LevelData from raw shifted quantities.
inline LevelData make_level_data(double rabi, double gamma_nu, double detuning_shifted,
                                 double gamma_prime, double omega_nu = 0.0,
                                 double delta_shift = 0.0) {
    LevelData lv;
    lv.rabi = rabi;
    lv.gamma_nu = gamma_nu;
    lv.omega_nu = (omega_nu > 0.0) ? omega_nu : 100.0 * std::max(rabi, 1.0);
    lv.detuning_shifted = detuning_shifted;
    lv.delta_shift = delta_shift;
    lv.omega_tilde = lv.omega_nu - detuning_shifted;
    lv.gamma_prime = gamma_prime;
    lv.gamma1_full = gamma_prime + detail::mode_rate_term(rabi, gamma_nu, detuning_shifted);
    lv.gamma_total = 0.5 * (gamma_nu + gamma_prime);
    detail::fill_regime_flags(lv);
    return lv;
}

// friction coefficient of the amplitude oscillator: i Delta(rA) + (gamma_nu - Gamma'_1)/2
inline cdouble friction(const LevelData& lv) {
    return {0.5 * (lv.gamma_nu - lv.gamma_prime), lv.detuning_shifted};
}

// Exact characteristic roots. The square-root branch is normalized to
// Im(w) >= 0 so that the "+" root always carries the lower oscillation
// frequency (the upper dressed state), independent of the detuning sign;
// on the real axis (overdamped) the principal branch is kept.
inline std::pair<cdouble, cdouble> modal_roots(const LevelData& lv, double rabi) {
    const cdouble d = friction(lv);
    cdouble w = std::sqrt(d * d - rabi * rabi);
    if (w.imag() < 0.0) w = -w;
    return {-0.5 * d - 0.5 * w, -0.5 * d + 0.5 * w};
}

// moderately-strong oscillation frequency, Omega^2 = Omega_R^2 + Delta^2 - (gamma_nu-Gamma'_1)^2/4
inline double omega_moderate(const LevelData& lv, double rabi) {
    const double eps = 0.5 * (lv.gamma_nu - lv.gamma_prime);
    const double arg = rabi * rabi + lv.detuning_shifted * lv.detuning_shifted - eps * eps;
    if (arg <= 0.0)
        throw regime_error("omega_moderate: damping exceeds the coupled splitting (overdamped)");
    return std::sqrt(arg);
}

// strong-limit root approximants: -friction/2 -+ i Omega/2
inline std::pair<cdouble, cdouble> roots_strong(const LevelData& lv, double rabi) {
    const cdouble d = friction(lv);
    const double om = omega_moderate(lv, rabi);
    return {-0.5 * d - cdouble(0.0, 0.5 * om), -0.5 * d + cdouble(0.0, 0.5 * om)};
}

// weak-limit root approximants: the fast root -friction and the slow
// decay/shift root from the Taylor expansion of the square root
inline std::pair<cdouble, cdouble> roots_weak(const LevelData& lv, double rabi) {
    const double det = lv.detuning_shifted;
    const double den = det * det + 0.25 * lv.gamma_nu * lv.gamma_nu;
    const cdouble fast = -friction(lv);
    const cdouble slow(-0.125 * rabi * rabi * lv.gamma_nu / den,
                       0.25 * rabi * rabi * det / den);
    return {fast, slow};
}

inline constexpr double kDegenerateRootEps = 1e-10;

inline bool roots_degenerate(const std::pair<cdouble, cdouble>& roots, double rabi) {
    const double scale = std::max({std::abs(roots.first), std::abs(roots.second), rabi});
    return std::abs(roots.first - roots.second) <= kDegenerateRootEps * scale;
}

// c_pm = [Omega_mp cos th + (i/2) Omega_R sin th] / (Omega_mp - Omega_pm)
inline std::pair<cdouble, cdouble> amplitude_coeffs(double theta,
                                                    const std::pair<cdouble, cdouble>& roots,
                                                    double rabi) {
    if (roots_degenerate(roots, rabi))
        throw degenerate_coupling_error(
            "amplitude_coeffs: repeated roots; use the confluent solution");
    const cdouble src(0.0, 0.5 * rabi * std::sin(theta));
    const double ct = std::cos(theta);
    const cdouble cp = (roots.second * ct + src) / (roots.second - roots.first);
    const cdouble cm = (roots.first * ct + src) / (roots.first - roots.second);
    return {cp, cm};
}

// strong-limit coefficient forms: c+ = cos th_c cos(th - th_c), c- = -sin th_c sin(th - th_c)
inline std::pair<double, double> coeffs_strong(double theta, double theta_c) {
    return {std::cos(theta_c) * std::cos(theta - theta_c),
            -std::sin(theta_c) * std::sin(theta - theta_c)};
}

// Everything needed to evaluate psi_1(t), the q/s kernels and the forces.
struct ModalSolution {
    cdouble root_plus{};
    cdouble root_minus{};
    cdouble c_plus{};
    cdouble c_minus{};
    LevelData level;
    CouplingPoint point;  // built with the shifted detuning
    double theta = 0.0;
    bool degenerate = false;
    cdouble confl_a{};  // phi_1 = (a + b t) exp(root_plus t) at a double root
    cdouble confl_b{};
};

inline ModalSolution make_modal_solution(const LevelData& lv, double rabi, double theta) {
    if (theta < 0.0 || theta > std::numbers::pi)
        throw argument_error("make_modal_solution: theta must lie in [0, pi]");
    ModalSolution sol;
    sol.level = lv;
    sol.point = make_point(rabi, lv.detuning_shifted);
    sol.theta = theta;
    auto roots = modal_roots(lv, rabi);
    sol.root_plus = roots.first;
    sol.root_minus = roots.second;
    if (roots_degenerate(roots, rabi)) {
        sol.degenerate = true;
        sol.confl_a = std::cos(theta);
        sol.confl_b = -cdouble(0.0, 0.5 * rabi * std::sin(theta)) - sol.root_plus * std::cos(theta);
    } else {
        auto c = amplitude_coeffs(theta, roots, rabi);
        sol.c_plus = c.first;
        sol.c_minus = c.second;
    }
    return sol;
}

// oscillator part phi_1(t), t measured from t0
inline cdouble phi1(const ModalSolution& sol, double t) {
    if (sol.degenerate)
        return (sol.confl_a + sol.confl_b * t) * std::exp(sol.root_plus * t);
    return sol.c_plus * std::exp(sol.root_plus * t) + sol.c_minus * std::exp(sol.root_minus * t);
}

// full amplitude psi_1(t) = exp{[-i(E1 + delta_shift) - Gamma'_1/2] t} phi_1(t)
inline cdouble psi1(const ModalSolution& sol, double e1, double t) {
    if (t < 0.0) throw argument_error("psi1: t must not precede the preparation time");
    const cdouble damp(-0.5 * sol.level.gamma_prime, -(e1 + sol.level.delta_shift));
    return std::exp(damp * t) * phi1(sol, t);
}

// upper-level population |psi_1|^2 (phase-invariant)
inline double population(const ModalSolution& sol, double t) {
    const double mag = std::abs(phi1(sol, t));
    return mag * mag * std::exp(-sol.level.gamma_prime * t);
}

// q(t) = exp{[-i Delta(rA) - (gamma_nu + Gamma'_1)/2] t} phi_1^*(t)
inline cdouble q_factor(const ModalSolution& sol, double t) {
    const cdouble damp(-0.5 * (sol.level.gamma_nu + sol.level.gamma_prime),
                       -sol.level.detuning_shifted);
    return std::exp(damp * t) * std::conj(phi1(sol, t));
}

// s(omega, t): four-term kernel over root pairs (a, b),
//   c_a^* c_b [e^{(-G' + W_a^* + W_b) t} - e^{(i[wt - w] - G'/2 + W_a^*) t}]
//             / (w - wt + i G'/2 - i W_b)
inline cdouble s_kernel(const ModalSolution& sol, double omega, double t) {
    if (sol.degenerate)
        throw regime_error("s_kernel: confluent (repeated-root) solution has no four-term form");
    const double gp = sol.level.gamma_prime;
    const double wt = sol.level.omega_tilde;
    const double scale = std::max({std::abs(omega), std::abs(wt), sol.point.rabi});
    const cdouble cs[2] = {sol.c_plus, sol.c_minus};
    const cdouble ws[2] = {sol.root_plus, sol.root_minus};
    cdouble total = 0.0;
    for (int a = 0; a < 2; ++a) {
        const cdouble wa_conj = std::conj(ws[a]);
        const cdouble decaying = std::exp((cdouble(-0.5 * gp, wt - omega) + wa_conj) * t);
        for (int b = 0; b < 2; ++b) {
            const cdouble den = cdouble(omega - wt, 0.5 * gp) - cdouble(0.0, 1.0) * ws[b];
            if (std::abs(den) < 1e-14 * scale)
                throw pole_error("s_kernel: denominator collapsed onto the real axis");
            const cdouble persistent = std::exp((cdouble(-gp, 0.0) + wa_conj + ws[b]) * t);
            total += std::conj(cs[a]) * cs[b] * (persistent - decaying) / den;
        }
    }
    return total;
}

// correction factor C = [D^2 - (g - G'/2)^2/4] / [D^2 - (g - G'/2)^2/4 + Omega_R^2]
inline double correction_factor(const LevelData& lv, double rabi) {
    const double half = 0.5 * (lv.gamma_nu - 0.5 * lv.gamma_prime);
    const double num = lv.detuning_shifted * lv.detuning_shifted - half * half;
    return num / (num + rabi * rabi);
}

// small-detuning limit of the correction factor
inline double correction_factor_small_detuning(const LevelData& lv, double rabi) {
    const double q = 0.25 * lv.gamma_nu * lv.gamma_nu;
    return q / (q - rabi * rabi);
}

// large-detuning limit of the correction factor
inline double correction_factor_large_detuning(const LevelData& lv, double rabi) {
    const double d2 = lv.detuning_shifted * lv.detuning_shifted;
    return d2 / (d2 + rabi * rabi);
}

}  // namespace cpforce
