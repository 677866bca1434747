#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "cpforce/dynamics.hpp"
#include "cpforce/errors.hpp"
#include "cpforce/quadrature.hpp"
#include "cpforce/spectral.hpp"
#include "cpforce/vec3.hpp"

namespace cpforce {

// Brute-force reference: the field continuum is discretized on a frequency
// grid and the coupled amplitude equations are integrated directly with
// fixed-step RK4 (bit-reproducible). The Lorentzian mode and the flat
// residual are discretized as two independent channels sharing the grid;
// their spectral densities add, which is exactly the flat-addition form of
// the total g^2, while the initial photon wavepacket lives on the mode line.
// Amplitudes carry sqrt(trapezoid weight) so the discretized Hamiltonian is
// Hermitian and the total norm is conserved up to integrator error. The
// rotating frame at omega_nu removes the optical phases; only detunings
// enter the integrator.

struct FrequencyGrid {
    double omega_min = 0.0;
    double omega_max = 0.0;
    std::size_t n_points = 0;  // odd; omega_nu sits on the center node
    std::vector<double> nodes;
    std::vector<double> weights;  // trapezoid

    double spacing() const { return (omega_max - omega_min) / double(n_points - 1); }
    double half_width() const { return 0.5 * (omega_max - omega_min); }

    static FrequencyGrid around_mode(const ModeSpec& mode, double half_width_gammas = 40.0,
                                     std::size_t n = 4001) {
        if (n < 3 || n % 2 == 0)
            throw argument_error("frequency grid needs an odd node count >= 3");
        FrequencyGrid g;
        const double half = half_width_gammas * mode.gamma_nu;
        g.omega_min = mode.omega_nu - half;
        g.omega_max = mode.omega_nu + half;
        g.n_points = n;
        g.nodes.resize(n);
        g.weights.resize(n);
        const double h = g.spacing();
        for (std::size_t i = 0; i < n; ++i) {
            g.nodes[i] = g.omega_min + double(i) * h;
            g.weights[i] = h;
        }
        g.nodes[(n - 1) / 2] = mode.omega_nu;  // exact center
        g.weights.front() = 0.5 * h;
        g.weights.back() = 0.5 * h;
        g.validate_for(mode);
        return g;
    }

    void validate_for(const ModeSpec& mode) const {
        if (omega_min > mode.omega_nu - 10.0 * mode.gamma_nu ||
            omega_max < mode.omega_nu + 10.0 * mode.gamma_nu)
            throw grid_error("frequency window must contain omega_nu +- 10 gamma_nu");
        if (spacing() > mode.gamma_nu / 20.0)
            throw grid_error("frequency spacing must not exceed gamma_nu/20");
        if (omega_min <= 0.0)
            throw grid_error("frequency window extends to nonpositive frequencies");
    }
};

struct ContinuumState {
    cdouble psi1{};
    std::vector<cdouble> mode_amps;  // sqrt(weight)-scaled mode-channel amplitudes
    std::vector<cdouble> bg_amps;    // same for the flat residual channel (empty if none)
    double t = 0.0;

    double norm_sq() const {
        double s = std::norm(psi1);
        for (const auto& a : mode_amps) s += std::norm(a);
        for (const auto& b : bg_amps) s += std::norm(b);
        return s;
    }
};

class OracleSystem {
  public:
    OracleSystem(const ModeSpec& mode, const ResidualBackground& bg, const AtomSpec& atom,
                 double z, FrequencyGrid grid)
        : grid_(std::move(grid)),
          gamma_nu_(mode.gamma_nu),
          omega_nu_(mode.omega_nu),
          delta_bare_(mode.omega_nu - atom.omega_10),
          mag_im_(atom.mag_im) {
        grid_.validate_for(mode);
        const double g_nu = mode.profile.value(z);
        rabi_ = rabi_frequency(mode, z);
        grad_rabi_ = grad_rabi(mode, z);
        grad_g_ = (1.0 / std::sqrt(2.0 * std::numbers::pi * mode.gamma_nu)) * grad_rabi_;
        has_bg_ = bg.g_prime_sq > 0.0;

        const std::size_t n = grid_.n_points;
        delta_omega_.resize(n);
        sqrt_l_.resize(n);
        coupling_mode_.resize(n);
        fw_el_.resize(n);
        fw_mag_.resize(n);
        const double gb = std::sqrt(bg.g_prime_sq);
        coupling_bg_.resize(has_bg_ ? n : 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = grid_.nodes[i];
            const double sw = std::sqrt(grid_.weights[i]);
            const double l = lorentzian(w, omega_nu_, gamma_nu_);
            delta_omega_[i] = w - omega_nu_;
            sqrt_l_[i] = std::sqrt(l);
            coupling_mode_[i] = sw * g_nu * sqrt_l_[i];
            fw_el_[i] = sw * sqrt_l_[i];
            fw_mag_[i] = (g_nu > 0.0) ? sw * w * sqrt_l_[i] / g_nu : 0.0;
            if (has_bg_) coupling_bg_[i] = sw * gb;
        }
    }

    const FrequencyGrid& grid() const { return grid_; }
    double rabi() const { return rabi_; }
    double delta_bare() const { return delta_bare_; }
    double gamma_nu() const { return gamma_nu_; }
    double omega_nu() const { return omega_nu_; }
    bool has_background() const { return has_bg_; }
    double max_step() const {
        return 0.05 / std::max({rabi_, std::abs(delta_bare_), grid_.half_width()});
    }

    // |theta> wavepacket: cos(theta) on the atom, sin(theta) spread over the
    // mode line with amplitude sqrt(2/(pi gamma_nu)) sqrt(L(omega)); the
    // residual channel starts in vacuum. The field sector is rescaled to carry
    // exactly sin^2(theta) so the total norm is 1 and the sector split matches
    // |theta> (the rescaling absorbs the window/discretization correction);
    // errors if the discrete line weight strays more than 1% from the
    // continuum value over the window.
    ContinuumState init_state(double theta) const {
        if (theta < 0.0 || theta > std::numbers::pi)
            throw argument_error("init_state: theta must lie in [0, pi]");
        const std::size_t n = grid_.n_points;
        ContinuumState st;
        st.psi1 = std::cos(theta);
        st.mode_amps.resize(n);
        st.bg_amps.assign(has_bg_ ? n : 0, cdouble{});
        st.t = 0.0;

        const double amp = std::sqrt(2.0 / (std::numbers::pi * gamma_nu_)) * std::sin(theta);
        double discrete_line = 0.0;  // discrete integral of L over the window
        double field = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sw = std::sqrt(grid_.weights[i]);
            st.mode_amps[i] = amp * sw * sqrt_l_[i];
            field += std::norm(st.mode_amps[i]);
            discrete_line += grid_.weights[i] * sqrt_l_[i] * sqrt_l_[i];
        }
        const double hw = 0.5 * gamma_nu_;
        const double continuum_line =
            hw * (std::atan((grid_.omega_max - omega_nu_) / hw) -
                  std::atan((grid_.omega_min - omega_nu_) / hw));
        if (std::abs(discrete_line - continuum_line) > 0.01 * continuum_line)
            throw grid_error("init_state: grid too coarse, line-weight discretization error > 1%");

        if (field > 0.0) {
            const double want = std::sin(theta) * std::sin(theta);
            const double rescale = std::sqrt(want / field);
            for (auto& a : st.mode_amps) a *= rescale;
        }
        return st;
    }

    // RK4 with fixed step dt from state.t to t_end (t_end rounded to a whole
    // number of steps). The rotating-frame equations are
    //   d psi1 / dt = +i Delta psi1 - i sum_c G_c a_c
    //   d a_c   / dt = -i (omega - omega_nu) a_c - i G_c psi1 .
    void evolve(ContinuumState& st, double dt, double t_end) const {
        if (!(dt > 0.0) || dt > max_step() * (1.0 + 1e-12))
            throw argument_error("evolve: dt must satisfy dt <= 0.05/max(rabi, |Delta|, half-width)");
        const double horizon = t_end - st.t;
        if (horizon < 0.0) throw argument_error("evolve: t_end precedes current time");
        const double recurrence = 2.0 * std::numbers::pi / grid_.spacing();
        if (t_end > 0.5 * recurrence)
            throw grid_error("evolve: horizon exceeds half the grid recurrence time 2 pi/spacing");
        const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
        if (steps == 0) return;
        const double h = horizon / double(steps);

        const double norm0 = st.norm_sq();
        const std::size_t n = grid_.n_points;
        Work w(n, has_bg_);
        std::vector<cdouble> y(w.k1.size());
        y[0] = st.psi1;
        for (std::size_t i = 0; i < n; ++i) y[1 + i] = st.mode_amps[i];
        if (has_bg_)
            for (std::size_t i = 0; i < n; ++i) y[1 + n + i] = st.bg_amps[i];
        for (std::size_t s = 0; s < steps; ++s) rk4_step(y.data(), h, w);
        st.psi1 = y[0];
        for (std::size_t i = 0; i < n; ++i) st.mode_amps[i] = y[1 + i];
        if (has_bg_)
            for (std::size_t i = 0; i < n; ++i) st.bg_amps[i] = y[1 + n + i];
        st.t = t_end;
        if (std::abs(st.norm_sq() - norm0) > 1e-6)
            throw instability_error("evolve: norm drift above 1e-6");
    }

    // Electric and magnetic force functionals of the current state. The
    // magnetic part uses the analytic time derivative of psi1^* psi0 from the
    // equations of motion, not finite differences.
    std::pair<Vec3, Vec3> force_from_state(const ContinuumState& st) const {
        const std::size_t n = grid_.n_points;
        cdouble s_el = 0.0;
        for (std::size_t i = 0; i < n; ++i) s_el += fw_el_[i] * st.mode_amps[i];
        const Vec3 f_el = -2.0 * (std::conj(st.psi1) * s_el).real() * grad_g_;

        // d/dt psi1 and d/dt a_i via the equations of motion
        cdouble acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += coupling_mode_[i] * st.mode_amps[i];
        if (has_bg_)
            for (std::size_t i = 0; i < n; ++i) acc += coupling_bg_[i] * st.bg_amps[i];
        const cdouble dpsi1 = cdouble(0.0, 1.0) * (delta_bare_ * st.psi1) - cdouble(0.0, 1.0) * acc;
        cdouble s_mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cdouble da = cdouble(0.0, -1.0) * (delta_omega_[i] * st.mode_amps[i] +
                                                     coupling_mode_[i] * st.psi1);
            s_mag += fw_mag_[i] * (std::conj(st.psi1) * da + std::conj(dpsi1) * st.mode_amps[i]);
        }
        const Vec3 f_mag = -(2.0 / std::numbers::pi) * s_mag.imag() * mag_im_;
        return {f_el, f_mag};
    }

  private:
    struct Work {
        std::vector<cdouble> k1, k2, k3, k4, tmp;
        explicit Work(std::size_t n, bool bg) {
            const std::size_t len = 1 + n * (bg ? 2 : 1);
            k1.resize(len);
            k2.resize(len);
            k3.resize(len);
            k4.resize(len);
            tmp.resize(len);
        }
    };

    // flat layout: y[0] = psi1, y[1..n] = mode channel, y[n+1..2n] = bg channel
    void rhs(const cdouble* y, cdouble* d) const {
        const std::size_t n = grid_.n_points;
        cdouble acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += coupling_mode_[i] * y[1 + i];
        if (has_bg_)
            for (std::size_t i = 0; i < n; ++i) acc += coupling_bg_[i] * y[1 + n + i];
        d[0] = cdouble(0.0, 1.0) * (delta_bare_ * y[0]) - cdouble(0.0, 1.0) * acc;
        for (std::size_t i = 0; i < n; ++i)
            d[1 + i] = cdouble(0.0, -1.0) * (delta_omega_[i] * y[1 + i] + coupling_mode_[i] * y[0]);
        if (has_bg_)
            for (std::size_t i = 0; i < n; ++i)
                d[1 + n + i] =
                    cdouble(0.0, -1.0) * (delta_omega_[i] * y[1 + n + i] + coupling_bg_[i] * y[0]);
    }

    void rk4_step(cdouble* y, double h, Work& w) const {
        const std::size_t len = w.k1.size();
        rhs(y, w.k1.data());
        for (std::size_t i = 0; i < len; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
        rhs(w.tmp.data(), w.k2.data());
        for (std::size_t i = 0; i < len; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
        rhs(w.tmp.data(), w.k3.data());
        for (std::size_t i = 0; i < len; ++i) w.tmp[i] = y[i] + h * w.k3[i];
        rhs(w.tmp.data(), w.k4.data());
        const double h6 = h / 6.0;
        for (std::size_t i = 0; i < len; ++i)
            y[i] += h6 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }

    FrequencyGrid grid_;
    double gamma_nu_, omega_nu_, delta_bare_;
    double rabi_ = 0.0;
    Vec3 grad_rabi_{}, grad_g_{}, mag_im_{};
    bool has_bg_ = false;
    std::vector<double> delta_omega_, sqrt_l_, coupling_mode_, coupling_bg_, fw_el_, fw_mag_;
};

// ---------------------------------------------------------------------------
// Principal-value identity of the Lorentzian line:
//   PV int domega / [(wt - w)((w - wn)^2 + g^2/4)]
//     = (2 pi / g) (wt - wn) / ((wt - wn)^2 + g^2/4).
// The closed form is exact for the full-line integral; restricted to
// [0, infinity) it acquires an O(gamma/omega_nu)-suppressed truncation error,
// which the half_line domain exposes.

enum class PvDomain { symmetric_full, half_line };

struct PvResult {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline PvResult pv_identity(double omega_tilde, double omega_nu, double gamma_nu,
                            PvDomain domain = PvDomain::symmetric_full) {
    if (!(gamma_nu > 0.0)) throw argument_error("pv_identity: gamma_nu must be positive");
    const double c = 0.25 * gamma_nu * gamma_nu;
    const double d = omega_tilde - omega_nu;
    PvResult r;
    r.rhs = (2.0 * std::numbers::pi / gamma_nu) * d / (d * d + c);

    const auto f = [&](double w) {
        const double u = w - omega_nu;
        return u * u + c;
    };
    // symmetric-pair integrand; the excision limit s -> 0 is the analytic
    // derivative -2 f'(omega_tilde)/f^2
    const auto pair_integrand = [&](double s) {
        if (s < 1e-12 * (std::abs(omega_tilde) + gamma_nu))
            return 2.0 * 2.0 * (omega_tilde - omega_nu) / (f(omega_tilde) * f(omega_tilde));
        return (1.0 / f(omega_tilde - s) - 1.0 / f(omega_tilde + s)) / s;
    };
    const double scale_tol = 1e-10 * 2.0 * std::numbers::pi / (gamma_nu * gamma_nu);

    if (domain == PvDomain::symmetric_full) {
        // map s = x/(1-x) * S, one adaptive pass over x in [0, 1)
        const double s_scale = std::max({std::abs(d), gamma_nu, 1.0});
        const auto mapped = [&](double x) {
            const double om = 1.0 - x;
            const double s = s_scale * x / om;
            return cdouble(pair_integrand(s) * s_scale / (om * om), 0.0);
        };
        r.lhs = integrate_or_throw(mapped, 0.0, 1.0, scale_tol, 1e-10, 8000).real();
    } else {
        // pairs cover [0, 2 omega_tilde]; the remainder above 2 omega_tilde is pole-free
        const auto mapped_pairs = [&](double s) { return cdouble(pair_integrand(s), 0.0); };
        const double lhs_pairs =
            integrate_or_throw(mapped_pairs, 0.0, omega_tilde, scale_tol, 1e-10, 8000).real();
        const double v_scale = std::max(omega_tilde, gamma_nu);
        const auto tail = [&](double x) {
            const double om = 1.0 - x;
            const double v = v_scale * x / om;  // v = w - 2 omega_tilde
            const double w = 2.0 * omega_tilde + v;
            return cdouble(1.0 / ((omega_tilde - w) * f(w)) * v_scale / (om * om), 0.0);
        };
        const double lhs_tail = integrate_or_throw(tail, 0.0, 1.0, scale_tol, 1e-10, 8000).real();
        r.lhs = lhs_pairs + lhs_tail;
    }
    return r;
}

}  // namespace cpforce
