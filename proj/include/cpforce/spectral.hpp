#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "cpforce/errors.hpp"
#include "cpforce/vec3.hpp"

namespace cpforce {

// Spectral model of the atom-field coupling: one Lorentzian mode of
// mid-frequency omega_nu and FWHM gamma_nu on top of a flat Markovian
// residual continuum. Position dependence enters through g(z, omega_nu)
// and its analytic gradient only; the builtin profiles are 1D in z, force
// vectors carry the gradient in their z component.

enum class ProfileKind { standing_wave, gaussian, constant };

class SpatialProfile {
  public:
    static SpatialProfile standing_wave(double g0, double k) {
        if (g0 < 0.0 || k <= 0.0)
            throw argument_error("standing_wave profile needs g0 >= 0 and k > 0");
        SpatialProfile p;
        p.kind_ = ProfileKind::standing_wave;
        p.g0_ = g0;
        p.k_ = k;
        return p;
    }
    static SpatialProfile gaussian(double g0, double z0, double w) {
        if (g0 < 0.0 || w <= 0.0)
            throw argument_error("gaussian profile needs g0 >= 0 and w > 0");
        SpatialProfile p;
        p.kind_ = ProfileKind::gaussian;
        p.g0_ = g0;
        p.z0_ = z0;
        p.w_ = w;
        return p;
    }
    static SpatialProfile constant(double g0) {
        if (g0 < 0.0) throw argument_error("constant profile needs g0 >= 0");
        SpatialProfile p;
        p.kind_ = ProfileKind::constant;
        p.g0_ = g0;
        return p;
    }

    ProfileKind kind() const { return kind_; }
    double amplitude() const { return g0_; }
    double wavenumber() const { return k_; }
    double center() const { return z0_; }
    double width() const { return w_; }

    // standing wave lives on (0, pi/k) where sin(kz) >= 0
    bool contains(double z) const {
        if (kind_ == ProfileKind::standing_wave)
            return z > 0.0 && z < std::numbers::pi / k_;
        return std::isfinite(z);
    }

    // strictly interior: gradients need room for the domain check
    bool interior(double z) const { return contains(z); }

    double length_scale() const {
        switch (kind_) {
            case ProfileKind::standing_wave: return 1.0 / k_;
            case ProfileKind::gaussian: return w_;
            case ProfileKind::constant: return 1.0;
        }
        return 1.0;
    }

    // g(z, omega_nu)
    double value(double z) const {
        require_inside(z);
        switch (kind_) {
            case ProfileKind::standing_wave: return g0_ * std::sin(k_ * z);
            case ProfileKind::gaussian:
                return g0_ * std::exp(-0.5 * (z - z0_) * (z - z0_) / (w_ * w_));
            case ProfileKind::constant: return g0_;
        }
        return 0.0;
    }

    // dg/dz, exact derivative of value()
    double gradient(double z) const {
        require_inside(z);
        switch (kind_) {
            case ProfileKind::standing_wave: return g0_ * k_ * std::cos(k_ * z);
            case ProfileKind::gaussian:
                return -g0_ * (z - z0_) / (w_ * w_) *
                       std::exp(-0.5 * (z - z0_) * (z - z0_) / (w_ * w_));
            case ProfileKind::constant: return 0.0;
        }
        return 0.0;
    }

  private:
    void require_inside(double z) const {
        if (!contains(z))
            throw domain_error("position z=" + std::to_string(z) + " outside profile domain");
    }

    ProfileKind kind_ = ProfileKind::constant;
    double g0_ = 0.0;
    double k_ = 1.0;
    double z0_ = 0.0;
    double w_ = 1.0;
};

struct ModeSpec {
    double omega_nu = 0.0;  // mid-frequency (rad/s)
    double gamma_nu = 0.0;  // FWHM (rad/s)
    SpatialProfile profile = SpatialProfile::constant(0.0);  // g(z, omega_nu)
    double width_ratio_max = 0.1;  // enforce gamma_nu < width_ratio_max * omega_nu

    void validate() const {
        if (!(omega_nu > 0.0)) throw argument_error("mode: omega_nu must be positive");
        if (!(gamma_nu > 0.0)) throw argument_error("mode: gamma_nu must be positive");
        if (!(gamma_nu < width_ratio_max * omega_nu))
            throw argument_error("mode: gamma_nu must be well below omega_nu (ratio limit " +
                                 std::to_string(width_ratio_max) + ")");
    }
};

// How the configured level-shift input is interpreted, see primed_level().
//   residual : delta_bg is the residual-field shift itself.
//   full_pv  : delta_bg is the full-spectrum principal-value integral; the
//              Lorentzian mode's dispersive part is added back analytically
//              and the shift is resolved self-consistently.
enum class ShiftModel { residual, full_pv };

struct ResidualBackground {
    double g_prime_sq = 0.0;  // flat residual spectral density g'^2 (rad/s)
    double delta_bg = 0.0;    // configured level-shift input (rad/s)
    ShiftModel shift_model = ShiftModel::residual;
    // optional full decay rate Gamma_1 at the shifted transition frequency;
    // when unset it defaults to gamma_bg() plus the mode's Lorentzian tail,
    // which makes the residual rate exactly gamma_bg().
    std::optional<double> gamma1_total;

    double gamma_bg() const { return 2.0 * std::numbers::pi * g_prime_sq; }

    static ResidualBackground from_rate(double gamma_bg_rate, double delta_bg_shift = 0.0) {
        ResidualBackground bg;
        bg.g_prime_sq = gamma_bg_rate / (2.0 * std::numbers::pi);
        bg.delta_bg = delta_bg_shift;
        return bg;
    }

    void validate() const {
        if (g_prime_sq < 0.0) throw argument_error("background: g_prime_sq must be >= 0");
        if (gamma1_total && *gamma1_total < 0.0)
            throw argument_error("background: gamma1_total must be >= 0");
    }
};

// Markov-consistency bound on the residual: its weight over one line
// spacing must stay far below the mode weight Omega_R^2/4.
inline bool markov_consistent(const ResidualBackground& bg, double rabi, double line_spacing,
                              double margin = 0.1) {
    return bg.gamma_bg() * line_spacing <= margin * 0.5 * rabi * rabi;
}

// Lorentzian line shape, unit peak: (g/2)^2 / ((w - w0)^2 + (g/2)^2)
inline double lorentzian(double omega, double omega_nu, double gamma_nu) {
    const double hw = 0.5 * gamma_nu;
    const double d = omega - omega_nu;
    return hw * hw / (d * d + hw * hw);
}

// g^2(z, omega): Lorentzian mode part plus flat residual
inline double g_squared(const ModeSpec& mode, const ResidualBackground& bg, double z,
                        double omega) {
    if (!(omega > 0.0)) throw domain_error("g_squared: omega must be positive");
    const double gz = mode.profile.value(z);
    return gz * gz * lorentzian(omega, mode.omega_nu, mode.gamma_nu) + bg.g_prime_sq;
}

// vacuum Rabi frequency Omega_R(z) = sqrt(2 pi gamma_nu g^2(z, omega_nu))
inline double rabi_frequency(const ModeSpec& mode, double z) {
    const double gz = mode.profile.value(z);
    return std::sqrt(2.0 * std::numbers::pi * mode.gamma_nu) * gz;
}

// grad Omega_R = sqrt(2 pi gamma_nu) grad g; z component only
inline Vec3 grad_rabi(const ModeSpec& mode, double z) {
    if (!mode.profile.interior(z))
        throw domain_error("grad_rabi: position not strictly inside the profile domain");
    return {0.0, 0.0, std::sqrt(2.0 * std::numbers::pi * mode.gamma_nu) * mode.profile.gradient(z)};
}

// g(z,omega_nu) * grad g(z,omega_nu); equals rabi*grad_rabi/(2 pi gamma_nu)
inline Vec3 g_grad_g(const ModeSpec& mode, double z) {
    if (!mode.profile.interior(z))
        throw domain_error("g_grad_g: position not strictly inside the profile domain");
    return {0.0, 0.0, mode.profile.value(z) * mode.profile.gradient(z)};
}

}  // namespace cpforce
