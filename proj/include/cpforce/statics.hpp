#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "cpforce/errors.hpp"
#include "cpforce/spectral.hpp"
#include "cpforce/vec3.hpp"

namespace cpforce {

// Dressed-state (static) picture: a two-level atom and one quasi-mode on the
// single-excitation subspace. Everything here is a pure function of the local
// Rabi frequency and the detuning Delta = omega_nu - omega_10.

// coupling angle, tan(2 theta_c) = -Omega_R / Delta with theta_c in [0, pi/2]
// and the branch fixed by sin(2 theta_c) >= 0
inline double coupling_angle(double rabi, double detuning) {
    if (rabi < 0.0) throw argument_error("coupling_angle: rabi must be >= 0");
    if (rabi == 0.0 && detuning == 0.0)
        throw degenerate_coupling_error("coupling angle undefined at zero coupling and zero detuning");
    return 0.5 * std::atan2(rabi, -detuning);
}

// local coupled quantities at a fixed position
struct CouplingPoint {
    double rabi = 0.0;      // Omega_R >= 0
    double detuning = 0.0;  // Delta = omega_nu - omega_10
    double theta_c = 0.0;   // coupling angle in [0, pi/2]
    double omega = 0.0;     // Omega = sqrt(Omega_R^2 + Delta^2)
};

inline CouplingPoint make_point(double rabi, double detuning) {
    CouplingPoint p;
    p.rabi = rabi;
    p.detuning = detuning;
    p.theta_c = coupling_angle(rabi, detuning);
    p.omega = std::hypot(rabi, detuning);
    return p;
}

struct DressedPair {
    double energy_plus = 0.0;
    double energy_minus = 0.0;
    double cos_theta_c = 0.0;  // |+> = cos |1,{0}> + sin |0,1_nu>
    double sin_theta_c = 0.0;  // |-> = -sin |1,{0}> + cos |0,1_nu>
};

// E_pm = (E0 + E1 + omega_nu)/2 +- Omega/2
inline DressedPair dressed_energies(double e0, double e1, double omega_nu,
                                    const CouplingPoint& point) {
    DressedPair d;
    const double mean = 0.5 * (e0 + e1 + omega_nu);
    d.energy_plus = mean + 0.5 * point.omega;
    d.energy_minus = mean - 0.5 * point.omega;
    d.cos_theta_c = std::cos(point.theta_c);
    d.sin_theta_c = std::sin(point.theta_c);
    return d;
}

// U_pm = +-Omega/2
inline std::pair<double, double> potential_dressed(const CouplingPoint& point) {
    return {0.5 * point.omega, -0.5 * point.omega};
}

// U_theta = cos(2[theta - theta_c]) Omega / 2, theta in [0, pi]
inline double potential_theta(double theta, const CouplingPoint& point) {
    if (theta < 0.0 || theta > std::numbers::pi)
        throw argument_error("potential_theta: theta must lie in [0, pi]");
    return 0.5 * std::cos(2.0 * (theta - point.theta_c)) * point.omega;
}

// F_theta = -1/2 [sin(2 theta_c) cos(2[theta-theta_c])
//                 + cos(2 theta_c) sin(2[theta-theta_c])] grad Omega_R.
// This is the pre-cancellation form of the cot(2 theta_c) expression; it is
// finite at theta_c in {0, pi/2} where the cot form blows up.
inline Vec3 force_theta_static(double theta, const CouplingPoint& point, const Vec3& grad_rabi) {
    if (theta < 0.0 || theta > std::numbers::pi)
        throw argument_error("force_theta_static: theta must lie in [0, pi]");
    const double two_d = 2.0 * (theta - point.theta_c);
    const double s2c = std::sin(2.0 * point.theta_c);
    const double c2c = std::cos(2.0 * point.theta_c);
    const double coef = s2c * std::cos(two_d) + c2c * std::sin(two_d);
    return -0.5 * coef * grad_rabi;
}

// cot form of the same force; valid only away from theta_c in {0, pi/2}.
// Kept as a cross-check of the pre-cancellation evaluation above.
inline Vec3 force_theta_static_cot(double theta, const CouplingPoint& point,
                                   const Vec3& grad_rabi) {
    const double s2c = std::sin(2.0 * point.theta_c);
    const double two_d = 2.0 * (theta - point.theta_c);
    if (std::abs(s2c) < 1e-14) {
        if (std::abs(std::sin(two_d)) < 1e-14) return {0.0, 0.0, 0.0};
        throw regime_error("force_theta_static_cot: cot(2 theta_c) singular in the uncoupled limit");
    }
    const double cot2c = std::cos(2.0 * point.theta_c) / s2c;
    const double coef = std::cos(two_d) + cot2c * std::sin(two_d);
    const Vec3 grad_omega = s2c * grad_rabi;
    return -0.5 * coef * grad_omega;
}

// Position-dependent (resonant) part of the potential of the dressed branch
// adiabatically connected to |1>|{0}> / |0>|1_nu>. The raw expectation value
// <theta=0|H|theta=0> is the bare level E1, position-independent; the branch
// energies E_mp carry the -Omega_R^2/(4 Delta) resonant shift that survives
// in the large-detuning (perturbative) limit. Measured from the uncoupled
// limit Omega -> |Delta|.
inline double resonant_potential_upper(const CouplingPoint& point) {
    if (point.detuning == 0.0)
        throw argument_error("resonant_potential_upper: undefined at zero detuning");
    const double sgn = point.detuning > 0.0 ? 1.0 : -1.0;
    return -sgn * 0.5 * (point.omega - std::abs(point.detuning));
}

inline double resonant_potential_lower(const CouplingPoint& point) {
    return -resonant_potential_upper(point);
}

struct PerturbativePotentials {
    double upper_vacuum = 0.0;  // U for |1>|{0}>: -Omega_R^2/(4 Delta)
    double lower_photon = 0.0;  // U for |0>|1_nu>: +Omega_R^2/(4 Delta)
    bool regime_ok = true;      // |Delta| >= 10 Omega_R
};

inline PerturbativePotentials perturbative_potentials(double rabi, double detuning) {
    if (detuning == 0.0)
        throw argument_error("perturbative_potentials: detuning must be nonzero");
    PerturbativePotentials p;
    p.upper_vacuum = -rabi * rabi / (4.0 * detuning);
    p.lower_photon = -p.upper_vacuum;
    p.regime_ok = std::abs(detuning) >= 10.0 * rabi;
    return p;
}

}  // namespace cpforce
