#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cpforce/forces.hpp"
#include "cpforce/oracle.hpp"
#include "cpforce/quadrature.hpp"

using namespace cpforce;
using Catch::Approx;

namespace {

ModeSpec mode_const_rabi(double rabi, double omega_nu, double gamma_nu) {
    ModeSpec m;
    m.omega_nu = omega_nu;
    m.gamma_nu = gamma_nu;
    m.profile = SpatialProfile::constant(
        rabi > 0.0 ? rabi / std::sqrt(2.0 * std::numbers::pi * gamma_nu) : 0.0);
    if (rabi > 0.0) m.validate();
    return m;
}

ModeSpec mode_sw_rabi(double rabi, double z, double omega_nu, double gamma_nu) {
    ModeSpec m;
    m.omega_nu = omega_nu;
    m.gamma_nu = gamma_nu;
    m.profile = SpatialProfile::standing_wave(
        rabi / (std::sin(z) * std::sqrt(2.0 * std::numbers::pi * gamma_nu)), 1.0);
    m.validate();
    return m;
}

AtomSpec atom_with(double omega_10, double gamma_bg) {
    AtomSpec a;
    a.omega_10 = omega_10;
    a.background = ResidualBackground::from_rate(gamma_bg);
    return a;
}

}  // namespace

TEST_CASE("frequency grid invariants") {
    const auto mode = mode_const_rabi(1.0, 100.0, 0.05);
    SECTION("default grid is valid and centered") {
        const auto g = FrequencyGrid::around_mode(mode);
        CHECK(g.n_points == 4001);
        CHECK(g.nodes[(g.n_points - 1) / 2] == 100.0);
        CHECK(g.spacing() <= 0.05 / 20.0);
    }
    SECTION("window must cover ten linewidths") {
        CHECK_THROWS_AS(FrequencyGrid::around_mode(mode, 5.0, 4001), grid_error);
    }
    SECTION("spacing must resolve the line") {
        CHECK_THROWS_AS(FrequencyGrid::around_mode(mode, 40.0, 201), grid_error);
    }
    SECTION("even node counts rejected") {
        CHECK_THROWS_AS(FrequencyGrid::around_mode(mode, 40.0, 4000), argument_error);
    }
}

TEST_CASE("init_state populates the sectors by theta") {
    const auto mode = mode_sw_rabi(1.0, 2.0, 100.3, 0.05);
    const auto atom = atom_with(100.0, 0.02);
    OracleSystem sys(mode, atom.background, atom, 2.0, FrequencyGrid::around_mode(mode));

    SECTION("theta = 0: all excitation on the atom") {
        const auto st = sys.init_state(0.0);
        CHECK(std::abs(st.psi1) == Approx(1.0).epsilon(1e-12));
        double field = 0.0;
        for (const auto& a : st.mode_amps) field += std::norm(a);
        CHECK(field == Approx(0.0).margin(1e-20));
        CHECK(st.norm_sq() == Approx(1.0).epsilon(1e-12));
    }
    SECTION("theta = pi/2: single photon on the mode line") {
        const auto st = sys.init_state(std::numbers::pi / 2.0);
        CHECK(std::abs(st.psi1) < 1e-15);
        CHECK(st.norm_sq() == Approx(1.0).epsilon(1e-12));
    }
    SECTION("theta = pi/4: half in each sector") {
        const auto st = sys.init_state(std::numbers::pi / 4.0);
        CHECK(std::norm(st.psi1) == Approx(0.5).epsilon(1e-9));
        double field = 0.0;
        for (const auto& a : st.mode_amps) field += std::norm(a);
        CHECK(field == Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("evolve basics") {
    SECTION("no coupling: pure phase rotation") {
        const auto mode = mode_const_rabi(0.0, 100.0, 0.05);
        AtomSpec atom = atom_with(99.7, 0.0);
        OracleSystem sys(mode, atom.background, atom, 0.0,
                         FrequencyGrid::around_mode(mode, 40.0, 4001));
        auto st = sys.init_state(0.0);
        sys.evolve(st, 0.01, 20.0);
        CHECK(std::abs(st.psi1) == Approx(1.0).epsilon(1e-12));
        // rotating frame leaves exp(i Delta t)
        CHECK(std::arg(st.psi1) == Approx(std::remainder(0.3 * 20.0, 2.0 * std::numbers::pi))
                                       .margin(1e-9));
    }
    SECTION("step-size precondition") {
        const auto mode = mode_const_rabi(1.0, 100.0, 0.05);
        const auto atom = atom_with(100.0, 0.0);
        OracleSystem sys(mode, atom.background, atom, 0.0, FrequencyGrid::around_mode(mode));
        auto st = sys.init_state(0.0);
        CHECK_THROWS_AS(sys.evolve(st, 10.0 * sys.max_step(), 1.0), argument_error);
    }
    SECTION("horizon beyond the grid recurrence time is rejected") {
        const auto mode = mode_const_rabi(0.1, 200.0, 10.0);
        const auto atom = atom_with(200.0, 0.001);
        OracleSystem sys(mode, atom.background, atom, 0.0,
                         FrequencyGrid::around_mode(mode, 15.0, 1201));
        auto st = sys.init_state(0.0);
        // spacing 0.25 -> recurrence ~ 25; half of it is ~ 12.5
        CHECK_THROWS_AS(sys.evolve(st, 1e-4, 20.0), grid_error);
    }
}

TEST_CASE("resonant lossless narrow mode reproduces vacuum Rabi oscillations") {
    const double rabi = 1.0, gamma_nu = 0.005;
    const auto mode = mode_const_rabi(rabi, 100.0, gamma_nu);
    const auto atom = atom_with(100.0, 0.0);
    // window wide enough for the dressed doublet at +-Omega_R/2
    OracleSystem sys(mode, atom.background, atom, 0.0,
                     FrequencyGrid::around_mode(mode, 400.0, 20001));
    auto st = sys.init_state(0.0);
    const auto lv = make_level_data(rabi, gamma_nu, 0.0, 0.0, 100.0);
    const auto sol = make_modal_solution(lv, rabi, 0.0);

    const double t_end = 2.0 * 2.0 * std::numbers::pi / rabi;
    double worst_cos = 0.0, worst_closed = 0.0;
    for (int k = 1; k <= 25; ++k) {
        const double t = t_end * k / 25.0;
        sys.evolve(st, 0.02, t);
        worst_cos = std::max(worst_cos, std::abs(std::abs(st.psi1) - std::abs(std::cos(0.5 * t))));
        worst_closed =
            std::max(worst_closed, std::abs(std::abs(st.psi1) - std::abs(psi1(sol, 1.0, t))));
    }
    CHECK(worst_cos < 2e-2);
    CHECK(worst_closed < 2e-3);
}

TEST_CASE("weak regime decay rate matches the composite rate") {
    const double rabi = 0.1, gamma_nu = 10.0, gamma_bg = 0.001;
    const auto mode = mode_const_rabi(rabi, 200.0, gamma_nu);
    const auto atom = atom_with(200.0, gamma_bg);
    // spacing chosen against recurrence over the fit horizon
    OracleSystem sys(mode, atom.background, atom, 0.0,
                     FrequencyGrid::around_mode(mode, 10.0, 4001));
    auto st = sys.init_state(0.0);
    const double g1 = gamma_bg + rabi * rabi / gamma_nu;
    std::vector<double> ts, ps;
    for (int k = 1; k <= 30; ++k) {
        const double t = k * 1.0;
        sys.evolve(st, 5e-4, t);
        if (t >= 2.0) {
            ts.push_back(t);
            ps.push_back(std::norm(st.psi1));
        }
    }
    CHECK(fit_decay_rate(ts, ps) == Approx(g1).epsilon(0.05));
}

TEST_CASE("norm conservation with the background channel active") {
    const auto mode = mode_sw_rabi(1.0, 2.0, 100.3, 0.05);
    const auto atom = atom_with(100.0, 0.02);
    OracleSystem sys(mode, atom.background, atom, 2.0, FrequencyGrid::around_mode(mode));
    for (const double theta : {0.0, std::numbers::pi / 4.0}) {
        auto st = sys.init_state(theta);
        sys.evolve(st, 0.01, 20.0);
        CHECK(std::abs(st.norm_sq() - 1.0) <= 1e-8 * sys.rabi() * 20.0);
    }
}

TEST_CASE("oracle force functionals") {
    const double z = 2.0;
    const auto mode = mode_sw_rabi(1.0, z, 100.3, 0.05);
    AtomSpec atom = atom_with(100.0, 0.02);
    atom.mag_im = matched_mag_im(mode, z);

    SECTION("theta = 0 starts with zero electric force (psi0 = 0)") {
        OracleSystem sys(mode, atom.background, atom, z, FrequencyGrid::around_mode(mode));
        const auto st = sys.init_state(0.0);
        const auto [fe, fm] = sys.force_from_state(st);
        CHECK(fe.norm() == Approx(0.0).margin(1e-15));
        // the magnetic functional sees d/dt[psi1^* psi0], finite already at t0
        CHECK(std::isfinite(fm.norm()));
    }
    SECTION("theta = pi/4 starts on the static force") {
        OracleSystem sys(mode, atom.background, atom, z, FrequencyGrid::around_mode(mode));
        const auto st = sys.init_state(std::numbers::pi / 4.0);
        const auto fe = sys.force_from_state(st).first;
        const double want = -0.5 * grad_rabi(mode, z).z;  // -1/2 sin(2 theta) grad Omega_R
        CHECK(fe.z == Approx(want).epsilon(0.01));
    }
    SECTION("electric force tracks the closed form within 3% of peak") {
        const auto lv = make_level_data(1.0, 0.05, 0.3, 0.02, 100.3);
        const Vec3 gr = grad_rabi(mode, z);
        OracleSystem sys(mode, atom.background, atom, z, FrequencyGrid::around_mode(mode));
        auto st = sys.init_state(0.0);
        const auto sol = make_modal_solution(lv, 1.0, 0.0);
        double peak = 0.0, worst_el = 0.0, worst_mag = 0.0, peak_mag = 0.0;
        for (int k = 0; k <= 30; ++k) {
            const double t = k * 0.5;
            if (k > 0) sys.evolve(st, 0.01, t);
            const auto [fe, fm] = sys.force_from_state(st);
            const double fc = force_el_modal(sol, gr, t).z;
            peak = std::max(peak, std::abs(fc));
            worst_el = std::max(worst_el, std::abs(fe.z - fc));
            const double fmc = force_mag_modal(sol, atom, mode, t).y;
            peak_mag = std::max(peak_mag, std::abs(fmc));
            worst_mag = std::max(worst_mag, std::abs(fm.y - fmc));
        }
        CHECK(worst_el / peak < 0.03);
        CHECK(worst_mag / peak_mag < 0.10);  // modal magnetic form is an approximant
    }
}

TEST_CASE("principal-value identity") {
    SECTION("odd integrand vanishes on resonance") {
        const auto r = pv_identity(100.0, 100.0, 1.0);
        CHECK(r.rhs == 0.0);
        CHECK(std::abs(r.lhs) < 1e-8 * 2.0 * std::numbers::pi);
    }
    SECTION("quadrature matches the closed form to 1e-6") {
        for (const double wt : {99.0, 101.0, 105.0}) {
            for (const double gn : {0.1, 1.0}) {
                const auto r = pv_identity(wt, 100.0, gn);
                CHECK(std::abs(r.lhs - r.rhs) / std::abs(r.rhs) < 1e-6);
            }
        }
    }
    SECTION("half-line restriction degrades gracefully with gamma/omega") {
        const auto narrow = pv_identity(101.0, 100.0, 1.0, PvDomain::half_line);
        const auto wide = pv_identity(101.0, 100.0, 10.0, PvDomain::half_line);
        const double rel_narrow = std::abs(narrow.lhs - narrow.rhs) / std::abs(narrow.rhs);
        const double rel_wide = std::abs(wide.lhs - wide.rhs) / std::abs(wide.rhs);
        CHECK(rel_narrow < 1e-4);
        CHECK(rel_wide > rel_narrow);
        CHECK(rel_wide < 1e-2);
    }
}

TEST_CASE("background-only evolution reproduces the Markov rate") {
    const double gamma_bg = 0.02;
    ModeSpec mode = mode_const_rabi(0.0, 100.0, 0.05);
    const auto atom = atom_with(100.0, gamma_bg);
    OracleSystem sys(mode, atom.background, atom, 0.0,
                     FrequencyGrid::around_mode(mode, 20.0, 2001));
    auto st = sys.init_state(0.0);
    std::vector<double> ts, ps;
    for (int k = 1; k <= 25; ++k) {
        const double t = 4.0 * k;
        sys.evolve(st, 0.02, t);
        if (t >= 8.0) {
            ts.push_back(t);
            ps.push_back(std::norm(st.psi1));
        }
    }
    CHECK(fit_decay_rate(ts, ps) == Approx(gamma_bg).epsilon(0.03));
}
