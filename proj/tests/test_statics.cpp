#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cpforce/spectral.hpp"
#include "cpforce/statics.hpp"

using namespace cpforce;
using Catch::Approx;

TEST_CASE("coupling_angle branch and limits") {
    CHECK(coupling_angle(1.0, 0.0) == Approx(std::numbers::pi / 4.0).epsilon(1e-14));
    // Omega_R -> 0+: the angle collapses to 0 (negative detuning) or pi/2 (positive)
    CHECK(coupling_angle(1e-14, -1.0) == Approx(0.0).margin(1e-13));
    CHECK(coupling_angle(1e-14, 1.0) == Approx(std::numbers::pi / 2.0).margin(1e-13));
    // tan(2 theta_c) = 1 with sin(2 theta_c) > 0
    CHECK(coupling_angle(1.0, -1.0) == Approx(std::numbers::pi / 8.0).epsilon(1e-14));
    CHECK_THROWS_AS(coupling_angle(0.0, 0.0), degenerate_coupling_error);
}

TEST_CASE("make_point fills consistent fields") {
    SECTION("pythagorean") { CHECK(make_point(3.0, 4.0).omega == Approx(5.0).epsilon(1e-15)); }
    SECTION("resonance reduces Omega to Omega_R") {
        const auto p = make_point(0.7, 0.0);
        CHECK(p.omega == Approx(0.7).epsilon(1e-15));
        CHECK(p.theta_c == Approx(std::numbers::pi / 4.0).epsilon(1e-14));
    }
    SECTION("uncoupled limit") {
        const auto p1 = make_point(0.0, -2.0);
        CHECK(p1.omega == Approx(2.0));
        CHECK(p1.theta_c == Approx(0.0).margin(1e-15));
        const auto p2 = make_point(0.0, 2.0);
        CHECK(p2.theta_c == Approx(std::numbers::pi / 2.0).epsilon(1e-14));
    }
    SECTION("identities hold for random points") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> ur(0.0, 5.0), ud(-5.0, 5.0);
        for (int i = 0; i < 1000; ++i) {
            const double r = ur(rng), d = ud(rng);
            if (r == 0.0 && d == 0.0) continue;
            const auto p = make_point(r, d);
            CHECK(std::abs(p.omega - std::hypot(r, d)) <= 1e-12 * p.omega);
            CHECK(std::abs(std::sin(2.0 * p.theta_c) * p.omega - r) <= 1e-12 * p.omega);
            CHECK(std::abs(std::cos(2.0 * p.theta_c) * p.omega + d) <= 1e-12 * p.omega);
        }
    }
}

TEST_CASE("dressed energies") {
    SECTION("degenerate uncoupled point at resonance") {
        const auto d = dressed_energies(0.0, 1.0, 1.0, make_point(1e-300, 0.0));
        CHECK(d.energy_plus == Approx(1.0).epsilon(1e-12));
        CHECK(d.energy_minus == Approx(1.0).epsilon(1e-12));
    }
    SECTION("symmetric splitting at resonance") {
        const auto d = dressed_energies(0.0, 1.0, 1.0, make_point(0.2, 0.0));
        CHECK(d.energy_plus == Approx(1.1).epsilon(1e-14));
        CHECK(d.energy_minus == Approx(0.9).epsilon(1e-14));
    }
    SECTION("splitting equals Omega; coefficients orthonormal") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(0.1, 3.0);
        for (int i = 0; i < 100; ++i) {
            const auto p = make_point(u(rng), u(rng) - 1.5);
            const double wn = u(rng);
            const auto d = dressed_energies(0.3, 1.7, wn, p);
            CHECK(d.energy_plus - d.energy_minus == Approx(p.omega).epsilon(1e-12));
            CHECK(d.energy_plus + d.energy_minus == Approx(0.3 + 1.7 + wn).epsilon(1e-12));
            CHECK(d.cos_theta_c * d.cos_theta_c + d.sin_theta_c * d.sin_theta_c ==
                  Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("dressed potentials") {
    CHECK(potential_dressed(make_point(2.0, 0.0)).first == Approx(1.0));
    CHECK(potential_dressed(make_point(2.0, 0.0)).second == Approx(-1.0));
    const auto p = make_point(0.8, 0.0);
    CHECK(potential_dressed(p).first == Approx(0.4));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.1, 4.0);
    for (int i = 0; i < 50; ++i) {
        const auto q = make_point(u(rng), u(rng) - 2.0);
        const auto [up, um] = potential_dressed(q);
        CHECK(up + um == 0.0);
    }
}

TEST_CASE("potential_theta") {
    const auto p = make_point(1.0, -0.6);
    SECTION("dressed-state angles recover +-Omega/2") {
        CHECK(potential_theta(p.theta_c, p) == Approx(0.5 * p.omega).epsilon(1e-14));
        CHECK(potential_theta(p.theta_c + std::numbers::pi / 2.0, p) ==
              Approx(-0.5 * p.omega).epsilon(1e-14));
    }
    SECTION("resonant theta = 0 is force- and potential-free") {
        CHECK(potential_theta(0.0, make_point(1.3, 0.0)) == Approx(0.0).margin(1e-15));
    }
    SECTION("large detuning: the upper branch reproduces the perturbative potential") {
        // <theta=0|H|theta=0> itself is position-independent; the resonant
        // -Omega_R^2/(4 Delta) lives on the dressed branch connected to |1>|{0}>,
        // which is potential_theta at the branch angle measured from -Delta/2.
        for (const double ratio : {10.0, 50.0, 100.0}) {
            for (const double sign : {1.0, -1.0}) {
                const double rabi = 1.0;
                const double det = sign * ratio * rabi;
                const auto q = make_point(rabi, det);
                const double branch_theta =
                    det > 0.0 ? q.theta_c + std::numbers::pi / 2.0 : q.theta_c;
                const double u = potential_theta(branch_theta, q) + 0.5 * det;
                CHECK(u == Approx(resonant_potential_upper(q)).epsilon(1e-12));
                const double up = -rabi * rabi / (4.0 * det);
                CHECK(std::abs(u - up) / std::abs(up) <= 3.0 / (ratio * ratio));
            }
        }
    }
    SECTION("theta outside [0, pi] rejected") {
        CHECK_THROWS_AS(potential_theta(-0.1, p), argument_error);
        CHECK_THROWS_AS(potential_theta(3.2, p), argument_error);
    }
    SECTION("dressed symmetry: U(theta) = -U(theta + pi/2 mod pi)") {
        std::mt19937 rng(13);
        std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
        for (int i = 0; i < 100; ++i) {
            const double th = u(rng);
            double th2 = th + std::numbers::pi / 2.0;
            if (th2 > std::numbers::pi) th2 -= std::numbers::pi;
            CHECK(potential_theta(th, p) == Approx(-potential_theta(th2, p)).margin(1e-13));
        }
    }
}

TEST_CASE("force_theta_static") {
    const Vec3 gr{0.0, 0.0, 0.35};
    SECTION("dressed state feels -grad Omega / 2") {
        const auto p = make_point(1.0, -0.6);
        const Vec3 f = force_theta_static(p.theta_c, p, gr);
        CHECK(f.z == Approx(-0.5 * std::sin(2.0 * p.theta_c) * gr.z).epsilon(1e-13));
    }
    SECTION("resonance, theta = pi/4: maximal attraction") {
        const auto p = make_point(1.0, 0.0);
        CHECK(force_theta_static(std::numbers::pi / 4.0, p, gr).z == Approx(-0.5 * gr.z).epsilon(1e-13));
    }
    SECTION("antinode: zero force") {
        const auto p = make_point(1.0, 0.4);
        CHECK(force_theta_static(0.3, p, Vec3{}).norm() == 0.0);
    }
    SECTION("cot form agrees where defined") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> ur(0.2, 2.0), ud(-2.0, 2.0),
            ut(0.0, std::numbers::pi);
        for (int i = 0; i < 200; ++i) {
            const auto p = make_point(ur(rng), ud(rng));
            const double th = ut(rng);
            const Vec3 a = force_theta_static(th, p, gr);
            const Vec3 b = force_theta_static_cot(th, p, gr);
            CHECK(a.z == Approx(b.z).margin(1e-12));
        }
    }
    SECTION("pre-cancellation form stays finite in the uncoupled limit") {
        const auto p = make_point(0.0, 1.0);  // theta_c = pi/2, cot(2 theta_c) singular
        CHECK_NOTHROW(force_theta_static(0.3, p, gr));
        CHECK_THROWS_AS(force_theta_static_cot(0.3, p, gr), regime_error);
    }
}

TEST_CASE("perturbative potentials") {
    const auto p = perturbative_potentials(1.0, 25.0);
    CHECK(p.upper_vacuum == Approx(-0.01).epsilon(1e-14));
    CHECK(p.lower_photon == Approx(0.01).epsilon(1e-14));
    CHECK(p.regime_ok);

    const auto m = perturbative_potentials(1.0, -25.0);
    CHECK(m.upper_vacuum == Approx(0.01).epsilon(1e-14));

    const auto close = perturbative_potentials(1.0, 2.0);
    CHECK_FALSE(close.regime_ok);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 50; ++i) {
        const auto q = perturbative_potentials(u(rng), u(rng) + 0.1);
        CHECK(q.upper_vacuum + q.lower_photon == 0.0);
    }
}

TEST_CASE("static force equals the negative potential gradient through the profiles") {
    std::mt19937 rng(29);
    ModeSpec m;
    m.omega_nu = 100.0;
    m.gamma_nu = 0.08;

    for (int kind = 0; kind < 3; ++kind) {
        switch (kind) {
            case 0: m.profile = SpatialProfile::standing_wave(0.9, 1.4); break;
            case 1: m.profile = SpatialProfile::gaussian(1.2, 0.3, 0.7); break;
            case 2: m.profile = SpatialProfile::constant(0.8); break;
        }
        const double h = 1e-5 * m.profile.length_scale();
        std::uniform_real_distribution<double> uz(0.05, 0.95), ud(-1.5, 1.5),
            ut(0.0, std::numbers::pi);
        for (int i = 0; i < 50; ++i) {
            const double z = (kind == 0) ? uz(rng) * std::numbers::pi / 1.4
                                         : -1.0 + 2.0 * uz(rng);
            const double det = ud(rng);
            const double th = ut(rng);

            const auto u_at = [&](double zz) {
                return potential_theta(th, make_point(rabi_frequency(m, zz), det));
            };
            const double fd = -(u_at(z + h) - u_at(z - h)) / (2.0 * h);
            const double an =
                force_theta_static(th, make_point(rabi_frequency(m, z), det), grad_rabi(m, z)).z;
            const double scale = std::max({std::abs(an), std::abs(fd), 1e-9});
            CHECK(std::abs(fd - an) / scale < 1e-6);
        }
    }
}
