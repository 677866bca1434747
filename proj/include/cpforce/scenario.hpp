#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpforce/dynamics.hpp"
#include "cpforce/errors.hpp"
#include "cpforce/spectral.hpp"

namespace cpforce {

struct config_error : error {
    using error::error;
};

// Engine selection for a run. Each engine produces one trace per
// (theta, position) pair.
enum class Engine { statics, dynamic_modal, dynamic_strong, dynamic_general, weak, oracle };

inline std::string engine_name(Engine e) {
    switch (e) {
        case Engine::statics: return "static";
        case Engine::dynamic_modal: return "dynamic_modal";
        case Engine::dynamic_strong: return "dynamic_strong";
        case Engine::dynamic_general: return "dynamic_general";
        case Engine::weak: return "weak";
        case Engine::oracle: return "oracle";
    }
    return "?";
}

inline Engine engine_from_name(const std::string& s) {
    if (s == "static") return Engine::statics;
    if (s == "dynamic_modal") return Engine::dynamic_modal;
    if (s == "dynamic_strong") return Engine::dynamic_strong;
    if (s == "dynamic_general") return Engine::dynamic_general;
    if (s == "weak") return Engine::weak;
    if (s == "oracle") return Engine::oracle;
    throw config_error("unknown engine '" + s + "'");
}

struct TimeGridSpec {
    double t0 = 0.0;
    double t_end = 0.0;
    std::size_t n_samples = 0;

    void validate() const {
        if (!(t_end > t0)) throw config_error("time: t_end must exceed t0");
        if (n_samples < 2) throw config_error("time: need at least two samples");
    }
    double sample(std::size_t i) const {
        return t0 + (t_end - t0) * double(i) / double(n_samples - 1);
    }
};

struct OracleParams {
    std::size_t n_points = 4001;
    double half_width_gammas = 40.0;
    double dt = 0.01;
};

enum class Normalize { none, f_plus };

struct Scenario {
    AtomSpec atom;
    ModeSpec mode;
    std::vector<double> positions;
    std::vector<double> thetas;
    TimeGridSpec time;
    std::vector<Engine> engines;
    OracleParams oracle;
    Normalize normalize = Normalize::none;
    std::optional<long> seed;  // recorded in metadata only; nothing here is stochastic

    void validate() const {
        mode.validate();
        atom.validate();
        if (positions.empty()) throw config_error("positions: need at least one");
        if (thetas.empty()) throw config_error("thetas: need at least one");
        for (double th : thetas)
            if (th < 0.0 || th > std::numbers::pi)
                throw config_error("thetas: values must lie in [0, pi]");
        for (double z : positions)
            if (!mode.profile.contains(z))
                throw config_error("positions: value outside the profile domain");
        time.validate();
        if (engines.empty()) throw config_error("engines: need at least one");
        if (!atom.dipole_real)
            for (Engine e : engines)
                if (e != Engine::statics)
                    throw config_error(
                        "engines: the force formulas require real dipole matrix elements "
                        "(atom.dipole_real)");
    }

    double bare_detuning() const { return mode.omega_nu - atom.omega_10; }
};

// ---------------------------------------------------------------------------
// JSON parsing. Numbers are in natural units (hbar = 1) with omega_nu setting
// the frequency scale; see the README for the schema.

namespace cfg_detail {

using nlohmann::json;

inline const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw config_error(where + ": missing key '" + key + "'");
    return *it;
}

inline double need_num(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) throw config_error(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline double opt_num(const json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<double>();
}

inline Vec3 opt_vec3(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_array() || it->size() != 3)
        throw config_error(where + "." + key + ": expected an array of three numbers");
    return {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()};
}

inline SpatialProfile parse_profile(const json& j) {
    const std::string kind = need(j, "kind", "profile").get<std::string>();
    if (kind == "standing_wave")
        return SpatialProfile::standing_wave(need_num(j, "g0", "profile"),
                                             need_num(j, "k", "profile"));
    if (kind == "gaussian")
        return SpatialProfile::gaussian(need_num(j, "g0", "profile"), need_num(j, "z0", "profile"),
                                        need_num(j, "w", "profile"));
    if (kind == "constant") return SpatialProfile::constant(need_num(j, "g0", "profile"));
    throw config_error("profile.kind: expected standing_wave, gaussian or constant");
}

inline std::vector<double> parse_positions(const json& j) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<double>());
    } else if (j.is_object()) {
        const double lo = need_num(j, "min", "positions");
        const double hi = need_num(j, "max", "positions");
        const auto count = need(j, "count", "positions").get<std::size_t>();
        if (count < 1) throw config_error("positions.count: must be >= 1");
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1));
    } else if (j.is_number()) {
        out.push_back(j.get<double>());
    } else {
        throw config_error("positions: expected number, array or {min, max, count}");
    }
    return out;
}

}  // namespace cfg_detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    using namespace cfg_detail;
    Scenario sc;

    const json& jm = need(j, "mode", "config");
    sc.mode.omega_nu = need_num(jm, "omega_nu", "mode");
    sc.mode.gamma_nu = need_num(jm, "gamma_nu", "mode");
    sc.mode.width_ratio_max = opt_num(jm, "width_ratio_max", 0.1);
    sc.mode.profile = parse_profile(need(jm, "profile", "mode"));

    const json& ja = need(j, "atom", "config");
    sc.atom.omega_10 = need_num(ja, "omega_10", "atom");
    sc.atom.e0 = opt_num(ja, "e0", 0.0);
    if (auto it = ja.find("dipole_real"); it != ja.end()) sc.atom.dipole_real = it->get<bool>();
    sc.atom.mag_im = opt_vec3(ja, "mag_im", "atom");
    sc.atom.mag_re = opt_vec3(ja, "mag_re", "atom");

    if (auto jb = j.find("background"); jb != j.end() && !jb->is_null()) {
        ResidualBackground bg;
        if (jb->contains("g_prime_sq") && jb->contains("gamma_bg")) {
            bg.g_prime_sq = need_num(*jb, "g_prime_sq", "background");
            const double rate = need_num(*jb, "gamma_bg", "background");
            if (std::abs(rate - bg.gamma_bg()) > 1e-12 * std::max(rate, bg.gamma_bg()))
                throw config_error("background: gamma_bg and g_prime_sq disagree "
                                   "(gamma_bg must equal 2 pi g_prime_sq)");
        } else if (jb->contains("g_prime_sq")) {
            bg.g_prime_sq = need_num(*jb, "g_prime_sq", "background");
        } else if (jb->contains("gamma_bg")) {
            bg.g_prime_sq =
                need_num(*jb, "gamma_bg", "background") / (2.0 * std::numbers::pi);
        }
        bg.delta_bg = opt_num(*jb, "delta_bg", 0.0);
        if (auto it = jb->find("shift_model"); it != jb->end() && !it->is_null()) {
            const std::string m = it->get<std::string>();
            if (m == "residual") bg.shift_model = ShiftModel::residual;
            else if (m == "full_pv") bg.shift_model = ShiftModel::full_pv;
            else throw config_error("background.shift_model: expected 'residual' or 'full_pv'");
        }
        if (auto it = jb->find("gamma1_total"); it != jb->end() && !it->is_null())
            bg.gamma1_total = it->get<double>();
        sc.atom.background = bg;
    }

    sc.positions = parse_positions(need(j, "positions", "config"));
    for (const auto& v : need(j, "thetas", "config")) sc.thetas.push_back(v.get<double>());

    const json& jt = need(j, "time", "config");
    sc.time.t0 = opt_num(jt, "t0", 0.0);
    sc.time.t_end = need_num(jt, "t_end", "time");
    sc.time.n_samples = need(jt, "n_samples", "time").get<std::size_t>();

    for (const auto& v : need(j, "engines", "config"))
        sc.engines.push_back(engine_from_name(v.get<std::string>()));

    if (auto jo = j.find("oracle"); jo != j.end() && !jo->is_null()) {
        sc.oracle.n_points = jo->value("n_points", sc.oracle.n_points);
        sc.oracle.half_width_gammas = opt_num(*jo, "half_width_gammas", sc.oracle.half_width_gammas);
        sc.oracle.dt = opt_num(*jo, "dt", sc.oracle.dt);
    }
    if (auto jn = j.find("normalize"); jn != j.end() && !jn->is_null()) {
        const std::string m = jn->get<std::string>();
        if (m == "none") sc.normalize = Normalize::none;
        else if (m == "Fplus") sc.normalize = Normalize::f_plus;
        else throw config_error("normalize: expected 'none' or 'Fplus'");
    }
    if (auto js = j.find("seed"); js != j.end() && !js->is_null())
        sc.seed = js->get<long>();

    sc.validate();
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    nlohmann::json jp;
    switch (sc.mode.profile.kind()) {
        case ProfileKind::standing_wave:
            jp = {{"kind", "standing_wave"},
                  {"g0", sc.mode.profile.amplitude()},
                  {"k", sc.mode.profile.wavenumber()}};
            break;
        case ProfileKind::gaussian:
            jp = {{"kind", "gaussian"},
                  {"g0", sc.mode.profile.amplitude()},
                  {"z0", sc.mode.profile.center()},
                  {"w", sc.mode.profile.width()}};
            break;
        case ProfileKind::constant:
            jp = {{"kind", "constant"}, {"g0", sc.mode.profile.amplitude()}};
            break;
    }
    j["mode"] = {{"omega_nu", sc.mode.omega_nu},
                 {"gamma_nu", sc.mode.gamma_nu},
                 {"profile", jp}};
    j["atom"] = {{"omega_10", sc.atom.omega_10},
                 {"e0", sc.atom.e0},
                 {"dipole_real", sc.atom.dipole_real},
                 {"mag_im", {sc.atom.mag_im.x, sc.atom.mag_im.y, sc.atom.mag_im.z}},
                 {"mag_re", {sc.atom.mag_re.x, sc.atom.mag_re.y, sc.atom.mag_re.z}}};
    nlohmann::json jb = {{"gamma_bg", sc.atom.background.gamma_bg()},
                         {"delta_bg", sc.atom.background.delta_bg},
                         {"shift_model", sc.atom.background.shift_model == ShiftModel::residual
                                             ? "residual"
                                             : "full_pv"}};
    if (sc.atom.background.gamma1_total) jb["gamma1_total"] = *sc.atom.background.gamma1_total;
    j["background"] = jb;
    j["positions"] = sc.positions;
    j["thetas"] = sc.thetas;
    j["time"] = {{"t0", sc.time.t0}, {"t_end", sc.time.t_end}, {"n_samples", sc.time.n_samples}};
    nlohmann::json je = nlohmann::json::array();
    for (Engine e : sc.engines) je.push_back(engine_name(e));
    j["engines"] = je;
    j["oracle"] = {{"n_points", sc.oracle.n_points},
                   {"half_width_gammas", sc.oracle.half_width_gammas},
                   {"dt", sc.oracle.dt}};
    j["normalize"] = sc.normalize == Normalize::f_plus ? "Fplus" : "none";
    if (sc.seed) j["seed"] = *sc.seed;
    return j;
}

// ---------------------------------------------------------------------------
// Presets

inline std::vector<std::string> preset_names() { return {"fig2", "weak_decay", "oracle_compare"}; }

// Eight initial angles at fixed coupling angle 2 theta_c = 3 pi/8 and total
// damping gamma = 0.05 Omega; the classic strong-coupling force portraits.
inline Scenario preset_fig2() {
    Scenario sc;
    const double two_theta_c = 3.0 * std::numbers::pi / 8.0;
    const double rabi = 1.0;
    const double det = -rabi / std::tan(two_theta_c);
    const double omega = std::hypot(rabi, det);
    const double gamma_target = 0.05 * omega;
    const double gamma_nu = 0.08;
    const double gamma_prime = 2.0 * gamma_target - gamma_nu;

    sc.atom.omega_10 = 100.0;
    sc.atom.background = ResidualBackground::from_rate(gamma_prime);
    sc.mode.omega_nu = sc.atom.omega_10 + det;
    sc.mode.gamma_nu = gamma_nu;
    const double z = 2.0;  // past the antinode: grad Omega_R < 0, so F_+ points up
    const double g0 = rabi / (std::sin(z) * std::sqrt(2.0 * std::numbers::pi * gamma_nu));
    sc.mode.profile = SpatialProfile::standing_wave(g0, 1.0);
    sc.positions = {z};
    const double tc2 = two_theta_c;
    sc.thetas = {0.5 * tc2,
                 0.5 * (tc2 + std::numbers::pi / 2.0),
                 0.5 * (tc2 + std::numbers::pi),
                 0.5 * (tc2 + 1.5 * std::numbers::pi),
                 0.0,
                 std::numbers::pi / 4.0,
                 std::numbers::pi / 2.0,
                 0.75 * std::numbers::pi};
    sc.time = {0.0, 60.0 / omega, 1201};
    sc.engines = {Engine::dynamic_strong};
    sc.normalize = Normalize::f_plus;
    return sc;
}

// Wide-mode (Markovian) limit: exponential decay of the excited-state force.
inline Scenario preset_weak_decay() {
    Scenario sc;
    sc.atom.omega_10 = 200.0;
    sc.atom.background = ResidualBackground::from_rate(0.001);
    sc.mode.omega_nu = 200.0;
    sc.mode.gamma_nu = 10.0;
    const double rabi = 0.1;
    const double z = 2.0;
    const double g0 = rabi / (std::sin(z) * std::sqrt(2.0 * std::numbers::pi * sc.mode.gamma_nu));
    sc.mode.profile = SpatialProfile::standing_wave(g0, 1.0);
    sc.positions = {z};
    sc.thetas = {0.0};
    const double gamma1 = 0.001 + rabi * rabi / sc.mode.gamma_nu;
    sc.time = {0.0, 3.0 / gamma1, 601};
    sc.engines = {Engine::weak};
    return sc;
}

// Strong-coupling reference point: closed-form and brute-force traces side by
// side; the run metadata carries the maximum discrepancies.
inline Scenario preset_oracle_compare() {
    Scenario sc;
    sc.atom.omega_10 = 100.0;
    sc.atom.background = ResidualBackground::from_rate(0.02);
    sc.mode.omega_nu = 100.3;
    sc.mode.gamma_nu = 0.05;
    const double rabi = 1.0;
    const double z = 2.0;
    const double g0 = rabi / (std::sin(z) * std::sqrt(2.0 * std::numbers::pi * sc.mode.gamma_nu));
    sc.mode.profile = SpatialProfile::standing_wave(g0, 1.0);
    sc.positions = {z};
    sc.thetas = {0.0, std::numbers::pi / 4.0, std::numbers::pi / 2.0};
    sc.time = {0.0, 30.0, 121};
    sc.engines = {Engine::dynamic_modal, Engine::oracle};
    sc.oracle = {4001, 40.0, 0.01};
    return sc;
}

inline Scenario preset_by_name(const std::string& name) {
    if (name == "fig2") return preset_fig2();
    if (name == "weak_decay") return preset_weak_decay();
    if (name == "oracle_compare") return preset_oracle_compare();
    throw config_error("unknown preset '" + name + "'");
}

}  // namespace cpforce
