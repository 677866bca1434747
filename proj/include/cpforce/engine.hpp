#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cpforce/dynamics.hpp"
#include "cpforce/errors.hpp"
#include "cpforce/forces.hpp"
#include "cpforce/oracle.hpp"
#include "cpforce/quadrature.hpp"
#include "cpforce/scenario.hpp"
#include "cpforce/spectral.hpp"
#include "cpforce/statics.hpp"

namespace cpforce {

// Trace generation and file output for a configured scenario. One CSV per
// (engine, theta, position) with columns t, F_el, F_mag, population, U_theta,
// regime_flags; one JSON sidecar per run with the resolved parameters, the
// invariant-check summary and the factor-convention flags. Output is
// deterministic: fixed-step integrators, shortest round-trip number
// formatting, no wall-clock anywhere.

struct TraceRow {
    double t = 0.0;
    double f_el = 0.0;   // z component (builtin profiles vary along z)
    double f_mag = 0.0;  // component along the configured mag_im direction
    double population = 0.0;
    double u_theta = 0.0;
};

struct Trace {
    Engine engine{};
    std::size_t theta_idx = 0;
    std::size_t pos_idx = 0;
    double theta = 0.0;
    double z = 0.0;
    std::vector<TraceRow> rows;
    std::string flags;  // same token list on every row
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string regime_tokens(const LevelData& lv, bool engine_regime_ok, bool degenerate) {
    std::string s;
    const auto add = [&s](const char* tok) {
        if (!s.empty()) s += '|';
        s += tok;
    };
    if (lv.weak_ok) add("weak");
    if (lv.moderate_ok) add("moderate");
    if (lv.strong_ok) add("strong");
    if (lv.small_detuning) add("small_detuning");
    if (lv.detuning_window) add("detuning_window");
    if (lv.gamma_prime_negative) add("gamma_prime_negative");
    if (degenerate) add("degenerate_roots");
    if (!engine_regime_ok) add("regime_violated");
    if (s.empty()) s = "none";
    return s;
}

inline double mag_component(const Vec3& f, const Vec3& mag_im) {
    const double m = mag_im.norm();
    return m > 0.0 ? dot(f, mag_im) / m : 0.0;
}

}  // namespace detail

inline Trace compute_trace(const Scenario& sc, Engine engine, std::size_t theta_idx,
                           std::size_t pos_idx) {
    Trace tr;
    tr.engine = engine;
    tr.theta_idx = theta_idx;
    tr.pos_idx = pos_idx;
    tr.theta = sc.thetas[theta_idx];
    tr.z = sc.positions[pos_idx];
    tr.rows.resize(sc.time.n_samples);

    const double rabi = rabi_frequency(sc.mode, tr.z);
    const Vec3 gr = grad_rabi(sc.mode, tr.z);
    const CouplingPoint bare = make_point(rabi, sc.bare_detuning());
    const LevelData lv = primed_level(sc.atom, sc.mode, bare);
    const CouplingPoint shifted = make_point(rabi, lv.detuning_shifted);
    const ModalSolution sol = make_modal_solution(lv, rabi, tr.theta);

    bool engine_ok = true;
    switch (engine) {
        case Engine::statics: break;
        case Engine::weak: engine_ok = lv.weak_ok; break;
        case Engine::dynamic_modal:
        case Engine::dynamic_general: engine_ok = lv.moderate_ok && !sol.degenerate; break;
        case Engine::dynamic_strong: engine_ok = lv.strong_ok && !sol.degenerate; break;
        case Engine::oracle: break;
    }
    // repeated roots: no closed kernel form; those force columns become NaN
    // with the degenerate flag set, population and potential stay available
    const bool closed_forces_available =
        !sol.degenerate || engine == Engine::statics || engine == Engine::weak ||
        engine == Engine::oracle;
    // the modal magnetic form needs the oscillatory branch (Omega^2 > 0)
    const double eps_damp = 0.5 * (lv.gamma_nu - lv.gamma_prime);
    const bool oscillatory =
        rabi * rabi + lv.detuning_shifted * lv.detuning_shifted > eps_damp * eps_damp;
    const auto mag_modal_or_nan = [&](double t) {
        if (!closed_forces_available || !oscillatory)
            return std::numeric_limits<double>::quiet_NaN();
        return detail::mag_component(force_mag_modal(sol, sc.atom, sc.mode, t), sc.atom.mag_im);
    };
    const auto mag_strong_or_nan = [&](double t) {
        if (!closed_forces_available || !oscillatory)
            return std::numeric_limits<double>::quiet_NaN();
        return detail::mag_component(force_mag_strong(sol, sc.atom, sc.mode, t, false),
                                     sc.atom.mag_im);
    };
    tr.flags = detail::regime_tokens(lv, engine_ok, sol.degenerate);
    if (!engine_ok)
        tr.warnings.push_back(engine_name(engine) + ": outside its validity regime, rows flagged");
    if (lv.gamma_prime_negative)
        tr.warnings.push_back("configured Gamma_1 below the mode-subtraction term; "
                              "Gamma'_1 is negative");

    const double u_static = potential_theta(tr.theta, bare);
    const double u_shifted = potential_theta(tr.theta, shifted);

    if (engine == Engine::oracle) {
        OracleSystem sys(sc.mode, sc.atom.background, sc.atom, tr.z,
                         FrequencyGrid::around_mode(sc.mode, sc.oracle.half_width_gammas,
                                                    sc.oracle.n_points));
        ContinuumState st = sys.init_state(tr.theta);
        const double interval = (sc.time.t_end - sc.time.t0) / double(sc.time.n_samples - 1);
        const double dt_max = std::min(sc.oracle.dt, sys.max_step());
        const auto steps = std::max<std::size_t>(1, std::size_t(std::ceil(interval / dt_max - 1e-12)));
        const double dt = interval / double(steps);
        for (std::size_t i = 0; i < sc.time.n_samples; ++i) {
            if (i > 0) sys.evolve(st, dt, double(i) * interval);
            const auto [fe, fm] = sys.force_from_state(st);
            tr.rows[i] = {sc.time.sample(i), fe.z, detail::mag_component(fm, sc.atom.mag_im),
                          std::norm(st.psi1), u_shifted};
        }
        return tr;
    }

    for (std::size_t i = 0; i < sc.time.n_samples; ++i) {
        const double t = double(i) * (sc.time.t_end - sc.time.t0) / double(sc.time.n_samples - 1);
        TraceRow& row = tr.rows[i];
        row.t = sc.time.sample(i);
        switch (engine) {
            case Engine::statics: {
                row.f_el = force_theta_static(tr.theta, bare, gr).z;
                row.f_mag = 0.0;
                row.population = std::cos(tr.theta) * std::cos(tr.theta);
                row.u_theta = u_static;
                break;
            }
            case Engine::dynamic_modal: {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.f_el = closed_forces_available ? force_el_modal(sol, gr, t).z : nan;
                row.f_mag = mag_modal_or_nan(t);
                row.population = population(sol, t);
                row.u_theta = u_shifted;
                break;
            }
            case Engine::dynamic_strong: {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.f_el = closed_forces_available ? force_el_strong(sol, gr, t, false).z : nan;
                row.f_mag = mag_strong_or_nan(t);
                row.population = population(sol, t);
                row.u_theta = u_shifted;
                break;
            }
            case Engine::dynamic_general: {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.f_el = closed_forces_available ? force_el_general(sol, sc.mode, gr, t).z : nan;
                row.f_mag = mag_modal_or_nan(t);
                row.population = population(sol, t);
                row.u_theta = u_shifted;
                break;
            }
            case Engine::weak: {
                row.f_el = force_weak(lv, rabi, gr, t, false).z;
                row.f_mag = 0.0;  // vanishes identically in the weak limit
                const double c = std::cos(tr.theta);
                row.population = c * c * std::exp(-lv.gamma1_full * t);
                row.u_theta = u_shifted;
                break;
            }
            case Engine::oracle: break;  // handled above
        }
    }
    return tr;
}

// |F_+| at t0 for the Fplus normalization of force columns
inline double f_plus_magnitude(const Scenario& sc, double z) {
    const double rabi = rabi_frequency(sc.mode, z);
    const CouplingPoint bare = make_point(rabi, sc.bare_detuning());
    const LevelData lv = primed_level(sc.atom, sc.mode, bare);
    const CouplingPoint shifted = make_point(rabi, lv.detuning_shifted);
    return 0.5 * std::sin(2.0 * shifted.theta_c) * grad_rabi(sc.mode, z).norm();
}

// ---------------------------------------------------------------------------
// Invariant checks ("check" subcommand): static validation of the configured
// scenario, no time evolution.

struct CheckLine {
    std::string name;
    std::string status;  // PASS | WARN | FAIL
    std::string detail;
};

struct CheckReport {
    std::vector<CheckLine> lines;
    bool failed = false;
    bool warned = false;

    void add(const std::string& name, const std::string& status, const std::string& detail = "") {
        lines.push_back({name, status, detail});
        if (status == "FAIL") failed = true;
        if (status == "WARN") warned = true;
    }
};

inline CheckReport check_scenario(const Scenario& sc) {
    CheckReport rep;

    // profile gradient vs central differences; the scale floor keeps symmetry
    // zeros (antinodes) from turning FD noise into a relative error
    {
        double worst = 0.0;
        const double grad_scale =
            std::max(sc.mode.profile.amplitude() / sc.mode.profile.length_scale(), 1e-30);
        for (double z : sc.positions) {
            const double h = 1e-6 * sc.mode.profile.length_scale();
            if (!sc.mode.profile.contains(z - h) || !sc.mode.profile.contains(z + h)) continue;
            const double fd =
                (sc.mode.profile.value(z + h) - sc.mode.profile.value(z - h)) / (2.0 * h);
            const double an = sc.mode.profile.gradient(z);
            const double scale = std::max({std::abs(an), std::abs(fd), 1e-4 * grad_scale});
            worst = std::max(worst, std::abs(fd - an) / scale);
        }
        rep.add("profile_gradient_fd", worst < 1e-6 ? "PASS" : "FAIL",
                "max rel err " + detail::shortest(worst));
    }

    for (std::size_t pi = 0; pi < sc.positions.size(); ++pi) {
        const double z = sc.positions[pi];
        const std::string tag = "pos" + std::to_string(pi);
        const double rabi = rabi_frequency(sc.mode, z);
        const CouplingPoint bare = make_point(rabi, sc.bare_detuning());

        // coupling-point identities
        {
            const double e1 = std::abs(bare.omega - std::hypot(bare.rabi, bare.detuning));
            const double e2 = std::abs(std::sin(2.0 * bare.theta_c) * bare.omega - bare.rabi);
            const double e3 = std::abs(std::cos(2.0 * bare.theta_c) * bare.omega + bare.detuning);
            const double tol = 1e-12 * std::max(bare.omega, 1e-300);
            rep.add(tag + "_coupling_point", (e1 <= tol && e2 <= tol && e3 <= tol) ? "PASS" : "FAIL",
                    "identity residuals " + detail::shortest(std::max({e1, e2, e3})));
        }

        LevelData lv;
        try {
            lv = primed_level(sc.atom, sc.mode, bare);
        } catch (const convergence_error& e) {
            rep.add(tag + "_level_shift", "FAIL", e.what());
            continue;
        }
        rep.add(tag + "_gamma_prime", lv.gamma_prime_negative ? "WARN" : "PASS",
                lv.gamma_prime_negative
                    ? "Gamma'_1 = " + detail::shortest(lv.gamma_prime) +
                          " < 0: configured Gamma_1 below the mode-subtraction term"
                    : "Gamma'_1 = " + detail::shortest(lv.gamma_prime));

        // Markov consistency of the residual over the oracle window
        const double spacing_scale = sc.oracle.half_width_gammas * sc.mode.gamma_nu;
        rep.add(tag + "_markov_bound",
                markov_consistent(sc.atom.background, rabi, spacing_scale) ? "PASS" : "WARN",
                "gamma_bg * window vs Omega_R^2/2");

        for (std::size_t ti = 0; ti < sc.thetas.size(); ++ti) {
            const ModalSolution sol = make_modal_solution(lv, rabi, sc.thetas[ti]);
            const std::string stag = tag + "_th" + std::to_string(ti);
            // warn well before the evaluator's 1e-10 confluent switch: close to
            // the branch point the generic coefficients are ill-conditioned
            const double sep = std::abs(sol.root_plus - sol.root_minus);
            const double sep_scale =
                std::max({std::abs(sol.root_plus), std::abs(sol.root_minus), rabi});
            if (sol.degenerate || sep <= 1e-6 * sep_scale) {
                rep.add(stag + "_roots", "WARN",
                        sol.degenerate ? "repeated roots: confluent solution in use"
                                       : "near-repeated roots: confluent regime");
                continue;
            }
            const cdouble sum = sol.c_plus + sol.c_minus;
            const cdouble deriv = sol.root_plus * sol.c_plus + sol.root_minus * sol.c_minus;
            const cdouble want_deriv(0.0, -0.5 * rabi * std::sin(sc.thetas[ti]));
            const double e1 = std::abs(sum - std::cos(sc.thetas[ti]));
            const double e2 = std::abs(deriv - want_deriv);
            const cdouble vieta_sum = sol.root_plus + sol.root_minus + friction(lv);
            const cdouble vieta_prod = sol.root_plus * sol.root_minus - 0.25 * rabi * rabi;
            const double scale = std::max(rabi, std::abs(friction(lv)));
            const bool ok = e1 <= 1e-12 && e2 <= 1e-12 * std::max(rabi, 1.0) &&
                            std::abs(vieta_sum) <= 1e-12 * scale &&
                            std::abs(vieta_prod) <= 1e-12 * scale * scale;
            rep.add(stag + "_modal_invariants", ok ? "PASS" : "FAIL",
                    "initial-condition and Vieta residuals");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Run orchestration and output files.

struct RunOptions {
    std::filesystem::path out_dir = ".";
    Normalize normalize_override = Normalize::none;
    bool has_normalize_override = false;
    std::vector<Engine> engine_filter;  // empty = use scenario's list
    unsigned n_threads = 0;             // 0 = hardware_concurrency
};

struct RunResult {
    std::vector<Trace> traces;
    nlohmann::json metadata;
    std::vector<std::filesystem::path> files;
};

inline std::string trace_filename(const Trace& tr) {
    return engine_name(tr.engine) + "_th" + std::to_string(tr.theta_idx) + "_pos" +
           std::to_string(tr.pos_idx) + ".csv";
}

inline void write_trace_csv(const Trace& tr, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open output file " + path.string());
    os << "t,F_el,F_mag,population,U_theta,regime_flags\n";
    for (const TraceRow& r : tr.rows) {
        os << detail::shortest(r.t) << ',' << detail::shortest(r.f_el) << ','
           << detail::shortest(r.f_mag) << ',' << detail::shortest(r.population) << ','
           << detail::shortest(r.u_theta) << ',' << tr.flags << '\n';
    }
}

inline RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    const std::vector<Engine>& engines =
        opt.engine_filter.empty() ? sc.engines : opt.engine_filter;
    const Normalize normalize =
        opt.has_normalize_override ? opt.normalize_override : sc.normalize;

    struct Job {
        Engine engine;
        std::size_t ti, pi;
    };
    std::vector<Job> jobs;
    for (Engine e : engines)
        for (std::size_t ti = 0; ti < sc.thetas.size(); ++ti)
            for (std::size_t pi = 0; pi < sc.positions.size(); ++pi) jobs.push_back({e, ti, pi});

    RunResult result;
    result.traces.resize(jobs.size());
    std::vector<std::string> job_errors(jobs.size());

    std::atomic<std::size_t> next{0};
    const unsigned n_threads = std::max(
        1u, opt.n_threads != 0 ? opt.n_threads
                               : std::min<unsigned>(std::thread::hardware_concurrency(),
                                                    static_cast<unsigned>(jobs.size())));
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            try {
                result.traces[k] = compute_trace(sc, jobs[k].engine, jobs[k].ti, jobs[k].pi);
            } catch (const std::exception& e) {
                job_errors[k] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (std::size_t k = 0; k < jobs.size(); ++k)
        if (!job_errors[k].empty())
            throw error("trace " + engine_name(jobs[k].engine) + "[theta " +
                        std::to_string(jobs[k].ti) + ", pos " + std::to_string(jobs[k].pi) +
                        "]: " + job_errors[k]);

    // normalization by |F_+(t0)| per position
    std::vector<double> fplus(sc.positions.size(), 0.0);
    for (std::size_t pi = 0; pi < sc.positions.size(); ++pi)
        fplus[pi] = f_plus_magnitude(sc, sc.positions[pi]);
    std::vector<std::string> warnings;
    if (normalize == Normalize::f_plus) {
        for (Trace& tr : result.traces) {
            const double scale = fplus[tr.pos_idx];
            if (scale <= 0.0) {
                warnings.push_back(trace_filename(tr) + ": |F_+| vanishes here, normalization skipped");
                continue;
            }
            for (TraceRow& r : tr.rows) {
                r.f_el /= scale;
                r.f_mag /= scale;
            }
        }
    }
    for (const Trace& tr : result.traces)
        for (const std::string& w : tr.warnings) warnings.push_back(trace_filename(tr) + ": " + w);

    // metadata sidecar
    nlohmann::json meta;
    meta["resolved_config"] = scenario_to_json(sc);
    meta["normalize"] = normalize == Normalize::f_plus ? "Fplus" : "none";
    meta["factor_conventions"] = {{"force_mag_strong", "cc_doubled"},
                                  {"weak_force_magnetic", "zero"}};
    {
        nlohmann::json per_pos = nlohmann::json::array();
        for (std::size_t pi = 0; pi < sc.positions.size(); ++pi) {
            const double z = sc.positions[pi];
            const double rabi = rabi_frequency(sc.mode, z);
            const LevelData lv =
                primed_level(sc.atom, sc.mode, make_point(rabi, sc.bare_detuning()));
            per_pos.push_back({{"z", z},
                               {"rabi", rabi},
                               {"grad_rabi_z", grad_rabi(sc.mode, z).z},
                               {"delta_shift", lv.delta_shift},
                               {"gamma_prime", lv.gamma_prime},
                               {"detuning_shifted", lv.detuning_shifted},
                               {"gamma_total", lv.gamma_total},
                               {"gamma1_full", lv.gamma1_full},
                               {"f_plus_magnitude", fplus[pi]}});
        }
        meta["per_position"] = per_pos;
    }
    {
        const CheckReport rep = check_scenario(sc);
        nlohmann::json lines = nlohmann::json::array();
        for (const auto& l : rep.lines)
            lines.push_back({{"name", l.name}, {"status", l.status}, {"detail", l.detail}});
        meta["invariant_checks"] = lines;
    }

    // weak engine: report the fitted decay rate of the population trace
    for (const Trace& tr : result.traces) {
        if (tr.engine != Engine::weak || std::cos(tr.theta) == 0.0) continue;
        std::vector<double> ts, ps;
        for (const TraceRow& r : tr.rows) {
            ts.push_back(r.t - sc.time.t0);
            ps.push_back(r.population);
        }
        meta["fitted_rates"][trace_filename(tr)] = fit_decay_rate(ts, ps);
    }

    // oracle vs closed-form discrepancy report
    const auto find_trace = [&](Engine e, std::size_t ti, std::size_t pi) -> const Trace* {
        for (const Trace& tr : result.traces)
            if (tr.engine == e && tr.theta_idx == ti && tr.pos_idx == pi) return &tr;
        return nullptr;
    };
    for (const Trace& tr : result.traces) {
        if (tr.engine != Engine::oracle) continue;
        for (Engine closed : {Engine::dynamic_modal, Engine::dynamic_strong, Engine::dynamic_general}) {
            const Trace* other = find_trace(closed, tr.theta_idx, tr.pos_idx);
            if (!other) continue;
            double dpop = 0.0, df = 0.0, fpeak = 0.0;
            for (std::size_t i = 0; i < tr.rows.size(); ++i) {
                dpop = std::max(dpop, std::abs(std::sqrt(tr.rows[i].population) -
                                               std::sqrt(other->rows[i].population)));
                df = std::max(df, std::abs(tr.rows[i].f_el - other->rows[i].f_el));
                fpeak = std::max(fpeak, std::abs(tr.rows[i].f_el));
            }
            meta["oracle_comparison"][trace_filename(tr) + " vs " + engine_name(closed)] = {
                {"max_amplitude_discrepancy", dpop},
                {"max_force_discrepancy_rel_peak", fpeak > 0.0 ? df / fpeak : 0.0}};
        }
    }

    meta["warnings"] = warnings;
    result.metadata = std::move(meta);

    std::filesystem::create_directories(opt.out_dir);
    for (const Trace& tr : result.traces) {
        const auto path = opt.out_dir / trace_filename(tr);
        write_trace_csv(tr, path);
        result.files.push_back(path);
    }
    {
        const auto meta_path = opt.out_dir / "run_meta.json";
        std::ofstream os(meta_path, std::ios::binary);
        os << result.metadata.dump(2) << '\n';
        result.files.push_back(meta_path);
    }
    return result;
}

}  // namespace cpforce
