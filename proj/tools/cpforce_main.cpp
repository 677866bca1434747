// cpforce: configuration-driven runner for resonant Casimir-Polder force
// computations (static dressed-state, closed-form dynamic, weak-coupling and
// brute-force discretized-continuum engines).
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime/convergence error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpforce/engine.hpp"
#include "cpforce/scenario.hpp"

namespace {

int line_of_offset(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

cpforce::Scenario load_scenario(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw cpforce::config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw cpforce::config_error(path + ":" + std::to_string(line_of_offset(text, e.byte)) +
                                    ": " + e.what());
    }
    try {
        return cpforce::scenario_from_json(j);
    } catch (const cpforce::error& e) {
        throw cpforce::config_error(path + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonant Casimir-Polder forces for a two-level atom coupled to a "
                 "Lorentzian mode"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string normalize = "";
    std::vector<std::string> engine_names;

    auto* run = app.add_subcommand("run", "compute traces for a config file");
    run->add_option("config", config_path, "JSON scenario file")->required();
    run->add_option("--out", out_dir, "output directory (default $CPFORCE_OUT or .)");
    run->add_option("--normalize", normalize, "force normalization: Fplus or none");
    run->add_option("--engines", engine_names, "subset of engines to run")->delimiter(',');

    auto* check = app.add_subcommand("check", "run the invariant suite on a config file");
    check->add_option("config", config_path, "JSON scenario file")->required();

    auto* presets = app.add_subcommand("presets", "list builtin presets or emit one as JSON");
    std::string presets_action;
    std::string preset_name;
    presets->add_option("action", presets_action, "list | emit")->required();
    presets->add_option("name", preset_name, "preset name for emit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            if (presets_action == "list") {
                for (const auto& n : cpforce::preset_names()) std::cout << n << '\n';
                return 0;
            }
            if (presets_action == "emit") {
                if (preset_name.empty()) {
                    std::cerr << "presets emit: missing preset name\n";
                    return 1;
                }
                const auto sc = cpforce::preset_by_name(preset_name);
                std::cout << cpforce::scenario_to_json(sc).dump(2) << '\n';
                return 0;
            }
            std::cerr << "presets: unknown action '" << presets_action << "' (use list|emit)\n";
            return 1;
        }

        const cpforce::Scenario sc = load_scenario(config_path);

        if (check->parsed()) {
            const auto rep = cpforce::check_scenario(sc);
            for (const auto& l : rep.lines)
                std::cout << "[" << l.status << "] " << l.name
                          << (l.detail.empty() ? "" : ": " + l.detail) << '\n';
            std::cout << (rep.failed ? "check: FAIL" : rep.warned ? "check: PASS (with warnings)"
                                                                  : "check: PASS")
                      << '\n';
            return rep.failed ? 2 : 0;
        }

        cpforce::RunOptions opt;
        if (!out_dir.empty()) {
            opt.out_dir = out_dir;
        } else if (const char* env = std::getenv("CPFORCE_OUT")) {
            opt.out_dir = env;
        }
        if (!normalize.empty()) {
            opt.has_normalize_override = true;
            if (normalize == "Fplus") opt.normalize_override = cpforce::Normalize::f_plus;
            else if (normalize == "none") opt.normalize_override = cpforce::Normalize::none;
            else {
                std::cerr << "--normalize: expected Fplus or none\n";
                return 1;
            }
        }
        for (const auto& n : engine_names)
            opt.engine_filter.push_back(cpforce::engine_from_name(n));

        const auto result = cpforce::run_scenario(sc, opt);
        for (const auto& p : result.files) std::cout << p.string() << '\n';
        const auto& warnings = result.metadata["warnings"];
        for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
        return 0;
    } catch (const cpforce::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
