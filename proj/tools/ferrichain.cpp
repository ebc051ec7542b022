#include "ferri/studies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

// "a.b.c=value" into the config tree; values parse as JSON when they can,
// otherwise they stay strings.
void apply_override(nlohmann::json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ferri::ConfigError("bad --set", {"--set expects key=value, got '" + assignment + "'"});
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;
    }

    nlohmann::json* node = &cfg;
    size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty())
            throw ferri::ConfigError("bad --set", {"--set path has an empty segment: '" + path + "'"});
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

nlohmann::json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ferri::ConfigError("cannot open config", {path + ": not readable"});
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ferri::ConfigError("config parse error", {path + ": " + e.what()});
    }
}

int thread_count_from_env() {
    const char* env = std::getenv("FERRICHAIN_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ferrichain - ferrimagnetic chain ground states, mu-magnon analysis and entanglement scans"};
    app.set_version_flag("--version", FERRI_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;

    std::vector<std::string> commands(ferri::known_studies().begin(), ferri::known_studies().end());
    commands.push_back("validate");
    std::string chosen;
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name, name == "validate"
                                                 ? "check a configuration without running it"
                                                 : "run the '" + name + "' study");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--set", overrides, "override a config field, e.g. --set model.B=0.2");
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json cfg = load_config(config_path);
        for (const auto& o : overrides) apply_override(cfg, o);
        if (!out_dir.empty()) cfg["output"]["directory"] = out_dir;
        // FERRICHAIN_THREADS is accepted for forward compatibility; every
        // computation currently runs single-threaded and deterministic.
        const int threads = thread_count_from_env();
        if (threads > 1) std::cout << "threads=" << threads << " requested; running on 1\n";

        if (chosen == "validate") {
            const auto diagnostics = ferri::validate_config(cfg);
            for (const auto& d : diagnostics) std::cout << d << '\n';
            std::cout << (diagnostics.empty() ? "ok" : "invalid") << '\n';
            return diagnostics.empty() ? 0 : 2;
        }

        cfg["study"] = chosen;
        return ferri::run_study(cfg, std::cout);
    } catch (const ferri::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        for (const auto& d : e.diagnostics) std::cerr << "  " << d << '\n';
        return 2;
    } catch (const ferri::SolveError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        std::cerr << "  iterations=" << e.report.iterations << " residual=" << e.report.residual
                  << " tolerance=" << e.report.tolerance << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
