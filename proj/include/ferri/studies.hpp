#pragma once

#include "ferri/dictionary_io.hpp"
#include "ferri/entanglement.hpp"
#include "ferri/report.hpp"
#include "ferri/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ferri {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string what, std::vector<std::string> diagnostics)
        : std::runtime_error(std::move(what)), diagnostics(std::move(diagnostics)) {}
    std::vector<std::string> diagnostics;
};

inline const std::set<std::string>& known_studies() {
    static const std::set<std::string> studies = {"solve",           "amplitudes",
                                                  "dictionary",      "approx-gs",
                                                  "negativity-scan", "fidelity-truncation",
                                                  "fidelity-distort", "sector-scan"};
    return studies;
}

namespace detail {

inline uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace detail

/// Schema and cross-field checks without executing anything. Diagnostics are
/// anchored by their JSON path.
inline std::vector<std::string> validate_config(const nlohmann::json& cfg) {
    std::vector<std::string> out;
    const auto need = [&](const char* path, bool ok, const std::string& msg) {
        if (!ok) out.push_back(std::string(path) + ": " + msg);
    };

    const std::string study = cfg.value("study", "");
    need("study", known_studies().count(study) > 0, "unknown or missing study '" + study + "'");

    if (!cfg.contains("lattice") || !cfg["lattice"].is_object()) {
        out.push_back("lattice: missing block");
        return out;
    }
    const auto& lat = cfg["lattice"];
    const int n = lat.value("n_sites", 0);
    need("lattice.n_sites", n > 0, "must be a positive integer");
    bool pattern_ok = lat.contains("pattern") && lat["pattern"].is_array() && !lat["pattern"].empty();
    need("lattice.pattern", pattern_ok, "must be a nonempty array of half-integers like \"1/2\"");
    if (pattern_ok) {
        try {
            for (const auto& s : lat["pattern"]) HalfInt::parse(s.get<std::string>());
        } catch (const std::exception& e) {
            out.push_back(std::string("lattice.pattern: ") + e.what());
            pattern_ok = false;
        }
        if (pattern_ok && lat["pattern"].size() == 2 && n > 0 && n % 2 != 0)
            out.push_back("lattice.n_sites: alternating pattern needs an even site count");
    }
    const std::string boundary = lat.value("boundary", "ring");
    need("lattice.boundary", boundary == "ring" || boundary == "open", "must be 'ring' or 'open'");

    const auto& model = cfg.contains("model") ? cfg["model"] : nlohmann::json::object();
    if (study == "sector-scan") {
        const bool grid_ok = model.contains("B_grid") && model["B_grid"].is_array() &&
                             !model["B_grid"].empty();
        need("model.B_grid", grid_ok, "sector-scan needs a nonempty B grid");
        if (grid_ok)
            for (const auto& b : model["B_grid"])
                if (!b.is_number() || b.get<double>() < 0) {
                    out.push_back("model.B_grid: entries must be numbers >= 0");
                    break;
                }
    } else {
        need("model.B", model.value("B", 0.0) >= 0.0, "field must be >= 0");
    }
    need("model.J", model.value("J", 1.0) != 0.0, "coupling must be nonzero");

    if (cfg.contains("solver")) {
        const auto& solver = cfg["solver"];
        need("solver.tol", solver.value("tol", 0.0) >= 0.0, "tolerance must be >= 0 (0 = default)");
        need("solver.max_matvecs", solver.value("max_matvecs", 20000) > 0, "must be positive");
    }

    const auto& params = cfg.contains("study_params") ? cfg["study_params"] : nlohmann::json::object();
    if (study == "approx-gs")
        need("study_params.dictionary_file", params.contains("dictionary_file"),
             "approx-gs needs a dictionary path");
    if (study == "approx-gs" || study == "dictionary")
        need("study_params.threshold", params.value("threshold", 1e-3) > 0, "must be positive");
    if (study == "negativity-scan")
        need("study_params.separations",
             params.contains("separations") && params["separations"].is_array() &&
                 !params["separations"].empty(),
             "negativity-scan needs a pair-separation grid");
    if (study == "fidelity-truncation") {
        const bool ok = params.contains("fractions") && params["fractions"].is_array() &&
                        !params["fractions"].empty();
        need("study_params.fractions", ok, "fidelity-truncation needs retained fractions");
        if (ok)
            for (const auto& f : params["fractions"])
                if (!f.is_number() || f.get<double>() <= 0 || f.get<double>() > 1) {
                    out.push_back("study_params.fractions: entries must lie in (0, 1]");
                    break;
                }
    }
    if (study == "fidelity-distort") {
        need("study_params.sigmas",
             params.contains("sigmas") && params["sigmas"].is_array() && !params["sigmas"].empty(),
             "fidelity-distort needs a sigma grid");
        need("study_params.trials", params.value("trials", 40) >= 1, "must be at least 1");
    }
    return out;
}

namespace detail {

inline LatticeSpec lattice_from_config(const nlohmann::json& cfg, double field) {
    const auto& lat = cfg.at("lattice");
    LatticeSpec out;
    out.n_sites = lat.at("n_sites").get<int>();
    std::vector<HalfInt> pattern;
    for (const auto& s : lat.at("pattern")) pattern.push_back(HalfInt::parse(s.get<std::string>()));
    for (int k = 0; k < out.n_sites; ++k) out.spins.push_back(pattern[static_cast<size_t>(k) % pattern.size()]);
    out.boundary = boundary_from_string(lat.value("boundary", "ring"));
    out.coupling = cfg.contains("model") ? cfg["model"].value("J", 1.0) : 1.0;
    out.field = field;
    validate(out);
    return out;
}

inline HalfInt sector_from_config(const nlohmann::json& cfg, const LatticeSpec& lat) {
    if (cfg.contains("study_params") && cfg["study_params"].contains("sector"))
        return HalfInt::parse(cfg["study_params"]["sector"].get<std::string>());
    return neel_sector_sz(lat);
}

inline LanczosOptions solver_from_config(const nlohmann::json& cfg) {
    LanczosOptions opts;
    if (cfg.contains("solver")) {
        const auto& s = cfg["solver"];
        opts.tol = s.value("tol", 0.0) > 0 ? s["tol"].get<double>() : -1.0;
        opts.max_matvecs = s.value("max_matvecs", 20000);
        opts.seed = s.value("seed", uint64_t{1});
    }
    return opts;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string(), {"output.directory: not writable"});
    return os;
}

inline std::vector<int> sites_from_params(const nlohmann::json& params, const char* key,
                                          std::vector<int> fallback) {
    if (!params.contains(key)) return fallback;
    std::vector<int> sites;
    for (const auto& s : params[key]) sites.push_back(s.get<int>() - 1);  // config files are 1-based
    return sites;
}

} // namespace detail

/// Executes one study. Artifacts land in output.directory, each run carrying
/// the exact config next to its outputs. Returns 0 on success; ConfigError
/// and SolveError map to the CLI exit codes 2 and 3.
inline int run_study(const nlohmann::json& cfg, std::ostream& log) {
    const auto diagnostics = validate_config(cfg);
    if (!diagnostics.empty()) throw ConfigError("invalid configuration", diagnostics);

    const std::string study = cfg.at("study").get<std::string>();
    const auto& params = cfg.contains("study_params") ? cfg["study_params"] : nlohmann::json::object();
    const std::filesystem::path outdir =
        cfg.contains("output") ? cfg["output"].value("directory", "out") : "out";
    std::filesystem::create_directories(outdir);

    bool want_svg = false;
    if (cfg.contains("output") && cfg["output"].contains("formats"))
        for (const auto& f : cfg["output"]["formats"]) want_svg |= f.get<std::string>() == "svg";

    ProvenanceHeader header;
    header.tool = std::string("ferrichain ") + FERRI_VERSION;
    header.config_hash = detail::hex64(detail::fnv1a(cfg.dump()));
    header.seed = cfg.contains("solver") ? cfg["solver"].value("seed", uint64_t{1}) : uint64_t{1};

    {
        auto os = detail::open_output(outdir / "config.json");
        os << cfg.dump(2) << '\n';
    }

    const auto solver = detail::solver_from_config(cfg);
    const auto emit_svg = [&](const std::string& name, const std::vector<ScanColumn>& cols) {
        if (!want_svg) return;
        auto os = detail::open_output(outdir / (name + ".svg"));
        write_scan_svg(os, name, cols);
    };

    if (study == "sector-scan") {
        const LatticeSpec lat = detail::lattice_from_config(cfg, 0.0);
        std::vector<double> grid;
        for (const auto& b : cfg["model"]["B_grid"]) grid.push_back(b.get<double>());
        const auto scan = sector_scan(HamiltonianSpec{lat}, grid, solver);
        auto os = detail::open_output(outdir / "sector_scan.csv");
        header.write(os);
        os << "B,M,energy,n_tied\n";
        for (const auto& e : scan)
            os << format_double(e.field) << ',' << e.best_m.front().str() << ','
               << format_double(e.energy) << ',' << e.best_m.size() << '\n';
        log << "sector scan over " << grid.size() << " field values written\n";
        return 0;
    }

    const double field = cfg.contains("model") ? cfg["model"].value("B", 0.0) : 0.0;
    const LatticeSpec lat = detail::lattice_from_config(cfg, field);
    const HamiltonianSpec spec{lat};

    if (study == "approx-gs") {
        std::ifstream dict_in(params.at("dictionary_file").get<std::string>());
        if (!dict_in)
            throw ConfigError("cannot read dictionary",
                              {"study_params.dictionary_file: not readable"});
        const StructureDictionary dict = read_dictionary(dict_in);
        const double threshold = params.value("threshold", 1e-3);
        CandidateOptions copts;
        copts.max_mumagnons = params.value("max_mumagnons", copts.max_mumagnons);
        copts.max_deep_lowered = params.value("max_deep_lowered", copts.max_deep_lowered);
        const auto approx = approximate_ground_state(lat, dict, threshold, copts);
        auto os = detail::open_output(outdir / "approx_gs.csv");
        header.write(os);
        os << "packed,alpha_r_estimate,amplitude\n";
        for (size_t i = 0; i < approx.size(); ++i)
            os << packed_hex(approx.packed[i]) << ',' << format_double(approx.alpha_r[i]) << ','
               << format_double(approx.amp(i)) << '\n';
        log << "approximate state with " << approx.size() << " configurations, norm "
            << approx.norm << '\n';
        return 0;
    }

    // every remaining study needs the exact sector ground state
    const HalfInt m = detail::sector_from_config(cfg, lat);
    auto [state, rep] = ground_state(spec, m, solver);
    log << "ground state: N=" << lat.n_sites << " M=" << m.str() << " E=" << format_double(state.energy)
        << " residual=" << rep.residual << " matvecs=" << rep.iterations << '\n';

    if (study == "solve") {
        auto os = detail::open_output(outdir / "ground_state.csv");
        header.write(os);
        write_ground_state(os, state, rep, header.seed);
        nlohmann::json summary;
        summary["energy"] = state.energy;
        summary["neel_amplitude"] = lat.is_alternating() ? neel_amplitude(state) : 0.0;
        summary["sector"] = m.str();
        summary["dimension"] = state.basis.size();
        summary["iterations"] = rep.iterations;
        summary["residual"] = rep.residual;
        summary["degenerate"] = rep.degenerate;
        auto js = detail::open_output(outdir / "solve.json");
        js << summary.dump(2) << '\n';
        return 0;
    }

    if (study == "amplitudes") {
        const size_t k = params.value("top_k", size_t{70});
        const bool orbits = params.value("group_orbits", true);
        const auto listing = top_amplitudes(state, k, orbits);
        const double neel = lat.is_alternating() ? neel_amplitude(state) : 1.0;
        auto os = detail::open_output(outdir / "amplitudes.csv");
        header.write(os);
        os << "rank,packed,configuration,amplitude,alpha_r,orbit_size\n";
        for (size_t i = 0; i < listing.size(); ++i)
            os << i + 1 << ',' << packed_hex(pack(lat, listing[i].config)) << ",\""
               << config_str(lat, listing[i].config) << "\"," << format_double(listing[i].amp) << ','
               << format_double(listing[i].amp / neel) << ',' << listing[i].orbit_size << '\n';
        return 0;
    }

    if (study == "dictionary") {
        const StructureDictionary dict =
            build_dictionary(state, params.value("max_structure_length", 7),
                             params.value("max_pair_gap", 6), params.value("far_gap", 4));
        auto os = detail::open_output(outdir / "dictionary.json");
        write_dictionary(os, dict);
        log << "dictionary with " << dict.singles.size() << " singles and " << dict.pairs.size()
            << " pair factors\n";
        for (const auto& note : dict.build_notes) log << "note: " << note << '\n';
        return 0;
    }

    if (study == "negativity-scan") {
        const auto first = detail::sites_from_params(params, "first_pair", {0, 1});
        std::vector<ScanColumn> cols{{"D", {}}, {"N4", {}}};
        for (const auto& dj : params["separations"]) {
            const int d = dj.get<int>();
            std::vector<int> sites = {first[0], first[1], first[0] + 2 + d, first[1] + 2 + d};
            if (lat.boundary == Boundary::Open && sites.back() >= lat.n_sites)
                throw ConfigError("separation grid exceeds the open chain",
                                  {"study_params.separations: D=" + std::to_string(d) +
                                   " places the second pair outside the " +
                                   std::to_string(lat.n_sites) + "-site chain"});
            for (auto& s : sites)
                s = lat.boundary == Boundary::Ring ? s % lat.n_sites : s;
            const auto rdm = reduced_density_matrix(state, sites);
            cols[0].values.push_back(d);
            cols[1].values.push_back(four_partite_negativity(rdm));
        }
        auto os = detail::open_output(outdir / "negativity.csv");
        write_scan_csv(os, header, cols);
        emit_svg("negativity", cols);
        return 0;
    }

    if (study == "fidelity-truncation") {
        const auto sites = detail::sites_from_params(params, "sites", {0, 1, 2, 3});
        std::vector<double> fractions;
        for (const auto& f : params["fractions"]) fractions.push_back(f.get<double>());
        const auto scan = truncation_infidelity_scan(state, sites, fractions);
        std::vector<ScanColumn> cols{{"fraction", {}}, {"infidelity", {}}};
        for (const auto& p : scan) {
            cols[0].values.push_back(p.fraction);
            cols[1].values.push_back(p.infidelity);
        }
        auto os = detail::open_output(outdir / "truncation.csv");
        write_scan_csv(os, header, cols);
        emit_svg("truncation", cols);
        return 0;
    }

    if (study == "fidelity-distort") {
        const auto sites = detail::sites_from_params(params, "sites", {0, 1, 2, 3});
        const int trials = params.value("trials", 40);
        std::vector<ScanColumn> cols{{"sigma", {}}, {"mean_fidelity", {}}, {"stderr", {}}};
        for (const auto& sj : params["sigmas"]) {
            const auto r = distortion_fidelity(state, sites, sj.get<double>(), trials, header.seed);
            cols[0].values.push_back(r.sigma);
            cols[1].values.push_back(r.mean_fidelity);
            cols[2].values.push_back(r.stderr_fidelity);
        }
        auto os = detail::open_output(outdir / "distort.csv");
        write_scan_csv(os, header, cols);
        emit_svg("distort", cols);
        return 0;
    }

    throw ConfigError("unhandled study", {"study: '" + study + "' is not implemented"});
}

} // namespace ferri
