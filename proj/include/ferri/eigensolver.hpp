#pragma once

#include "ferri/hamiltonian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ferri {

struct SolveReport {
    int iterations = 0;        // matrix-vector products
    int restarts = 0;
    double residual = 0.0;     // ||H v - E v||
    double tolerance = 0.0;
    bool degenerate = false;   // gap below degeneracy tolerance
    bool converged = false;
    double seconds = 0.0;
};

/// Normalized real ground vector over a sector basis, phase-fixed so the
/// Neel amplitude (or the largest amplitude if the sector lacks the Neel
/// configuration) is nonnegative.
struct GroundStateVector {
    SectorBasis basis;
    std::vector<double> amps;
    double energy = 0.0;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveReport report)
        : std::runtime_error(what), report(report) {}
    SolveReport report;
};

struct LanczosOptions {
    double tol = -1.0;        // absolute residual; <= 0 picks 1e-10 * |J| * N
    int max_matvecs = 20000;
    int max_basis = 200;      // restart cap on stored Lanczos vectors
    uint64_t seed = 1;
    double degeneracy_tol = -1.0;  // <= 0 picks 1e-8 * |J|
};

namespace detail {

// splitmix64; deterministic across platforms, unlike <random> distributions.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform_pm1(uint64_t& state) {
    return 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
}

inline void fix_phase(const SectorBasis& basis, std::vector<double>& amps) {
    double pivot = 0.0;
    if (basis.lattice().is_alternating()) {
        const auto neel = basis.index_of(neel_configuration(basis.lattice()));
        if (neel) pivot = amps[*neel];
    }
    if (pivot == 0.0) {
        size_t arg = 0;
        for (size_t i = 1; i < amps.size(); ++i)
            if (std::abs(amps[i]) > std::abs(amps[arg])) arg = i;
        pivot = amps[arg];
    }
    if (pivot < 0.0)
        for (auto& a : amps) a = -a;
}

} // namespace detail

/// Lowest eigenpair of the sector Hamiltonian via restarted Lanczos with
/// full reorthogonalization and a seeded start vector. Throws SolveError on
/// non-convergence, with the report attached.
inline std::pair<GroundStateVector, SolveReport> ground_state(const HamiltonianSpec& spec,
                                                              HalfInt m,
                                                              LanczosOptions opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    SectorBasis basis = enumerate_sector(spec.lattice, m);
    if (basis.size() == 0) throw std::invalid_argument("empty magnetization sector");
    const size_t dim = basis.size();
    const double scale = std::abs(spec.lattice.coupling) * spec.lattice.n_sites;
    const double tol = opts.tol > 0 ? opts.tol : 1e-10 * std::max(scale, 1.0);
    const double deg_tol =
        opts.degeneracy_tol > 0 ? opts.degeneracy_tol : 1e-8 * std::max(std::abs(spec.lattice.coupling), 1e-300);

    HamiltonianOperator op(spec, basis);
    SolveReport report;
    report.tolerance = tol;

    std::vector<double> x(dim);
    uint64_t rng = opts.seed ? opts.seed : 1;
    for (auto& v : x) v = detail::uniform_pm1(rng);
    {
        double nrm = 0.0;
        for (double v : x) nrm += v * v;
        nrm = std::sqrt(nrm);
        for (auto& v : x) v /= nrm;
    }

    const int max_basis = std::max(2, std::min<int>(opts.max_basis, static_cast<int>(dim)));
    double theta = 0.0, gap = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> vecs;
    std::vector<double> alpha, beta;
    std::vector<double> w(dim);

    const auto dot = [dim](const double* a, const double* b) {
        double s = 0.0;
        for (size_t i = 0; i < dim; ++i) s += a[i] * b[i];
        return s;
    };

    bool done = false;
    while (!done) {
        vecs.clear();
        alpha.clear();
        beta.clear();
        vecs.push_back(x);
        bool breakdown = false;

        for (int j = 0; j < max_basis && report.iterations < opts.max_matvecs; ++j) {
            op.apply(vecs.back().data(), w.data());
            ++report.iterations;
            alpha.push_back(dot(w.data(), vecs.back().data()));
            // two passes of Gram-Schmidt against every stored vector
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& u : vecs) {
                    const double c = dot(w.data(), u.data());
                    for (size_t i = 0; i < dim; ++i) w[i] -= c * u[i];
                }
            const double b = std::sqrt(dot(w.data(), w.data()));
            beta.push_back(b);

            const int k = static_cast<int>(alpha.size());
            Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
            Eigen::VectorXd sub =
                k > 1 ? Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1) : Eigen::VectorXd();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            theta = es.eigenvalues()(0);
            gap = k > 1 ? es.eigenvalues()(1) - theta : std::numeric_limits<double>::infinity();
            const double res_est = b * std::abs(es.eigenvectors()(k - 1, 0));

            breakdown = b <= 1e-13 * std::max(scale, 1.0);
            if (res_est <= 0.1 * tol || breakdown || static_cast<size_t>(k) == dim ||
                j == max_basis - 1 || report.iterations >= opts.max_matvecs) {
                // assemble the Ritz vector
                std::fill(x.begin(), x.end(), 0.0);
                for (int c = 0; c < k; ++c) {
                    const double s = es.eigenvectors()(c, 0);
                    const auto& u = vecs[static_cast<size_t>(c)];
                    for (size_t i = 0; i < dim; ++i) x[i] += s * u[i];
                }
                double nrm = std::sqrt(dot(x.data(), x.data()));
                for (auto& v : x) v /= nrm;
                break;
            }
            for (auto& v : w) v /= b;
            vecs.push_back(w);
        }

        op.apply(x.data(), w.data());
        ++report.iterations;
        const double e = dot(w.data(), x.data());
        double res = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            const double r = w[i] - e * x[i];
            res += r * r;
        }
        res = std::sqrt(res);
        report.residual = res;
        theta = e;
        if (res <= tol || breakdown) {
            report.converged = res <= tol;
            done = true;
        } else if (report.iterations >= opts.max_matvecs) {
            done = true;
        } else {
            ++report.restarts;
        }
    }

    report.degenerate = gap < deg_tol;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!report.converged)
        throw SolveError("Lanczos did not reach the requested residual", report);

    detail::fix_phase(basis, x);
    GroundStateVector gs{std::move(basis), std::move(x), theta};
    return {std::move(gs), report};
}

/// Full dense eigendecomposition; the test oracle for ground_state.
/// Returns the phase-fixed lowest eigenvector plus the complete spectrum.
inline std::pair<GroundStateVector, Eigen::VectorXd> dense_ground_state(const HamiltonianSpec& spec,
                                                                        HalfInt m,
                                                                        size_t dim_cap = 4096) {
    SectorBasis basis = enumerate_sector(spec.lattice, m);
    if (basis.size() == 0) throw std::invalid_argument("empty magnetization sector");
    if (basis.size() > dim_cap) throw std::invalid_argument("sector exceeds dense dimension cap");
    const Eigen::MatrixXd h = dense_matrix(spec, basis, dim_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    std::vector<double> amps(basis.size());
    for (size_t i = 0; i < basis.size(); ++i) amps[i] = es.eigenvectors()(static_cast<Eigen::Index>(i), 0);
    detail::fix_phase(basis, amps);
    GroundStateVector gs{std::move(basis), std::move(amps), es.eigenvalues()(0)};
    return {std::move(gs), es.eigenvalues()};
}

/// <config|Psi0>; zero (with in_sector=false) when the configuration lies
/// outside the state's sector.
inline double amplitude(const GroundStateVector& state, const SpinConfiguration& c,
                        bool* in_sector = nullptr) {
    const auto idx = state.basis.index_of(c);
    if (in_sector) *in_sector = idx.has_value();
    return idx ? state.amps[*idx] : 0.0;
}

inline double neel_amplitude(const GroundStateVector& state) {
    const auto idx = state.basis.index_of(neel_configuration(state.basis.lattice()));
    if (!idx) throw std::logic_error("Neel configuration is not in the state's sector");
    return state.amps[*idx];
}

/// alpha_r = alpha(config) / alpha(Neel).
inline double relative_amplitude(const GroundStateVector& state, const SpinConfiguration& c,
                                 bool* in_sector = nullptr) {
    return amplitude(state, c, in_sector) / neel_amplitude(state);
}

// --- lattice symmetries (translations and reflections preserving the spin
// pattern), used for orbit grouping of amplitude listings ---

struct SiteMap {
    std::vector<int> to;  // image of each site
};

inline std::vector<SiteMap> lattice_symmetries(const LatticeSpec& lat) {
    const int n = lat.n_sites;
    std::vector<SiteMap> ops;
    const auto pattern_ok = [&](const SiteMap& op) {
        for (int j = 0; j < n; ++j)
            if (lat.spin(op.to[static_cast<size_t>(j)]) != lat.spin(j)) return false;
        return true;
    };
    if (lat.boundary == Boundary::Ring) {
        for (int t = 0; t < n; ++t) {
            SiteMap tr;
            tr.to.resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) tr.to[static_cast<size_t>(j)] = (j + t) % n;
            if (pattern_ok(tr)) ops.push_back(tr);
        }
        for (int c = 0; c < n; ++c) {
            SiteMap rf;
            rf.to.resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) rf.to[static_cast<size_t>(j)] = ((c - j) % n + n) % n;
            if (pattern_ok(rf)) ops.push_back(rf);
        }
    } else {
        SiteMap id;
        id.to.resize(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) id.to[static_cast<size_t>(j)] = j;
        ops.push_back(id);
        SiteMap rf;
        rf.to.resize(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) rf.to[static_cast<size_t>(j)] = n - 1 - j;
        if (pattern_ok(rf)) ops.push_back(rf);
    }
    return ops;
}

inline SpinConfiguration apply_site_map(const SiteMap& op, const SpinConfiguration& c) {
    SpinConfiguration out;
    out.levels.resize(c.levels.size());
    for (size_t j = 0; j < c.levels.size(); ++j)
        out.levels[static_cast<size_t>(op.to[j])] = c.levels[j];
    return out;
}

/// Smallest packed value over the symmetry orbit of c, plus the orbit size.
inline std::pair<uint64_t, int> orbit_representative(const LatticeSpec& lat,
                                                     const std::vector<SiteMap>& ops,
                                                     const SpinConfiguration& c) {
    uint64_t best = ~uint64_t{0};
    std::vector<uint64_t> seen;
    for (const auto& op : ops) {
        const uint64_t p = pack(lat, apply_site_map(op, c));
        best = std::min(best, p);
        seen.push_back(p);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    return {best, static_cast<int>(seen.size())};
}

struct AmplitudeEntry {
    SpinConfiguration config;
    double amp = 0.0;
    int orbit_size = 1;
};

/// The K configurations of largest |amplitude|, descending; ties broken by
/// ascending packed value. With group_orbits set, one representative per
/// symmetry orbit is listed.
inline std::vector<AmplitudeEntry> top_amplitudes(const GroundStateVector& state, size_t k,
                                                  bool group_orbits = false) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    const auto& basis = state.basis;
    std::vector<size_t> order(basis.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double da = std::abs(state.amps[a]), db = std::abs(state.amps[b]);
        if (da != db) return da > db;
        return basis.packed(a) < basis.packed(b);
    });

    std::vector<AmplitudeEntry> out;
    if (!group_orbits) {
        for (size_t r = 0; r < order.size() && out.size() < k; ++r)
            out.push_back({basis.config(order[r]), state.amps[order[r]], 1});
        return out;
    }
    const auto ops = lattice_symmetries(basis.lattice());
    std::map<uint64_t, bool> emitted;
    for (size_t r = 0; r < order.size() && out.size() < k; ++r) {
        const auto c = basis.config(order[r]);
        const auto [rep, orbit_size] = orbit_representative(basis.lattice(), ops, c);
        if (emitted.count(rep)) continue;
        emitted[rep] = true;
        out.push_back({unpack(basis.lattice(), rep), state.amps[order[r]], orbit_size});
    }
    return out;
}

// --- sector scan over field strength ---

struct SectorScanEntry {
    double field = 0.0;
    std::vector<HalfInt> best_m;  // ties listed, smallest first
    double energy = 0.0;          // E0(M) - B*M at the winning sector
    bool degenerate = false;
};

/// For each B >= 0 in the grid, the sector magnetization minimizing
/// E0(M) - B*M. The Heisenberg part commutes with the field term, so each
/// sector is solved once at B=0 and the field enters as the exact shift.
inline std::vector<SectorScanEntry> sector_scan(const HamiltonianSpec& spec,
                                                const std::vector<double>& b_grid,
                                                LanczosOptions opts = {},
                                                double tie_tol = -1.0) {
    for (double b : b_grid)
        if (b < 0) throw std::invalid_argument("sector scan expects B >= 0");
    HamiltonianSpec zero_field = spec;
    zero_field.lattice.field = 0.0;
    const double tie =
        tie_tol > 0 ? tie_tol : 1e-8 * std::max(std::abs(spec.lattice.coupling), 1.0) * spec.lattice.n_sites;

    // E0(-M) = E0(M) by global spin flip, so only M >= 0 is solved.
    std::vector<std::pair<HalfInt, double>> sector_energy;
    for (HalfInt m : feasible_sectors(spec.lattice)) {
        if (m.twice() < 0) continue;
        if (enumerate_sector(spec.lattice, m).size() == 0) continue;
        auto [gs, rep] = ground_state(zero_field, m, opts);
        sector_energy.emplace_back(m, gs.energy);
    }

    std::vector<SectorScanEntry> out;
    for (double b : b_grid) {
        SectorScanEntry e;
        e.field = b;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [m, e0] : sector_energy) best = std::min(best, e0 - b * m.value());
        for (const auto& [m, e0] : sector_energy)
            if (e0 - b * m.value() <= best + tie) e.best_m.push_back(m);
        e.energy = best;
        e.degenerate = e.best_m.size() > 1;
        out.push_back(std::move(e));
    }
    return out;
}

// --- ground-state file round trip (CSV with a provenance header) ---

inline void write_ground_state(std::ostream& os, const GroundStateVector& state,
                               const SolveReport& report, uint64_t seed) {
    const auto& lat = state.basis.lattice();
    char buf[64];
    os << "# ferrichain ground state v1\n";
    os << "# n_sites=" << lat.n_sites << '\n';
    os << "# spins=" << lat.spins_str() << '\n';
    os << "# boundary=" << to_string(lat.boundary) << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", lat.coupling);
    os << "# J=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", lat.field);
    os << "# B=" << buf << '\n';
    os << "# M=" << state.basis.sector().total_sz.str() << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", state.energy);
    os << "# energy=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", report.tolerance);
    os << "# tol=" << buf << '\n';
    os << "# seed=" << seed << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", report.residual);
    os << "# residual=" << buf << '\n';
    os << "packed,amplitude\n";
    for (size_t i = 0; i < state.basis.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", state.amps[i]);
        os << packed_hex(state.basis.packed(i)) << ',' << buf << '\n';
    }
}

inline GroundStateVector read_ground_state(std::istream& is) {
    std::map<std::string, std::string> header;
    std::string line;
    std::vector<std::pair<uint64_t, double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            header[key] = line.substr(eq + 1);
            continue;
        }
        if (line.rfind("packed,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed ground-state row: " + line);
        rows.emplace_back(std::stoull(line.substr(0, comma), nullptr, 16),
                          std::stod(line.substr(comma + 1)));
    }
    for (const char* key : {"n_sites", "spins", "boundary", "J", "B", "M", "energy"})
        if (!header.count(key)) throw std::runtime_error(std::string("ground-state header missing ") + key);

    LatticeSpec lat;
    lat.n_sites = std::stoi(header["n_sites"]);
    std::stringstream ss(header["spins"]);
    std::string tok;
    while (std::getline(ss, tok, ',')) lat.spins.push_back(HalfInt::parse(tok));
    lat.boundary = boundary_from_string(header["boundary"]);
    lat.coupling = std::stod(header["J"]);
    lat.field = std::stod(header["B"]);
    validate(lat);

    SectorBasis basis = enumerate_sector(lat, HalfInt::parse(header["M"]));
    if (rows.size() != basis.size())
        throw std::runtime_error("ground-state file row count does not match the sector dimension");
    std::vector<double> amps(basis.size(), 0.0);
    for (const auto& [packed, amp] : rows) {
        const auto idx = basis.index_of(packed);
        if (!idx) throw std::runtime_error("ground-state row outside the sector: " + packed_hex(packed));
        amps[*idx] = amp;
    }
    return GroundStateVector{std::move(basis), std::move(amps), std::stod(header["energy"])};
}

} // namespace ferri
