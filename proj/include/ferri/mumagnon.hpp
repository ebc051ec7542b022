#pragma once

#include "ferri/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace ferri {

/// A contiguous deviation from the Neel pattern: the window where the
/// running magnetization (relative to Neel) is nonzero, closed inclusively
/// at the site where it returns to zero.
struct Structure {
    int start = 0;                 // first window site, in scan order
    std::vector<HalfInt> values;   // z-projections over the window, in scan order
    bool starts_small = true;      // first window site on the small-spin sublattice

    int length() const { return static_cast<int>(values.size()); }
};

struct StructureKey {
    bool starts_small = true;
    std::vector<int> twice_values;

    friend bool operator<(const StructureKey& a, const StructureKey& b) {
        return std::tie(a.starts_small, a.twice_values) < std::tie(b.starts_small, b.twice_values);
    }
    friend bool operator==(const StructureKey& a, const StructureKey& b) {
        return a.starts_small == b.starts_small && a.twice_values == b.twice_values;
    }
};

inline StructureKey key_of(const Structure& s) {
    StructureKey k;
    k.starts_small = s.starts_small;
    k.twice_values.reserve(s.values.size());
    for (auto v : s.values) k.twice_values.push_back(v.twice());
    return k;
}

/// Signature of the same window read in the opposite direction.
inline StructureKey mirrored(const StructureKey& k) {
    StructureKey m;
    m.twice_values.assign(k.twice_values.rbegin(), k.twice_values.rend());
    m.starts_small = k.twice_values.size() % 2 == 0 ? !k.starts_small : k.starts_small;
    return m;
}

inline std::string key_str(const StructureKey& k) {
    std::string out = k.starts_small ? "s:" : "l:";
    for (size_t i = 0; i < k.twice_values.size(); ++i) {
        if (i) out += ',';
        out += HalfInt::from_twice(k.twice_values[i]).str();
    }
    return out;
}

struct ParsedConfiguration {
    std::vector<Structure> structures;
    // Ring: gaps[i] = intact sites after structure i, cyclically (gaps has one
    // full-length entry for the pure Neel state). Open: gaps[0] precedes the
    // first structure and gaps[i+1] follows structure i.
    std::vector<int> gaps;
    bool in_sector = true;
};

namespace detail {

inline std::vector<int> scan_order(const LatticeSpec& lat, const std::vector<int>& twice_dev,
                                   bool reverse) {
    const int n = lat.n_sites;
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = reverse ? n - 1 - i : i;
    if (lat.boundary == Boundary::Open) return order;

    // Start a ring scan just past the longest run of intact sites so that no
    // structure is split across the scan seam. Ties pick the earliest run.
    int best_len = 0, best_end = -1;
    int run = 0;
    for (int i = 0; i < 2 * n; ++i) {
        const int site = order[static_cast<size_t>(i % n)];
        if (twice_dev[static_cast<size_t>(site)] == 0) {
            ++run;
            if (std::min(run, n) > best_len) {
                best_len = std::min(run, n);
                best_end = i;
            }
        } else {
            run = 0;
        }
    }
    if (best_end < 0) return order;
    const int rot = (best_end + 1) % n;
    std::vector<int> rotated(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rotated[static_cast<size_t>(i)] = order[static_cast<size_t>((rot + i) % n)];
    return rotated;
}

inline ParsedConfiguration parse_scan(const LatticeSpec& lat, const SpinConfiguration& c,
                                      bool reverse) {
    if (!lat.is_alternating())
        throw std::invalid_argument("structure parsing assumes the alternating pattern");
    const SpinConfiguration neel = neel_configuration(lat);
    const int n = lat.n_sites;
    std::vector<int> twice_dev(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        twice_dev[static_cast<size_t>(k)] =
            2 * (c.levels[static_cast<size_t>(k)] - neel.levels[static_cast<size_t>(k)]);

    const auto order = scan_order(lat, twice_dev, reverse);
    ParsedConfiguration out;
    int running = 0;
    int gap_run = 0;
    std::optional<Structure> open;

    const auto flush_gap = [&]() {
        out.gaps.push_back(gap_run);
        gap_run = 0;
    };

    bool leading_gap_pending = lat.boundary == Boundary::Open;
    for (int pos = 0; pos < n; ++pos) {
        const int site = order[static_cast<size_t>(pos)];
        const int d = twice_dev[static_cast<size_t>(site)];
        if (!open && d == 0) {
            ++gap_run;
            continue;
        }
        if (!open) {
            if (leading_gap_pending) {
                flush_gap();
                leading_gap_pending = false;
            } else if (!out.structures.empty()) {
                flush_gap();
            } else {
                gap_run = 0;
            }
            open = Structure{site, {}, lat.on_small_sublattice(site)};
        }
        running += d;
        open->values.push_back(site_sz(lat, c, site));
        if (running == 0) {
            out.structures.push_back(std::move(*open));
            open.reset();
        }
    }
    if (open) {
        // never returned to the Neel baseline: configuration outside the sector
        out.structures.push_back(std::move(*open));
        open.reset();
        out.in_sector = false;
    }
    if (lat.boundary == Boundary::Open) {
        if (leading_gap_pending) flush_gap();  // pure Neel: single full gap
        flush_gap();                           // trailing gap
    } else if (out.structures.empty()) {
        out.gaps.assign(1, n);
    } else {
        flush_gap();  // wrap gap after the last structure (seam holds no structure)
    }
    out.in_sector = out.in_sector && running == 0;
    return out;
}

} // namespace detail

/// Segments a configuration into structures and intact gaps by the running
/// deviation of the cumulative magnetization from the Neel value. Rings are
/// scanned from just past the longest intact stretch so structures never
/// straddle the seam.
inline ParsedConfiguration parse_structures(const LatticeSpec& lat, const SpinConfiguration& c) {
    return detail::parse_scan(lat, c, /*reverse=*/false);
}

/// Number of small-spin sites deviating from the Neel value.
inline int count_mumagnons(const LatticeSpec& lat, const SpinConfiguration& c) {
    const SpinConfiguration neel = neel_configuration(lat);
    int count = 0;
    for (int k = 0; k < lat.n_sites; ++k)
        if (lat.on_small_sublattice(k) &&
            c.levels[static_cast<size_t>(k)] != neel.levels[static_cast<size_t>(k)])
            ++count;
    return count;
}

/// Number of large-spin sites deviating from the Neel value.
inline int count_changed_large_spins(const LatticeSpec& lat, const SpinConfiguration& c) {
    const SpinConfiguration neel = neel_configuration(lat);
    int count = 0;
    for (int k = 0; k < lat.n_sites; ++k)
        if (!lat.on_small_sublattice(k) &&
            c.levels[static_cast<size_t>(k)] != neel.levels[static_cast<size_t>(k)])
            ++count;
    return count;
}

struct DictionaryProvenance {
    int n_sites = 0;
    std::string spins;
    std::string boundary;
    double coupling = 0.0;
    double field = 0.0;
    std::string sector;
    double energy = 0.0;
};

/// Relative amplitudes of elementary structures and pair correction factors,
/// extracted from one exact reference solution and reused across sizes.
struct StructureDictionary {
    DictionaryProvenance provenance;
    int max_structure_len = 7;
    int max_pair_gap = 6;
    int far_gap = 4;  // complementary gap regarded as uncorrelated during extraction
    std::map<StructureKey, double> singles;
    std::map<std::tuple<StructureKey, StructureKey, int>, double> pairs;
    std::vector<std::string> build_notes;

    std::optional<double> single(const StructureKey& k) const {
        const auto it = singles.find(k);
        if (it == singles.end()) return std::nullopt;
        return it->second;
    }
    std::optional<double> pair(const StructureKey& a, const StructureKey& b, int gap) const {
        const auto it = pairs.find({a, b, gap});
        if (it == pairs.end()) return std::nullopt;
        return it->second;
    }
};

/// Builds the dictionary from an exact ring solution. Singles come from
/// configurations parsing to one structure; pair factors from two-structure
/// configurations whose complementary gap is wide enough to be treated as
/// uncorrelated.
inline StructureDictionary build_dictionary(const GroundStateVector& reference,
                                            int max_structure_len = 7, int max_pair_gap = 6,
                                            int far_gap = 4) {
    const LatticeSpec& lat = reference.basis.lattice();
    if (lat.boundary != Boundary::Ring)
        throw std::invalid_argument("dictionary reference must be a ring solution");
    if (!lat.is_alternating())
        throw std::invalid_argument("dictionary reference must be an alternating lattice");
    const double a_neel = neel_amplitude(reference);
    if (a_neel == 0.0) throw std::invalid_argument("reference has vanishing Neel amplitude");

    StructureDictionary dict;
    dict.max_structure_len = max_structure_len;
    dict.max_pair_gap = max_pair_gap;
    dict.far_gap = far_gap;
    dict.provenance = {lat.n_sites, lat.spins_str(), to_string(lat.boundary), lat.coupling,
                       lat.field, reference.basis.sector().total_sz.str(), reference.energy};

    std::vector<ParsedConfiguration> parses(reference.basis.size());
    for (size_t i = 0; i < reference.basis.size(); ++i)
        parses[i] = parse_structures(lat, reference.basis.config(i));

    // embeddings of one signature are symmetry copies; disagreement beyond
    // solver noise means the windows collided on the reference ring
    const auto store = [&dict](auto& map, const auto& key, double value, const char* kind,
                               const std::string& label) {
        const auto it = map.find(key);
        if (it == map.end()) {
            map.emplace(key, value);
            return;
        }
        if (std::abs(it->second - value) > 1e-5 * std::max(1.0, std::abs(it->second))) {
            const std::string note = std::string(kind) + " entry " + label +
                                     " inconsistent across embeddings; kept first";
            if (dict.build_notes.empty() || dict.build_notes.back() != note)
                dict.build_notes.push_back(note);
        }
    };

    for (size_t i = 0; i < reference.basis.size(); ++i) {
        const auto& p = parses[i];
        if (p.structures.size() != 1 || p.structures[0].length() > max_structure_len) continue;
        const double alpha_r = reference.amps[i] / a_neel;
        if (std::abs(alpha_r) > 1.5) {  // sanity bound; no elementary structure outweighs the Neel sea
            dict.build_notes.push_back("single " + key_str(key_of(p.structures[0])) +
                                       " outside the sanity bound; skipped");
            continue;
        }
        store(dict.singles, key_of(p.structures[0]), alpha_r, "single", key_str(key_of(p.structures[0])));
    }
    for (size_t i = 0; i < reference.basis.size(); ++i) {
        const auto& p = parses[i];
        if (p.structures.size() != 2) continue;
        const auto& s0 = p.structures[0];
        const auto& s1 = p.structures[1];
        if (s0.length() > max_structure_len || s1.length() > max_structure_len) continue;
        const auto a0 = dict.single(key_of(s0));
        const auto a1 = dict.single(key_of(s1));
        if (!a0 || !a1 || *a0 == 0.0 || *a1 == 0.0) {
            dict.build_notes.push_back("pair with unknown single skipped: " + key_str(key_of(s0)) +
                                       " / " + key_str(key_of(s1)));
            continue;
        }
        const double alpha_r = reference.amps[i] / a_neel;
        const double beta = alpha_r / (*a0 * *a1);
        const int g01 = p.gaps[0], g10 = p.gaps[1];
        if (g01 <= max_pair_gap && g10 >= far_gap)
            store(dict.pairs, std::make_tuple(key_of(s0), key_of(s1), g01), beta, "pair",
                  key_str(key_of(s0)) + "|" + key_str(key_of(s1)) + "|D=" + std::to_string(g01));
        if (g10 <= max_pair_gap && g01 >= far_gap)
            store(dict.pairs, std::make_tuple(key_of(s1), key_of(s0), g10), beta, "pair",
                  key_str(key_of(s1)) + "|" + key_str(key_of(s0)) + "|D=" + std::to_string(g10));
    }

    // Reflection maps the ring onto itself, so mirror-related entries are
    // equal up to solver noise; pin both to one representative value so the
    // two scan directions of the product formula agree bit for bit.
    for (auto& [key, value] : dict.singles) {
        const StructureKey m = mirrored(key);
        if (m < key) {
            const auto it = dict.singles.find(m);
            if (it != dict.singles.end()) value = it->second;
        }
    }
    for (auto& [key, value] : dict.pairs) {
        const std::tuple<StructureKey, StructureKey, int> m{mirrored(std::get<1>(key)),
                                                            mirrored(std::get<0>(key)),
                                                            std::get<2>(key)};
        if (m < key) {
            const auto it = dict.pairs.find(m);
            if (it != dict.pairs.end()) value = it->second;
        }
    }
    return dict;
}

namespace detail {

inline double estimate_from_parse(const ParsedConfiguration& p, const StructureDictionary& dict,
                                  bool ring) {
    if (!p.in_sector) return 0.0;
    const size_t k = p.structures.size();
    if (k == 0) return 1.0;
    double prod = 1.0;
    for (const auto& s : p.structures) {
        if (s.length() > dict.max_structure_len) return 0.0;
        const auto a = dict.single(key_of(s));
        if (!a) return 0.0;
        prod *= *a;
    }
    if (ring) {
        for (size_t j = 0; j < k; ++j) {
            const auto& a = p.structures[j];
            const auto& b = p.structures[(j + 1) % k];
            prod *= dict.pair(key_of(a), key_of(b), p.gaps[j]).value_or(1.0);
        }
    } else {
        for (size_t j = 0; j + 1 < k; ++j)
            prod *= dict.pair(key_of(p.structures[j]), key_of(p.structures[j + 1]), p.gaps[j + 1])
                        .value_or(1.0);
    }
    return prod;
}

} // namespace detail

/// Product estimate of alpha_r: singles times consecutive pair factors
/// (cyclic on rings). The configuration is scanned in both directions and
/// the estimate of larger magnitude wins; unknown structures contribute 0
/// and unknown pair factors 1.
inline double approximate_relative_amplitude(const LatticeSpec& lat, const SpinConfiguration& c,
                                             const StructureDictionary& dict) {
    const bool ring = lat.boundary == Boundary::Ring;
    const double fwd = detail::estimate_from_parse(detail::parse_scan(lat, c, false), dict, ring);
    const double rev = detail::estimate_from_parse(detail::parse_scan(lat, c, true), dict, ring);
    return std::abs(rev) > std::abs(fwd) ? rev : fwd;
}

struct CandidateOptions {
    int max_mumagnons = 6;
    // Reject configurations with more than max_deep_lowered large spins at
    // their bottom level (three overlapping mu-magnons per site and worse).
    int max_deep_lowered = 2;
};

/// All Neel-sector configurations surviving the a-priori filters and the
/// dictionary-estimate threshold, in basis order.
inline std::vector<SpinConfiguration> generate_candidates(const LatticeSpec& lat,
                                                          const StructureDictionary& dict,
                                                          double threshold,
                                                          CandidateOptions opts = {}) {
    if (!lat.is_alternating())
        throw std::invalid_argument("candidate generation assumes the alternating pattern");
    const SectorBasis basis = enumerate_sector(lat, neel_sector_sz(lat));
    std::vector<SpinConfiguration> out;
    for (size_t i = 0; i < basis.size(); ++i) {
        const SpinConfiguration c = basis.config(i);
        if (count_mumagnons(lat, c) > opts.max_mumagnons) continue;
        int deep = 0;
        for (int k = 1; k < lat.n_sites; k += 2)
            if (c.levels[static_cast<size_t>(k)] == 0) ++deep;
        if (deep > opts.max_deep_lowered) continue;
        const auto parsed = parse_structures(lat, c);
        bool keep = true;
        for (const auto& s : parsed.structures) {
            const auto a = s.length() <= dict.max_structure_len ? dict.single(key_of(s))
                                                                : std::optional<double>(0.0);
            if (!a || std::abs(*a) < threshold) {
                keep = false;
                break;
            }
        }
        if (!keep) continue;
        if (std::abs(approximate_relative_amplitude(lat, c, dict)) < threshold) continue;
        out.push_back(c);
    }
    return out;
}

/// Thresholded, normalized product-approximation state.
struct ApproxGroundState {
    LatticeSpec lattice;
    std::vector<uint64_t> packed;
    std::vector<double> alpha_r;   // estimates before normalization
    double norm = 1.0;             // sqrt(sum alpha_r^2)
    double threshold = 0.0;

    size_t size() const { return packed.size(); }
    double amp(size_t i) const { return alpha_r[i] / norm; }
};

inline ApproxGroundState approximate_ground_state(const LatticeSpec& lat,
                                                  const StructureDictionary& dict,
                                                  double threshold, CandidateOptions opts = {}) {
    ApproxGroundState st;
    st.lattice = lat;
    st.threshold = threshold;
    double nrm2 = 0.0;
    for (const auto& c : generate_candidates(lat, dict, threshold, opts)) {
        const double est = approximate_relative_amplitude(lat, c, dict);
        if (std::abs(est) < threshold) continue;
        st.packed.push_back(pack(lat, c));
        st.alpha_r.push_back(est);
        nrm2 += est * est;
    }
    st.norm = std::sqrt(nrm2);
    if (st.norm == 0.0) throw std::logic_error("approximate state is empty");
    return st;
}

/// Fitted decay of the split mu-magnon amplitude with gap width D.
inline double split_magnon_fit(double d) {
    if (d < 0.0 || d > 10.0) throw std::domain_error("split-magnon fit covers 0 <= D <= 10");
    return -0.27295 * std::exp(-1.55089 * d + 0.07923 * d * d);
}

/// Neel state with one raised small spin at `start` and the matching lowered
/// large spin D intact sites to its right (wrapping on rings). D must be even
/// for the alternating pattern.
inline SpinConfiguration split_configuration(const LatticeSpec& lat, int start, int gap) {
    if (!lat.is_alternating()) throw std::invalid_argument("split mu-magnon needs the alternating pattern");
    if (!lat.on_small_sublattice(start)) throw std::invalid_argument("split mu-magnon starts on a small-spin site");
    if (gap < 0 || gap % 2 != 0) throw std::invalid_argument("split gap must be even and nonnegative");
    int partner = start + 1 + gap;
    if (lat.boundary == Boundary::Ring) partner %= lat.n_sites;
    if (partner >= lat.n_sites) throw std::invalid_argument("split mu-magnon exceeds the open chain");
    const auto c = create_mumagnon(lat, neel_configuration(lat), start, partner);
    if (!c) throw std::logic_error("split creation annihilated on the Neel state");
    return *c;
}

/// Measured alpha_r of the split mu-magnon of gap D placed at `start`
/// (default: site 1 on rings; first interior small-spin site on chains).
inline double measured_split_amplitude(const GroundStateVector& state, int gap, int start = -1) {
    const LatticeSpec& lat = state.basis.lattice();
    if (start < 0) start = lat.boundary == Boundary::Ring ? 0 : 2;
    return relative_amplitude(state, split_configuration(lat, start, gap));
}

} // namespace ferri
