#pragma once

#include "ferri/halfint.hpp"

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ferri {

enum class Boundary { Ring, Open };

inline std::string to_string(Boundary b) { return b == Boundary::Ring ? "ring" : "open"; }

inline Boundary boundary_from_string(const std::string& s) {
    if (s == "ring") return Boundary::Ring;
    if (s == "open") return Boundary::Open;
    throw std::invalid_argument("boundary must be 'ring' or 'open', got '" + s + "'");
}

/// Geometry and model parameters of a one-dimensional spin lattice.
/// Sites are indexed 0..n_sites-1 internally; user-facing output is 1-based,
/// with site 1 carrying the first (small) spin of the alternating pattern.
struct LatticeSpec {
    int n_sites = 0;
    std::vector<HalfInt> spins;   // per-site magnitude, size n_sites
    Boundary boundary = Boundary::Ring;
    double coupling = 1.0;        // J
    double field = 0.0;           // B

    int local_dim(int site) const { return spins[static_cast<size_t>(site)].twice() + 1; }
    HalfInt spin(int site) const { return spins[static_cast<size_t>(site)]; }

    // A two-site ring keeps a single bond rather than a doubled one.
    int n_bonds() const {
        if (boundary == Boundary::Open || n_sites == 2) return n_sites - 1;
        return n_sites;
    }

    /// True when magnitudes strictly alternate between two values with period 2.
    bool is_alternating() const {
        if (n_sites < 2 || n_sites % 2 != 0) return false;
        for (int k = 2; k < n_sites; ++k)
            if (spins[static_cast<size_t>(k)] != spins[static_cast<size_t>(k % 2)]) return false;
        return true;
    }

    /// Small-spin sublattice = even internal indices (sites 1,3,5,... 1-based).
    bool on_small_sublattice(int site) const { return site % 2 == 0; }

    HalfInt small_spin() const { return spins[0]; }
    HalfInt large_spin() const { return spins[1]; }

    HalfInt max_total_sz() const {
        HalfInt m;
        for (auto s : spins) m += s;
        return m;
    }

    std::string spins_str() const {
        std::ostringstream os;
        for (int k = 0; k < n_sites; ++k) {
            if (k) os << ',';
            os << spins[static_cast<size_t>(k)].str();
        }
        return os.str();
    }
};

inline void validate(const LatticeSpec& lat) {
    if (lat.n_sites <= 0) throw std::invalid_argument("n_sites must be positive");
    if (static_cast<int>(lat.spins.size()) != lat.n_sites)
        throw std::invalid_argument("spins size must equal n_sites");
    for (auto s : lat.spins)
        if (s.twice() < 1) throw std::invalid_argument("spin magnitudes must be positive half-integers");
    if (lat.boundary == Boundary::Ring && lat.n_sites < 2)
        throw std::invalid_argument("ring needs at least 2 sites");
}

/// Chains of alternating spins (s1, s2, s1, s2, ...); n_sites must be even.
inline LatticeSpec make_alternating(int n_sites, HalfInt s1, HalfInt s2, Boundary boundary,
                                    double coupling = 1.0, double field = 0.0) {
    if (n_sites <= 0 || n_sites % 2 != 0)
        throw std::invalid_argument("alternating lattice needs a positive even site count");
    LatticeSpec lat;
    lat.n_sites = n_sites;
    lat.spins.reserve(static_cast<size_t>(n_sites));
    for (int k = 0; k < n_sites; ++k) lat.spins.push_back(k % 2 == 0 ? s1 : s2);
    lat.boundary = boundary;
    lat.coupling = coupling;
    lat.field = field;
    validate(lat);
    return lat;
}

} // namespace ferri
