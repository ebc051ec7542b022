#pragma once

#include "ferri/lattice.hpp"

#include <bit>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ferri {

/// One classical z-basis product state: per-site level indices n_k in
/// {0,...,2s_k}, with z-projection m_k = n_k - s_k.
struct SpinConfiguration {
    std::vector<uint8_t> levels;

    friend bool operator==(const SpinConfiguration& a, const SpinConfiguration& b) {
        return a.levels == b.levels;
    }
    friend bool operator!=(const SpinConfiguration& a, const SpinConfiguration& b) {
        return !(a == b);
    }
};

/// Bits needed for one site's level index.
inline int site_bits(const LatticeSpec& lat, int site) {
    return std::bit_width(static_cast<unsigned>(lat.local_dim(site) - 1));
}

inline int total_bits(const LatticeSpec& lat) {
    int b = 0;
    for (int k = 0; k < lat.n_sites; ++k) b += site_bits(lat, k);
    return b;
}

/// Little-endian packing: site 1 (internal index 0) occupies the least
/// significant bits, each site using ceil(log2(2s+1)) bits.
inline uint64_t pack(const LatticeSpec& lat, const SpinConfiguration& c) {
    uint64_t packed = 0;
    int shift = 0;
    for (int k = 0; k < lat.n_sites; ++k) {
        packed |= static_cast<uint64_t>(c.levels[static_cast<size_t>(k)]) << shift;
        shift += site_bits(lat, k);
    }
    return packed;
}

inline SpinConfiguration unpack(const LatticeSpec& lat, uint64_t packed) {
    SpinConfiguration c;
    c.levels.resize(static_cast<size_t>(lat.n_sites));
    int shift = 0;
    for (int k = 0; k < lat.n_sites; ++k) {
        const int bits = site_bits(lat, k);
        c.levels[static_cast<size_t>(k)] =
            static_cast<uint8_t>((packed >> shift) & ((uint64_t{1} << bits) - 1));
        shift += bits;
    }
    return c;
}

inline HalfInt site_sz(const LatticeSpec& lat, const SpinConfiguration& c, int site) {
    return HalfInt::from_twice(2 * c.levels[static_cast<size_t>(site)] - lat.spin(site).twice());
}

inline HalfInt total_sz(const LatticeSpec& lat, const SpinConfiguration& c) {
    int twice = 0;
    for (int k = 0; k < lat.n_sites; ++k)
        twice += 2 * c.levels[static_cast<size_t>(k)] - lat.spin(k).twice();
    return HalfInt::from_twice(twice);
}

inline bool is_valid(const LatticeSpec& lat, const SpinConfiguration& c) {
    if (static_cast<int>(c.levels.size()) != lat.n_sites) return false;
    for (int k = 0; k < lat.n_sites; ++k)
        if (c.levels[static_cast<size_t>(k)] >= lat.local_dim(k)) return false;
    return true;
}

/// Classical reference state: odd sites at -s1, even sites at +s2.
/// Requires the alternating pattern.
inline SpinConfiguration neel_configuration(const LatticeSpec& lat) {
    if (!lat.is_alternating())
        throw std::invalid_argument("Neel configuration is defined for alternating lattices only");
    SpinConfiguration c;
    c.levels.resize(static_cast<size_t>(lat.n_sites));
    for (int k = 0; k < lat.n_sites; ++k)
        c.levels[static_cast<size_t>(k)] =
            lat.on_small_sublattice(k) ? 0 : static_cast<uint8_t>(lat.local_dim(k) - 1);
    return c;
}

/// Magnetization of the sector hosting the ground state at weak field,
/// N(s2-s1)/2 for the alternating pattern.
inline HalfInt neel_sector_sz(const LatticeSpec& lat) {
    return total_sz(lat, neel_configuration(lat));
}

/// Running magnetization relative to the Neel state: entry j holds
/// sum_{k<=j} (m_k - m_k^Neel). Zero everywhere iff the configuration is
/// pure Neel; the last entry is zero iff the configuration shares the Neel
/// sector.
inline std::vector<HalfInt> cumulative_deviation(const LatticeSpec& lat, const SpinConfiguration& c) {
    if (!lat.is_alternating())
        throw std::invalid_argument("cumulative deviation needs the alternating pattern");
    const SpinConfiguration neel = neel_configuration(lat);
    std::vector<HalfInt> out(static_cast<size_t>(lat.n_sites));
    int running = 0;
    for (int k = 0; k < lat.n_sites; ++k) {
        running += 2 * (c.levels[static_cast<size_t>(k)] - neel.levels[static_cast<size_t>(k)]);
        out[static_cast<size_t>(k)] = HalfInt::from_twice(running);
    }
    return out;
}

inline std::string config_str(const LatticeSpec& lat, const SpinConfiguration& c) {
    std::ostringstream os;
    for (int k = 0; k < lat.n_sites; ++k) {
        if (k) os << ',';
        os << site_sz(lat, c, k).str();
    }
    return os.str();
}

} // namespace ferri
