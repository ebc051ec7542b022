#pragma once

#include "ferri/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ferri {

struct MagnetizationSector {
    HalfInt total_sz;
};

/// All configurations of a fixed total magnetization, ordered by ascending
/// packed value. Immutable after construction and safe to share.
class SectorBasis {
public:
    SectorBasis() = default;
    SectorBasis(LatticeSpec lattice, HalfInt total_sz, std::vector<uint64_t> packed)
        : lattice_(std::move(lattice)), sector_{total_sz}, packed_(std::move(packed)) {}

    const LatticeSpec& lattice() const { return lattice_; }
    const MagnetizationSector& sector() const { return sector_; }
    size_t size() const { return packed_.size(); }
    uint64_t packed(size_t i) const { return packed_[i]; }
    const std::vector<uint64_t>& packed_values() const { return packed_; }

    SpinConfiguration config(size_t i) const { return unpack(lattice_, packed_[i]); }

    std::optional<size_t> index_of(uint64_t packed_value) const {
        const auto it = std::lower_bound(packed_.begin(), packed_.end(), packed_value);
        if (it == packed_.end() || *it != packed_value) return std::nullopt;
        return static_cast<size_t>(it - packed_.begin());
    }

    std::optional<size_t> index_of(const SpinConfiguration& c) const {
        return index_of(pack(lattice_, c));
    }

private:
    LatticeSpec lattice_;
    MagnetizationSector sector_;
    std::vector<uint64_t> packed_;
};

namespace detail {

// Depth-first enumeration from the most significant site down, pruning on
// the reachable magnetization range of the remaining prefix. Visiting levels
// in ascending order yields ascending packed values without a sort.
inline void enumerate_rec(const LatticeSpec& lat, int site, int target_twice, int acc_twice,
                          const std::vector<int>& min_prefix, const std::vector<int>& max_prefix,
                          uint64_t packed_acc, const std::vector<int>& shifts,
                          std::vector<uint64_t>& out) {
    if (site < 0) {
        if (acc_twice == target_twice) out.push_back(packed_acc);
        return;
    }
    const int need = target_twice - acc_twice;
    if (need < min_prefix[static_cast<size_t>(site)] || need > max_prefix[static_cast<size_t>(site)])
        return;
    const int ts = lat.spin(site).twice();
    for (int level = 0; level < lat.local_dim(site); ++level) {
        const int m_twice = 2 * level - ts;
        enumerate_rec(lat, site - 1, target_twice, acc_twice + m_twice, min_prefix, max_prefix,
                      packed_acc | (static_cast<uint64_t>(level) << shifts[static_cast<size_t>(site)]),
                      shifts, out);
    }
}

} // namespace detail

/// Exhaustive, duplicate-free basis of the sector with total magnetization M.
/// An infeasible M yields an empty basis.
inline SectorBasis enumerate_sector(const LatticeSpec& lat, HalfInt m) {
    validate(lat);
    if (total_bits(lat) > 64) throw std::invalid_argument("lattice exceeds 64 packing bits");

    // reachable magnetization range (doubled) over sites 0..k, for pruning
    std::vector<int> min_up_to(static_cast<size_t>(lat.n_sites), 0);
    std::vector<int> max_up_to(static_cast<size_t>(lat.n_sites), 0);
    std::vector<int> shifts(static_cast<size_t>(lat.n_sites), 0);
    int shift = 0, lo = 0, hi = 0;
    for (int k = 0; k < lat.n_sites; ++k) {
        lo -= lat.spin(k).twice();
        hi += lat.spin(k).twice();
        min_up_to[static_cast<size_t>(k)] = lo;
        max_up_to[static_cast<size_t>(k)] = hi;
        shifts[static_cast<size_t>(k)] = shift;
        shift += site_bits(lat, k);
    }

    std::vector<uint64_t> out;
    detail::enumerate_rec(lat, lat.n_sites - 1, m.twice(), 0, min_up_to, max_up_to, 0, shifts, out);
    return SectorBasis(lat, m, std::move(out));
}

/// All feasible sector magnetizations, ascending.
inline std::vector<HalfInt> feasible_sectors(const LatticeSpec& lat) {
    const int max_twice = lat.max_total_sz().twice();
    std::vector<HalfInt> out;
    for (int t = -max_twice; t <= max_twice; t += 2) out.push_back(HalfInt::from_twice(t));
    return out;
}

inline std::string packed_hex(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

/// CSV export: index, packed-hex, per-site m_k as rationals, total_sz.
inline void write_basis_csv(std::ostream& os, const SectorBasis& basis) {
    os << "index,packed,";
    for (int k = 0; k < basis.lattice().n_sites; ++k) os << "m" << (k + 1) << ",";
    os << "total_sz\n";
    for (size_t i = 0; i < basis.size(); ++i) {
        const auto c = basis.config(i);
        os << i << ',' << packed_hex(basis.packed(i)) << ',';
        for (int k = 0; k < basis.lattice().n_sites; ++k)
            os << site_sz(basis.lattice(), c, k).str() << ',';
        os << basis.sector().total_sz.str() << '\n';
    }
}

} // namespace ferri
