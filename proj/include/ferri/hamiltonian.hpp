#pragma once

#include "ferri/basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace ferri {

/// Heisenberg model with uniform coupling J, uniform field -B*Sz on every
/// site, and a closing bond between the last and first sites on rings.
struct HamiltonianSpec {
    LatticeSpec lattice;
};

inline void validate(const HamiltonianSpec& spec) {
    validate(spec.lattice);
    if (spec.lattice.field < 0.0)
        throw std::invalid_argument("field must be nonnegative; its direction fixes the positive sector");
}

enum class Ladder { Raise, Lower };

/// sqrt(s(s+1) - m(m+-1)); exactly zero at the edge of the ladder.
inline double ladder_coefficient(HalfInt s, HalfInt m, Ladder dir) {
    if (abs(m) > s) throw std::domain_error("|m| exceeds s");
    const int ts = s.twice(), tm = m.twice();
    const int num = ts * (ts + 2) - tm * (tm + (dir == Ladder::Raise ? 2 : -2));
    return 0.5 * std::sqrt(static_cast<double>(num));
}

struct SectorVector {
    std::vector<double> amps;
};

/// Energy of a product state: sum over bonds of J*m_k*m_{k+1}, the ring bond
/// included for rings, minus B*total_sz when include_field is set. Default
/// excludes the field so configurations of one sector stay comparable.
inline double classical_energy(const SpinConfiguration& c, const HamiltonianSpec& spec,
                               bool include_field = false) {
    const LatticeSpec& lat = spec.lattice;
    double e4 = 0.0;  // four times the bond sum, exact in integers
    for (int b = 0; b < lat.n_bonds(); ++b) {
        const int k = b, k2 = (b + 1) % lat.n_sites;
        e4 += static_cast<double>(site_sz(lat, c, k).twice() * site_sz(lat, c, k2).twice());
    }
    double e = spec.lattice.coupling * e4 / 4.0;
    if (include_field) e -= spec.lattice.field * total_sz(lat, c).value();
    return e;
}

/// Elementary excitation: raises the small-spin site and lowers the
/// large-spin site of the pair (m, n) by one unit each. Sites must lie on
/// opposite sublattices; returns nullopt when either ladder move hits the
/// end of its ladder.
inline std::optional<SpinConfiguration> create_mumagnon(const LatticeSpec& lat,
                                                        const SpinConfiguration& c, int m, int n) {
    if (m < 0 || m >= lat.n_sites || n < 0 || n >= lat.n_sites)
        throw std::out_of_range("mu-magnon site out of range");
    if (!lat.is_alternating() || lat.on_small_sublattice(m) == lat.on_small_sublattice(n))
        throw std::invalid_argument("mu-magnon needs one site per sublattice of an alternating lattice");
    SpinConfiguration out = c;
    for (int site : {m, n}) {
        auto& level = out.levels[static_cast<size_t>(site)];
        if (lat.on_small_sublattice(site)) {
            if (level + 1 >= lat.local_dim(site)) return std::nullopt;
            ++level;
        } else {
            if (level == 0) return std::nullopt;
            --level;
        }
    }
    return out;
}

/// Sector-restricted Hamiltonian action. Rows are assembled once into a
/// compressed sparse form; apply() is then a plain sparse mat-vec, which
/// keeps Lanczos iterations cheap.
class HamiltonianOperator {
public:
    HamiltonianOperator(const HamiltonianSpec& spec, const SectorBasis& basis)
        : spec_(spec), basis_(&basis) {
        validate(spec);
        const LatticeSpec& lat = spec.lattice;
        const size_t dim = basis.size();
        const double j_half = 0.5 * lat.coupling;
        diag_.resize(dim);
        row_ptr_.assign(dim + 1, 0);

        std::vector<uint32_t> cols;
        std::vector<double> vals;
        cols.reserve(dim * 4);
        vals.reserve(dim * 4);

        for (size_t i = 0; i < dim; ++i) {
            const SpinConfiguration c = basis.config(i);
            diag_[i] = classical_energy(c, spec, /*include_field=*/true);
            for (int b = 0; b < lat.n_bonds(); ++b) {
                const int k = b, k2 = (b + 1) % lat.n_sites;
                // S+_k S-_k2 and S-_k S+_k2, each with coefficient J/2
                for (int dir = 0; dir < 2; ++dir) {
                    const int up = dir == 0 ? k : k2;
                    const int down = dir == 0 ? k2 : k;
                    SpinConfiguration flipped = c;
                    if (flipped.levels[static_cast<size_t>(up)] + 1 >= lat.local_dim(up)) continue;
                    if (flipped.levels[static_cast<size_t>(down)] == 0) continue;
                    const double coeff =
                        j_half *
                        ladder_coefficient(lat.spin(up), site_sz(lat, c, up), Ladder::Raise) *
                        ladder_coefficient(lat.spin(down), site_sz(lat, c, down), Ladder::Lower);
                    ++flipped.levels[static_cast<size_t>(up)];
                    --flipped.levels[static_cast<size_t>(down)];
                    const auto j = basis.index_of(pack(lat, flipped));
                    if (!j) throw std::logic_error("flip-flop image missing from sector basis");
                    cols.push_back(static_cast<uint32_t>(*j));
                    vals.push_back(coeff);
                }
            }
            row_ptr_[i + 1] = cols.size();
        }
        cols_ = std::move(cols);
        vals_ = std::move(vals);
    }

    size_t dim() const { return diag_.size(); }
    const SectorBasis& basis() const { return *basis_; }
    const HamiltonianSpec& spec() const { return spec_; }

    void apply(const double* x, double* y) const {
        const size_t n = dim();
        for (size_t i = 0; i < n; ++i) {
            double acc = diag_[i] * x[i];
            for (size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                acc += vals_[p] * x[cols_[p]];
            y[i] = acc;
        }
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != dim()) throw std::invalid_argument("vector/basis dimension mismatch");
        std::vector<double> y(dim());
        apply(x.data(), y.data());
        return y;
    }

private:
    HamiltonianSpec spec_;
    const SectorBasis* basis_;
    std::vector<double> diag_;
    std::vector<size_t> row_ptr_;
    std::vector<uint32_t> cols_;
    std::vector<double> vals_;
};

inline SectorVector apply_hamiltonian(const HamiltonianSpec& spec, const SectorBasis& basis,
                                      const SectorVector& v) {
    if (v.amps.size() != basis.size())
        throw std::invalid_argument("vector/basis dimension mismatch");
    return SectorVector{HamiltonianOperator(spec, basis).apply(v.amps)};
}

/// Dense matrix assembled entry-by-entry from configuration pairs. Kept
/// independent of HamiltonianOperator so the two can cross-check each other.
inline Eigen::MatrixXd dense_matrix(const HamiltonianSpec& spec, const SectorBasis& basis,
                                    size_t dim_cap = 4096) {
    validate(spec);
    const LatticeSpec& lat = spec.lattice;
    const size_t dim = basis.size();
    if (dim > dim_cap) throw std::invalid_argument("sector too large for dense assembly");

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (size_t i = 0; i < dim; ++i) {
        const SpinConfiguration ci = basis.config(i);
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            classical_energy(ci, spec, true);
        for (size_t j = i + 1; j < dim; ++j) {
            const SpinConfiguration cj = basis.config(j);
            int up = -1, down = -1, others = 0;
            for (int k = 0; k < lat.n_sites; ++k) {
                const int d = cj.levels[static_cast<size_t>(k)] - ci.levels[static_cast<size_t>(k)];
                if (d == 1 && up < 0) up = k;
                else if (d == -1 && down < 0) down = k;
                else if (d != 0) ++others;
            }
            if (others != 0 || up < 0 || down < 0) continue;
            const bool adjacent = std::abs(up - down) == 1 ||
                                  (lat.boundary == Boundary::Ring &&
                                   std::abs(up - down) == lat.n_sites - 1 && lat.n_sites > 2);
            if (!adjacent) continue;
            const double coeff =
                0.5 * lat.coupling *
                ladder_coefficient(lat.spin(up), site_sz(lat, ci, up), Ladder::Raise) *
                ladder_coefficient(lat.spin(down), site_sz(lat, ci, down), Ladder::Lower);
            h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coeff;
            h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = coeff;
        }
    }
    return h;
}

/// Debug dump of the dense sector matrix, row per line.
inline void write_dense_csv(std::ostream& os, const HamiltonianSpec& spec, const SectorBasis& basis) {
    if (spec.lattice.n_sites > 6) throw std::invalid_argument("dense dump supported for N <= 6");
    const Eigen::MatrixXd h = dense_matrix(spec, basis);
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            if (j) os << ',';
            os << h(i, j);
        }
        os << '\n';
    }
}

} // namespace ferri
