#pragma once

#include "ferri/mumagnon.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ferri {

/// Hermitian PSD matrix over an ordered tensor factorization. The first
/// listed factor is the most significant index.
struct DensityMatrix {
    std::vector<int> dims;
    Eigen::MatrixXd rho;

    Eigen::Index total_dim() const { return rho.rows(); }
};

inline void validate(const DensityMatrix& dm, double tol = 1e-10) {
    Eigen::Index prod = 1;
    for (int d : dm.dims) prod *= d;
    if (prod != dm.rho.rows() || dm.rho.rows() != dm.rho.cols())
        throw std::invalid_argument("density matrix shape does not match its factorization");
    if ((dm.rho - dm.rho.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("density matrix is not symmetric");
    if (std::abs(dm.rho.trace() - 1.0) > 1e-12)
        throw std::invalid_argument("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dm.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol)
        throw std::invalid_argument("density matrix has a significantly negative eigenvalue");
}

inline DensityMatrix pure_density_matrix(const std::vector<double>& psi, std::vector<int> dims) {
    Eigen::Index prod = 1;
    for (int d : dims) prod *= d;
    if (prod != static_cast<Eigen::Index>(psi.size()))
        throw std::invalid_argument("state vector length does not match the factorization");
    Eigen::Map<const Eigen::VectorXd> v(psi.data(), prod);
    const double n2 = v.squaredNorm();
    DensityMatrix dm{std::move(dims), (v * v.transpose()) / n2};
    return dm;
}

namespace detail {

// Shared partial-trace core: amplitudes live on packed configurations; the
// kept sites index the reduced matrix, everything else is traced out by
// grouping on the remaining bits.
inline DensityMatrix reduce_packed(const LatticeSpec& lat, const std::vector<uint64_t>& packed,
                                   const std::vector<double>& amps, const std::vector<int>& sites) {
    if (sites.empty()) throw std::invalid_argument("site list is empty");
    std::vector<int> sorted = sites;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("duplicate sites in reduction list");
    for (int s : sites)
        if (s < 0 || s >= lat.n_sites) throw std::invalid_argument("reduction site out of range");

    std::vector<int> dims;
    dims.reserve(sites.size());
    for (int s : sites) dims.push_back(lat.local_dim(s));
    Eigen::Index total = 1;
    for (int d : dims) total *= d;

    std::vector<int> shifts(static_cast<size_t>(lat.n_sites));
    int shift = 0;
    for (int k = 0; k < lat.n_sites; ++k) {
        shifts[static_cast<size_t>(k)] = shift;
        shift += site_bits(lat, k);
    }
    uint64_t keep_mask = 0;
    for (int s : sites) {
        const uint64_t site_mask = (uint64_t{1} << site_bits(lat, s)) - 1;
        keep_mask |= site_mask << shifts[static_cast<size_t>(s)];
    }

    struct Row {
        uint64_t rest;
        Eigen::Index local;
        double amp;
    };
    std::vector<Row> rows;
    rows.reserve(packed.size());
    for (size_t i = 0; i < packed.size(); ++i) {
        if (amps[i] == 0.0) continue;
        Eigen::Index local = 0;
        for (int s : sites) {
            const int bits = site_bits(lat, s);
            const uint64_t level = (packed[i] >> shifts[static_cast<size_t>(s)]) & ((uint64_t{1} << bits) - 1);
            local = local * lat.local_dim(s) + static_cast<Eigen::Index>(level);
        }
        rows.push_back({packed[i] & ~keep_mask, local, amps[i]});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.rest != b.rest) return a.rest < b.rest;
        return a.local < b.local;
    });

    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(total, total);
    size_t g0 = 0;
    while (g0 < rows.size()) {
        size_t g1 = g0;
        while (g1 < rows.size() && rows[g1].rest == rows[g0].rest) ++g1;
        for (size_t a = g0; a < g1; ++a)
            for (size_t b = g0; b < g1; ++b)
                rho(rows[a].local, rows[b].local) += rows[a].amp * rows[b].amp;
        g0 = g1;
    }
    return DensityMatrix{std::move(dims), std::move(rho)};
}

} // namespace detail

/// Partial trace of |Psi><Psi| onto the listed sites; factor order follows
/// the given site order.
inline DensityMatrix reduced_density_matrix(const GroundStateVector& state,
                                            const std::vector<int>& sites) {
    return detail::reduce_packed(state.basis.lattice(), state.basis.packed_values(), state.amps, sites);
}

inline DensityMatrix reduced_density_matrix(const ApproxGroundState& state,
                                            const std::vector<int>& sites) {
    std::vector<double> amps(state.size());
    for (size_t i = 0; i < state.size(); ++i) amps[i] = state.amp(i);
    return detail::reduce_packed(state.lattice, state.packed, amps, sites);
}

/// Index swap of the masked factors between row and column multi-indices.
inline Eigen::MatrixXd partial_transpose(const DensityMatrix& dm, const std::vector<bool>& mask) {
    if (mask.size() != dm.dims.size()) throw std::invalid_argument("mask size does not match factors");
    const bool any = std::any_of(mask.begin(), mask.end(), [](bool b) { return b; });
    const bool all = std::all_of(mask.begin(), mask.end(), [](bool b) { return b; });
    if (!any || all) throw std::invalid_argument("partial transpose needs a proper nonempty subset");

    const size_t f = dm.dims.size();
    const Eigen::Index n = dm.total_dim();
    std::vector<Eigen::Index> stride(f, 1);
    for (size_t k = f; k-- > 1;) stride[k - 1] = stride[k] * dm.dims[k];

    Eigen::MatrixXd out(n, n);
    std::vector<Eigen::Index> ri(f), ci(f);
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::Index rr = r;
        for (size_t k = 0; k < f; ++k) {
            ri[k] = rr / stride[k];
            rr %= stride[k];
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            Eigen::Index cc = c;
            for (size_t k = 0; k < f; ++k) {
                ci[k] = cc / stride[k];
                cc %= stride[k];
            }
            Eigen::Index sr = 0, sc = 0;
            for (size_t k = 0; k < f; ++k) {
                sr += (mask[k] ? ci[k] : ri[k]) * stride[k];
                sc += (mask[k] ? ri[k] : ci[k]) * stride[k];
            }
            out(sr, sc) = dm.rho(r, c);
        }
    }
    return out;
}

/// log2 of the trace norm of the partial transpose: log2(1 + 2 sum |lambda<0|).
/// Eigenvalues above -1e-10 count as numerical PSD noise, not negativity.
inline double log_negativity(const DensityMatrix& dm, const std::vector<bool>& mask) {
    const Eigen::MatrixXd pt = partial_transpose(dm, mask);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pt, Eigen::EigenvaluesOnly);
    double neg = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double l = es.eigenvalues()(i);
        if (l <= -1e-10) neg += -l;
    }
    return std::log2(1.0 + 2.0 * neg);
}

struct NegativityReport {
    // order: a, b, c, d, ab, ac, ad
    std::array<double, 7> bipartition;
    double four_partite = 0.0;
};

inline const std::array<std::string, 7>& four_partite_labels() {
    static const std::array<std::string, 7> labels = {"a", "b", "c", "d", "ab", "ac", "ad"};
    return labels;
}

/// Geometric mean (1/7 power of the product) of the log-negativities over
/// the seven bipartitions {a,b,c,d,ab,ac,ad} of a four-factor state.
inline NegativityReport four_partite_report(const DensityMatrix& dm) {
    if (dm.dims.size() != 4) throw std::invalid_argument("four-partite negativity needs 4 factors");
    static const std::array<std::array<bool, 4>, 7> masks = {{{true, false, false, false},
                                                              {false, true, false, false},
                                                              {false, false, true, false},
                                                              {false, false, false, true},
                                                              {true, true, false, false},
                                                              {true, false, true, false},
                                                              {true, false, false, true}}};
    NegativityReport rep;
    double prod = 1.0;
    bool vanished = false;
    for (size_t i = 0; i < masks.size(); ++i) {
        const std::vector<bool> mask(masks[i].begin(), masks[i].end());
        rep.bipartition[i] = log_negativity(dm, mask);
        if (rep.bipartition[i] == 0.0) vanished = true;
        prod *= rep.bipartition[i];
    }
    rep.four_partite = vanished ? 0.0 : std::pow(prod, 1.0 / 7.0);
    return rep;
}

inline double four_partite_negativity(const DensityMatrix& dm) {
    return four_partite_report(dm).four_partite;
}

namespace detail {

inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    // floor at the eigensolver's absolute noise scale, not at zero, so that
    // rank-deficient inputs do not grow sqrt(eps)-sized ghost directions
    const double cut = static_cast<double>(m.rows()) *
                       std::numeric_limits<double>::epsilon() *
                       std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = vals(i) > cut ? std::sqrt(vals(i)) : 0.0;
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace detail

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, evaluated as the
/// squared trace norm of sqrt(rho)*sqrt(sigma). The square roots go through
/// Hermitian eigendecompositions with eigenvalue flooring at zero; the trace
/// norm comes from singular values, which keeps near-zero spectrum from
/// being amplified.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dims != b.dims) throw std::invalid_argument("fidelity needs matching factorizations");
    const Eigen::MatrixXd m = detail::psd_sqrt(a.rho) * detail::psd_sqrt(b.rho);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double tr = svd.singularValues().sum();
    return tr * tr;
}

struct TruncationPoint {
    double fraction = 0.0;
    size_t kept = 0;
    double infidelity = 0.0;
};

/// Keeps the ceil(f*dim) configurations of largest |amplitude| (ties expand
/// the kept set so symmetry partners are never split), renormalizes, and
/// compares the reduced state on `sites` against the untruncated one.
inline std::vector<TruncationPoint> truncation_infidelity_scan(const GroundStateVector& state,
                                                               const std::vector<int>& sites,
                                                               const std::vector<double>& fractions) {
    for (double f : fractions)
        if (f <= 0.0 || f > 1.0) throw std::invalid_argument("fractions must lie in (0, 1]");
    const auto& lat = state.basis.lattice();
    const size_t dim = state.basis.size();
    std::vector<size_t> order(dim);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double da = std::abs(state.amps[a]), db = std::abs(state.amps[b]);
        if (da != db) return da > db;
        return state.basis.packed(a) < state.basis.packed(b);
    });

    const DensityMatrix full = reduced_density_matrix(state, sites);
    std::vector<TruncationPoint> out;
    for (double f : fractions) {
        size_t keep = static_cast<size_t>(std::ceil(f * static_cast<double>(dim)));
        keep = std::min(keep, dim);
        while (keep < dim && std::abs(std::abs(state.amps[order[keep]]) -
                                      std::abs(state.amps[order[keep - 1]])) <= 1e-12)
            ++keep;
        std::vector<uint64_t> packed(keep);
        std::vector<double> amps(keep);
        double n2 = 0.0;
        for (size_t i = 0; i < keep; ++i) {
            packed[i] = state.basis.packed(order[i]);
            amps[i] = state.amps[order[i]];
            n2 += amps[i] * amps[i];
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& a : amps) a *= inv;
        const DensityMatrix truncated = detail::reduce_packed(lat, packed, amps, sites);
        out.push_back({f, keep, 1.0 - fidelity(truncated, full)});
    }
    return out;
}

struct DistortionResult {
    double sigma = 0.0;
    double mean_fidelity = 0.0;
    double stderr_fidelity = 0.0;
    int trials = 0;
};

/// Multiplies every amplitude by exp(x), x ~ N(0, sigma^2) drawn from a
/// seeded per-trial substream, renormalizes, and averages the fidelity of
/// the distorted reduced state against the undistorted one.
inline DistortionResult distortion_fidelity(const GroundStateVector& state,
                                            const std::vector<int>& sites, double sigma,
                                            int trials, uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
    if (trials < 1) throw std::invalid_argument("at least one trial is required");
    if (sigma == 0.0) return DistortionResult{0.0, 1.0, 0.0, trials};  // exp(0) leaves the state untouched
    const auto& lat = state.basis.lattice();
    const DensityMatrix reference = reduced_density_matrix(state, sites);

    double sum = 0.0, sum2 = 0.0;
    std::vector<double> amps(state.amps.size());
    for (int t = 0; t < trials; ++t) {
        uint64_t rng = seed + 0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(t) + 1);
        detail::splitmix64(rng);
        double n2 = 0.0;
        for (size_t i = 0; i < amps.size(); ++i) {
            // Box-Muller on the deterministic stream
            const double u1 = (static_cast<double>(detail::splitmix64(rng) >> 11) + 1.0) * 0x1.0p-53;
            const double u2 = static_cast<double>(detail::splitmix64(rng) >> 11) * 0x1.0p-53;
            const double x = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            amps[i] = state.amps[i] * std::exp(sigma * x);
            n2 += amps[i] * amps[i];
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& a : amps) a *= inv;
        const DensityMatrix distorted =
            detail::reduce_packed(lat, state.basis.packed_values(), amps, sites);
        const double f = fidelity(distorted, reference);
        sum += f;
        sum2 += f * f;
    }
    DistortionResult res;
    res.sigma = sigma;
    res.trials = trials;
    res.mean_fidelity = sum / trials;
    res.stderr_fidelity =
        trials > 1 ? std::sqrt(std::max(0.0, (sum2 / trials - res.mean_fidelity * res.mean_fidelity) /
                                                 (trials - 1)))
                   : 0.0;
    return res;
}

} // namespace ferri
