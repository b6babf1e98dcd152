#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace logifit {

namespace detail {

template <class T>
void shuffle_vec(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(v[i - 1], v[j]);
    }
}

inline double bin_sample(std::size_t bin, std::size_t k, RngStream& rng) {
    return -1.0 + 2.0 * (static_cast<double>(bin) + rng.uniform()) / static_cast<double>(k);
}

} // namespace detail

/// Latin hypercube design: k points in [-1,1]^d, one per axis bin of width 2/k.
inline std::vector<Eigen::VectorXd> lhs(std::size_t k, std::size_t dims, std::uint64_t seed) {
    if (k == 0 || dims == 0) throw ValidationError("design needs at least one point and one dimension");
    RngStream rng(seed, 0);
    std::vector<Eigen::VectorXd> pts(k, Eigen::VectorXd(dims));
    std::vector<std::size_t> perm(k);
    for (std::size_t a = 0; a < dims; ++a) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        detail::shuffle_vec(perm, rng);
        for (std::size_t i = 0; i < k; ++i) pts[i](a) = detail::bin_sample(perm[i], k, rng);
    }
    return pts;
}

/// Orthogonal Latin hypercube: the axes are cut into s blocks (largest s >= 2
/// with s^d | k) and every one of the s^d subcubes receives exactly k/s^d
/// points, on top of the one-point-per-bin projection property. When no such
/// s exists the design degrades to plain LHS and a warning is recorded.
inline std::vector<Eigen::VectorXd> orthogonal_lhs(std::size_t k, std::size_t dims,
                                                   std::uint64_t seed,
                                                   std::vector<std::string>* warnings = nullptr) {
    if (k == 0 || dims == 0) throw ValidationError("design needs at least one point and one dimension");
    std::size_t s = 0;
    for (std::size_t cand = 2;; ++cand) {
        std::size_t cells = 1;
        bool overflow = false;
        for (std::size_t a = 0; a < dims; ++a) {
            if (cells > k / cand) { overflow = true; break; }
            cells *= cand;
        }
        if (overflow || cells > k) break;
        if (k % cells == 0) s = cand;
    }
    if (s < 2) {
        if (warnings)
            warnings->push_back("no block count s >= 2 with s^" + std::to_string(dims) +
                                " dividing " + std::to_string(k) +
                                "; falling back to plain latin hypercube");
        return lhs(k, dims, seed);
    }

    std::size_t cells = 1;
    for (std::size_t a = 0; a < dims; ++a) cells *= s;
    const std::size_t m = k / cells;           // points per cell
    const std::size_t bins_per_block = k / s;  // axis bins per block

    RngStream rng(seed, 0);
    // cell_bins[c][a] = the m axis-a bins assigned to cell c
    std::vector<std::vector<std::vector<std::size_t>>> cell_bins(
        cells, std::vector<std::vector<std::size_t>>(dims));

    std::vector<std::size_t> block_bins(bins_per_block);
    std::vector<std::size_t> cell_ids;
    for (std::size_t a = 0; a < dims; ++a) {
        // stride of axis a's digit in the mixed-radix cell id
        std::size_t stride = 1;
        for (std::size_t b = 0; b < a; ++b) stride *= s;
        for (std::size_t blk = 0; blk < s; ++blk) {
            std::iota(block_bins.begin(), block_bins.end(), blk * bins_per_block);
            detail::shuffle_vec(block_bins, rng);
            cell_ids.clear();
            for (std::size_t c = 0; c < cells; ++c)
                if ((c / stride) % s == blk) cell_ids.push_back(c);
            detail::shuffle_vec(cell_ids, rng);
            std::size_t next = 0;
            for (std::size_t c : cell_ids)
                for (std::size_t j = 0; j < m; ++j) cell_bins[c][a].push_back(block_bins[next++]);
        }
    }

    std::vector<Eigen::VectorXd> pts;
    pts.reserve(k);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t a = 0; a < dims; ++a) detail::shuffle_vec(cell_bins[c][a], rng);
        for (std::size_t j = 0; j < m; ++j) {
            Eigen::VectorXd p(dims);
            for (std::size_t a = 0; a < dims; ++a)
                p(a) = detail::bin_sample(cell_bins[c][a][j], k, rng);
            pts.push_back(std::move(p));
        }
    }
    return pts;
}

} // namespace logifit
