#pragma once

#include "ensc/core.hpp"
#include "ensc/rng.hpp"

#include <cstdint>
#include <numeric>
#include <vector>

namespace ensc::synth {

/// Union-of-subspaces dataset with ground truth. Columns of `data` are unit
/// norm; column j lies in span(bases[labels[j]]) (exactly in noiseless mode).
struct SubspaceDataset {
    Dictionary data;
    std::vector<int> labels;
    std::vector<Matrix> bases;  // D x d_l, orthonormal columns
    bool independent = false;   // sum of subspace dimensions <= ambient dimension
    std::uint64_t seed = 0;
    Index ambient_dim = 0;
    std::vector<Index> dims;
    std::vector<Index> points_per;
    double noise_sigma = 0.0;
};

/// N i.i.d. uniform points on the unit sphere of R^D (Gaussian columns,
/// normalized). Deterministic per seed.
inline Dictionary random_unit_sphere(Index d, Index n, std::uint64_t seed) {
    if (d < 1 || n < 1) throw Error(ErrorCode::InvalidDims, "random_unit_sphere: D, N >= 1");
    Rng rng(seed);
    Matrix m(d, n);
    for (Index j = 0; j < n; ++j) m.col(j) = rng.unit_vector(d);
    return Dictionary{std::move(m), true};
}

namespace detail {

inline Matrix random_orthonormal_basis(Index d, Index k, Rng& rng) {
    Matrix g(d, k);
    for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, k);
    // fix the sign convention so the basis is a deterministic function of g
    const Matrix r = q.transpose() * g;
    for (Index j = 0; j < k; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

}  // namespace detail

/// Samples `n` random subspaces (orthonormal bases from QR of Gaussian
/// matrices) and uniform unit-sphere points inside each. Optional ambient
/// Gaussian noise with expected squared norm noise_sigma^2 is added before
/// the final renormalization.
inline SubspaceDataset random_subspaces(Index d, Index n, const std::vector<Index>& dims,
                                        const std::vector<Index>& points_per, std::uint64_t seed,
                                        double noise_sigma = 0.0) {
    if (n < 1 || static_cast<Index>(dims.size()) != n ||
        static_cast<Index>(points_per.size()) != n)
        throw Error(ErrorCode::InvalidDims, "random_subspaces: need one dim and count per subspace");
    Index total = 0;
    for (Index l = 0; l < n; ++l) {
        if (dims[static_cast<std::size_t>(l)] < 1 || dims[static_cast<std::size_t>(l)] >= d)
            throw Error(ErrorCode::InvalidDims, "random_subspaces: require 1 <= d_l < D");
        if (points_per[static_cast<std::size_t>(l)] < 1)
            throw Error(ErrorCode::InvalidDims, "random_subspaces: points_per >= 1");
        total += points_per[static_cast<std::size_t>(l)];
    }

    Rng rng(seed);
    SubspaceDataset ds;
    ds.seed = seed;
    ds.ambient_dim = d;
    ds.dims = dims;
    ds.points_per = points_per;
    ds.noise_sigma = noise_sigma;
    ds.bases.reserve(static_cast<std::size_t>(n));
    for (Index l = 0; l < n; ++l)
        ds.bases.push_back(detail::random_orthonormal_basis(d, dims[static_cast<std::size_t>(l)], rng));

    Matrix x(d, total);
    ds.labels.resize(static_cast<std::size_t>(total));
    Index col = 0;
    for (Index l = 0; l < n; ++l) {
        const Matrix& basis = ds.bases[static_cast<std::size_t>(l)];
        const Index dl = dims[static_cast<std::size_t>(l)];
        for (Index i = 0; i < points_per[static_cast<std::size_t>(l)]; ++i, ++col) {
            Vector point = basis * rng.unit_vector(dl);
            if (noise_sigma > 0.0) {
                const double scale = noise_sigma / std::sqrt(static_cast<double>(d));
                for (Index r = 0; r < d; ++r) point[r] += scale * rng.normal();
            }
            point /= point.norm();
            x.col(col) = point;
            ds.labels[static_cast<std::size_t>(col)] = static_cast<int>(l);
        }
    }
    ds.data = Dictionary{std::move(x), true};
    ds.independent = std::accumulate(dims.begin(), dims.end(), Index{0}) <= d;
    return ds;
}

/// Convenience overload: equal dimension and point count for every subspace.
inline SubspaceDataset random_subspaces(Index d, Index n, Index dim, Index points_per,
                                        std::uint64_t seed, double noise_sigma = 0.0) {
    return random_subspaces(d, n, std::vector<Index>(static_cast<std::size_t>(n), dim),
                            std::vector<Index>(static_cast<std::size_t>(n), points_per), seed,
                            noise_sigma);
}

}  // namespace ensc::synth
