#pragma once

#include "ensc/core.hpp"
#include "ensc/rng.hpp"
#include "ensc/self_expressive.hpp"

#include <limits>
#include <vector>

namespace ensc {

struct ClusteringResult {
    std::vector<int> labels;
    int n_clusters = 0;
    double kmeans_inertia = 0.0;
    double eigengap = 0.0;
    bool degenerate = false;
    /// max over the n computed eigenpairs of |L v - mu v|_2
    double eigenpair_residual = 0.0;
};

namespace detail {

/// Maximum-weight assignment value on a square nonnegative matrix
/// (Hungarian algorithm with potentials, O(n^3)). Returns the assignment
/// row -> column in `match` and the total weight.
inline double hungarian_max(const Matrix& weight, std::vector<Index>& match) {
    const Index n = weight.rows();
    // minimize the negated weights; classic shortest augmenting path scheme
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> p(static_cast<std::size_t>(n + 1), 0);    // column -> row
    std::vector<Index> way(static_cast<std::size_t>(n + 1), 0);
    auto cost = [&](Index i, Index j) { return -weight(i - 1, j - 1); };

    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    match.assign(static_cast<std::size_t>(n), -1);
    double total = 0.0;
    for (Index j = 1; j <= n; ++j) {
        const Index i = p[static_cast<std::size_t>(j)];
        if (i >= 1) {
            match[static_cast<std::size_t>(i - 1)] = j - 1;
            total += weight(i - 1, j - 1);
        }
    }
    return total;
}

struct KmeansResult {
    std::vector<int> labels;
    double inertia = std::numeric_limits<double>::infinity();
};

inline KmeansResult kmeans_once(const Matrix& rows, int k, Rng& rng, int max_iter, double tol) {
    const Index n = rows.rows();
    const Index d = rows.cols();
    Matrix centers(k, d);

    // k-means++ seeding
    std::vector<double> dist2(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
    centers.row(0) = rows.row(rng.index(n));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double d2 = (rows.row(i) - centers.row(c - 1)).squaredNorm();
            dist2[static_cast<std::size_t>(i)] = std::min(dist2[static_cast<std::size_t>(i)], d2);
            total += dist2[static_cast<std::size_t>(i)];
        }
        Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += dist2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        centers.row(c) = rows.row(pick);
    }

    KmeansResult res;
    res.labels.assign(static_cast<std::size_t>(n), 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d2 = (rows.row(i) - centers.row(c)).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            res.labels[static_cast<std::size_t>(i)] = arg;
            inertia += best;
        }
        // update
        Matrix sums = Matrix::Zero(k, d);
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(res.labels[static_cast<std::size_t>(i)]) += rows.row(i);
            ++counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // empty cluster: reseed at the point farthest from its center
                Index far = 0;
                double worst = -1.0;
                for (Index i = 0; i < n; ++i) {
                    const double d2 =
                        (rows.row(i) - centers.row(res.labels[static_cast<std::size_t>(i)]))
                            .squaredNorm();
                    if (d2 > worst) {
                        worst = d2;
                        far = i;
                    }
                }
                centers.row(c) = rows.row(far);
            }
        }
        res.inertia = inertia;
        if (std::abs(prev_inertia - inertia) <= tol * std::max(1.0, prev_inertia)) break;
        prev_inertia = inertia;
    }
    return res;
}

}  // namespace detail

/// Normalized spectral clustering: symmetric normalized Laplacian
/// L = I - D^{-1/2} W D^{-1/2}, bottom-n eigenvectors, row normalization,
/// then k-means (k-means++ seeding, 20 restarts, best inertia wins).
/// Deterministic for fixed (W, n, seed). Degree-0 vertices get unit
/// self-degree.
inline ClusteringResult spectral_cluster(const Affinity& w, int n_clusters, std::uint64_t seed,
                                         const Tolerances& tol = default_tolerances()) {
    const Index n = w.n;
    if (n < 1) throw Error(ErrorCode::InvalidDims, "spectral_cluster: empty affinity");
    ClusteringResult result;
    result.n_clusters = n_clusters;
    result.labels.assign(static_cast<std::size_t>(n), 0);
    if (n_clusters < 2) {
        result.degenerate = true;
        return result;
    }
    if (n_clusters > static_cast<int>(n))
        throw Error(ErrorCode::InvalidArgument, "spectral_cluster: more clusters than points");

    Matrix dense = w.dense();
    Vector degree = dense.rowwise().sum();
    bool all_zero = true;
    for (Index i = 0; i < n; ++i) {
        if (degree[i] > 0.0)
            all_zero = false;
        else
            degree[i] = 1.0;  // isolated vertex
    }
    if (all_zero) {
        result.degenerate = true;
        return result;
    }

    const Vector dinv_sqrt = degree.cwiseSqrt().cwiseInverse();
    Matrix lap = -(dinv_sqrt.asDiagonal() * dense * dinv_sqrt.asDiagonal());
    lap.diagonal().array() += 1.0;
    lap = 0.5 * (lap + lap.transpose());  // enforce exact symmetry

    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::EigenSolverFailure, "spectral_cluster: eigensolver failed");
    Matrix embedding = eig.eigenvectors().leftCols(n_clusters);
    result.eigengap = (n_clusters < n)
                          ? eig.eigenvalues()[n_clusters] - eig.eigenvalues()[n_clusters - 1]
                          : 0.0;
    for (int c = 0; c < n_clusters; ++c) {
        const double res =
            (lap * embedding.col(c) - eig.eigenvalues()[c] * embedding.col(c)).norm();
        result.eigenpair_residual = std::max(result.eigenpair_residual, res);
    }

    for (Index i = 0; i < n; ++i) {
        const double nrm = embedding.row(i).norm();
        if (nrm > tol.norm) embedding.row(i) /= nrm;
    }

    detail::KmeansResult best;
    const int restarts = 20;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, 0x6b6d65616e73ULL, static_cast<std::uint64_t>(r)));
        detail::KmeansResult cand = detail::kmeans_once(embedding, n_clusters, rng, 300, 1e-9);
        if (cand.inertia < best.inertia) best = std::move(cand);
    }
    result.labels = std::move(best.labels);
    result.kmeans_inertia = best.inertia;

    std::vector<Index> counts(static_cast<std::size_t>(n_clusters), 0);
    for (int lbl : result.labels) ++counts[static_cast<std::size_t>(lbl)];
    for (int c = 0; c < n_clusters; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0) result.degenerate = true;
    return result;
}

/// Best matching rate between two labelings: the maximum over label
/// permutations of the fraction of agreeing entries, computed by Hungarian
/// assignment on the confusion matrix.
inline double clustering_accuracy(const std::vector<int>& labels, const std::vector<int>& truth) {
    if (labels.size() != truth.size())
        throw Error(ErrorCode::LengthMismatch, "clustering_accuracy: length mismatch");
    if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "clustering_accuracy: empty");

    int max_label = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || truth[i] < 0)
            throw Error(ErrorCode::InvalidArgument, "clustering_accuracy: negative label");
        max_label = std::max({max_label, labels[i], truth[i]});
    }
    const Index k = static_cast<Index>(max_label) + 1;
    Matrix confusion = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        confusion(truth[i], labels[i]) += 1.0;

    std::vector<Index> match;
    const double total = detail::hungarian_max(confusion, match);
    return total / static_cast<double>(labels.size());
}

}  // namespace ensc
