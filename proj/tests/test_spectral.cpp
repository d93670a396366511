#include "ensc/spectral.hpp"
#include "ensc/rng.hpp"
#include "ensc/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace ensc;

namespace {

Affinity affinity_from_dense(const Matrix& w) {
    Affinity a;
    a.n = w.rows();
    for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j)
            if (i != j && w(i, j) != 0.0) a.entries.push_back({i, j, w(i, j)});
    return a;
}

// Exhaustive minimum normalized cut over all bipartitions; tractable to N = 14.
std::vector<int> brute_force_ncut_bipartition(const Matrix& w) {
    const Index n = w.rows();
    const Vector degree = w.rowwise().sum();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 1;
    for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
        double cut = 0.0, vol_s = 0.0, vol_c = 0.0;
        for (Index i = 0; i < n; ++i) {
            const bool in_s = mask & (1u << i);
            (in_s ? vol_s : vol_c) += degree[i];
            for (Index j = 0; j < n; ++j)
                if (in_s && !(mask & (1u << j))) cut += w(i, j);
        }
        if (vol_s <= 0.0 || vol_c <= 0.0) continue;
        const double ncut = cut * (1.0 / vol_s + 1.0 / vol_c);
        if (ncut < best) {
            best = ncut;
            best_mask = mask;
        }
    }
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = (best_mask & (1u << i)) ? 1 : 0;
    return labels;
}

double brute_force_accuracy(const std::vector<int>& labels, const std::vector<int>& truth) {
    int k = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) k = std::max({k, labels[i], truth[i]});
    ++k;
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        int hits = 0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (perm[static_cast<std::size_t>(labels[i])] == truth[i]) ++hits;
        best = std::max(best, static_cast<double>(hits) / static_cast<double>(labels.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST(SpectralCluster, BlockDiagonalRecoversBlocks) {
    const Index n = 12;
    Matrix w = Matrix::Zero(n, n);
    std::vector<int> truth(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            truth[static_cast<std::size_t>(i)] = static_cast<int>(i / 4);
            if (i != j && i / 4 == j / 4) w(i, j) = 1.0;
        }
    const auto result = spectral_cluster(affinity_from_dense(w), 3, 0);
    EXPECT_FALSE(result.degenerate);
    EXPECT_DOUBLE_EQ(clustering_accuracy(result.labels, truth), 1.0);
}

TEST(SpectralCluster, ZeroAffinityIsDegenerate) {
    Affinity w;
    w.n = 5;
    const auto result = spectral_cluster(w, 2, 0);
    EXPECT_TRUE(result.degenerate);
    EXPECT_EQ(result.labels, std::vector<int>(5, 0));
}

TEST(SpectralCluster, SingleClusterRequestIsDegenerate) {
    Matrix w = Matrix::Ones(4, 4);
    w.diagonal().setZero();
    const auto result = spectral_cluster(affinity_from_dense(w), 1, 0);
    EXPECT_TRUE(result.degenerate);
    EXPECT_EQ(result.labels, std::vector<int>(4, 0));
}

TEST(SpectralCluster, WeakCrossLinksMatchBruteForceNcut) {
    // two noisy blocks, cross-links at 1e-3 of the in-block weight
    Rng rng(5);
    const Index n = 12;
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const bool same = (i < n / 2) == (j < n / 2);
            const double weight = same ? 1.0 + 0.3 * rng.uniform01() : 1e-3 * rng.uniform01();
            w(i, j) = w(j, i) = weight;
        }
    }
    const auto result = spectral_cluster(affinity_from_dense(w), 2, 1);
    const auto oracle = brute_force_ncut_bipartition(w);
    EXPECT_DOUBLE_EQ(clustering_accuracy(result.labels, oracle), 1.0);
}

TEST(SpectralCluster, DeterministicGivenSeed) {
    const auto ds = synth::random_subspaces(8, 2, 3, 20, 3);
    Matrix w = Matrix::Zero(40, 40);
    for (Index i = 0; i < 40; ++i)
        for (Index j = 0; j < 40; ++j)
            if (i != j) w(i, j) = std::abs(ds.data.atom(i).dot(ds.data.atom(j)));
    const auto a = spectral_cluster(affinity_from_dense(w), 2, 123);
    const auto b = spectral_cluster(affinity_from_dense(w), 2, 123);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.kmeans_inertia, b.kmeans_inertia);
}

TEST(SpectralCluster, EigenpairResidualIsTiny) {
    Rng rng(17);
    const Index n = 30;
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = rng.uniform01();
    const auto result = spectral_cluster(affinity_from_dense(w), 4, 9);
    EXPECT_LE(result.eigenpair_residual, 1e-8);
}

TEST(SpectralCluster, IsolatedVerticesAreTolerated) {
    Matrix w = Matrix::Zero(6, 6);
    w(0, 1) = w(1, 0) = 1.0;
    w(2, 3) = w(3, 2) = 1.0;  // vertices 4, 5 isolated
    const auto result = spectral_cluster(affinity_from_dense(w), 2, 0);
    EXPECT_EQ(result.labels.size(), 6u);
}

TEST(ClusteringAccuracy, IdentityAndPermutation) {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    EXPECT_DOUBLE_EQ(clustering_accuracy(truth, truth), 1.0);
    const std::vector<int> renamed{2, 2, 0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(clustering_accuracy(renamed, truth), 1.0);
}

TEST(ClusteringAccuracy, PartialMatch) {
    const std::vector<int> truth{0, 0, 1, 1};
    const std::vector<int> labels{0, 1, 1, 1};
    EXPECT_DOUBLE_EQ(clustering_accuracy(labels, truth), 0.75);
}

TEST(ClusteringAccuracy, LengthMismatchRejected) {
    EXPECT_THROW(clustering_accuracy({0, 1}, {0, 1, 1}), Error);
}

TEST(ClusteringAccuracy, InvariantToRelabelingEitherArgument) {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> labels(40), truth(40);
        for (int i = 0; i < 40; ++i) {
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(4));
            truth[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(4));
        }
        const double base = clustering_accuracy(labels, truth);
        std::vector<int> perm{2, 3, 1, 0};
        std::vector<int> relabeled(40);
        for (int i = 0; i < 40; ++i)
            relabeled[static_cast<std::size_t>(i)] =
                perm[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        EXPECT_DOUBLE_EQ(clustering_accuracy(relabeled, truth), base);
        for (int i = 0; i < 40; ++i)
            relabeled[static_cast<std::size_t>(i)] =
                perm[static_cast<std::size_t>(truth[static_cast<std::size_t>(i)])];
        EXPECT_DOUBLE_EQ(clustering_accuracy(labels, relabeled), base);
    }
}

TEST(ClusteringAccuracy, MatchesBruteForcePermutationMaximization) {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(4));  // up to 5 clusters
        const int n = 10 + static_cast<int>(rng.below(30));
        std::vector<int> labels(static_cast<std::size_t>(n)), truth(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            truth[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        }
        EXPECT_DOUBLE_EQ(clustering_accuracy(labels, truth), brute_force_accuracy(labels, truth))
            << "trial " << trial;
    }
}
