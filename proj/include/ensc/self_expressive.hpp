#pragma once

#include "ensc/core.hpp"
#include "ensc/elastic_net.hpp"
#include "ensc/orgen.hpp"
#include "ensc/parallel.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace ensc {

/// Settings for the clustering front end.
struct EnscConfig {
    double lambda = 0.95;
    double alpha = 3.0;  ///< gamma = alpha * gamma_0 per column, alpha > 1
    OrgenConfig orgen = OrgenConfig::clustering_preset();
    bool parallel_columns = true;
    unsigned threads = 0;  ///< 0: ENSC_THREADS env or hardware concurrency

    void validate() const {
        if (lambda < 0.0 || lambda > 1.0)
            throw Error(ErrorCode::InvalidArgument, "ensc: lambda outside [0, 1]");
        if (alpha <= 1.0)
            throw Error(ErrorCode::InvalidArgument, "ensc: alpha must exceed 1");
    }
};

/// Smallest gamma for which the elastic net solution is nonzero:
/// lambda / |A^T b|_inf, from the condition that c = 0 is optimal iff
/// gamma |A^T b|_inf <= lambda.
inline double gamma_zero(const Vector& b, const Dictionary& dict, double lambda,
                         const Tolerances& tol = default_tolerances()) {
    if (lambda <= 0.0)
        throw Error(ErrorCode::LambdaZero, "gamma_zero: undefined at lambda = 0");
    if (dict.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "gamma_zero: empty dictionary");
    if (b.size() != dict.dim())
        throw Error(ErrorCode::DimensionMismatch, "gamma_zero: dimension mismatch");
    const double corr = (dict.atoms.transpose() * b).lpNorm<Eigen::Infinity>();
    if (corr < tol.norm)
        throw Error(ErrorCode::OrthogonalPoint, "gamma_zero: b orthogonal to every atom");
    return lambda / corr;
}

struct ColumnFailure {
    Index column;
    std::string message;
};

/// Per-point self-expressive coefficients: column j holds
/// c*(x_j, X_{-j}) re-embedded with a zero at position j.
struct SelfExpressiveModel {
    Matrix coefficients;              // N x N, zero diagonal
    std::vector<double> gamma0;       // per-column gamma_0 (0 for failed columns)
    std::vector<Index> support_sizes; // per-column support size
    std::vector<ColumnFailure> failures;

    Index size() const { return coefficients.cols(); }
};

/// Solves the self-expressive elastic net for every column of X with
/// gamma_j = alpha * gamma_0(x_j, X_{-j}). Column solves are independent and
/// run in a parallel map; each column writes only its own slot, so the output
/// does not depend on the worker count. Failures (e.g. a point orthogonal to
/// all others) zero the column and are collected, not thrown.
inline SelfExpressiveModel self_expressive(const Dictionary& x, const EnscConfig& cfg,
                                           const Tolerances& tol = default_tolerances()) {
    cfg.validate();
    const Index n = x.size();
    if (n < 2) throw Error(ErrorCode::InvalidDims, "self_expressive: need at least 2 points");

    SelfExpressiveModel model;
    model.coefficients = Matrix::Zero(n, n);
    model.gamma0.assign(static_cast<std::size_t>(n), 0.0);
    model.support_sizes.assign(static_cast<std::size_t>(n), 0);
    std::vector<std::string> errors(static_cast<std::size_t>(n));

    const unsigned threads = cfg.parallel_columns ? resolve_threads(cfg.threads) : 1;
    parallel_for(n, threads, [&](Index j) {
        // dictionary X with column j removed; index k maps to k + (k >= j)
        Matrix reduced(x.dim(), n - 1);
        reduced.leftCols(j) = x.atoms.leftCols(j);
        reduced.rightCols(n - 1 - j) = x.atoms.rightCols(n - 1 - j);
        const Dictionary dict{std::move(reduced), true};
        try {
            const double g0 = gamma_zero(x.atom(j), dict, cfg.lambda, tol);
            model.gamma0[static_cast<std::size_t>(j)] = g0;
            ElasticNetProblem p(x.atom(j), dict, cfg.lambda, cfg.alpha * g0, tol);
            auto [sol, trace] = orgen_solve(p, cfg.orgen, tol);
            for (Index i = 0; i < sol.support.size(); ++i) {
                const Index k = sol.support[i];
                model.coefficients(k < j ? k : k + 1, j) = sol.coefficients[k];
            }
            model.support_sizes[static_cast<std::size_t>(j)] = sol.support.size();
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(j)] = e.what();
        }
    });

    for (Index j = 0; j < n; ++j)
        if (!errors[static_cast<std::size_t>(j)].empty())
            model.failures.push_back({j, errors[static_cast<std::size_t>(j)]});
    return model;
}

/// Symmetric nonnegative affinity stored as sorted triplets.
struct AffinityEntry {
    Index row;
    Index col;
    double weight;
};

struct Affinity {
    Index n = 0;
    std::vector<AffinityEntry> entries;  // sorted by (row, col), zero diagonal

    Matrix dense() const {
        Matrix w = Matrix::Zero(n, n);
        for (const auto& e : entries) w(e.row, e.col) = e.weight;
        return w;
    }

    void write_csv(std::ostream& out) const {
        out << "i,j,w\n";
        for (const auto& e : entries) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g\n", static_cast<long long>(e.row),
                          static_cast<long long>(e.col), e.weight);
            out << buf;
        }
    }
};

/// W = |C| + |C|^T with the diagonal zeroed.
inline Affinity build_affinity(const SelfExpressiveModel& model) {
    const Index n = model.size();
    Affinity w;
    w.n = n;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = std::abs(model.coefficients(i, j)) +
                             std::abs(model.coefficients(j, i));
            if (v != 0.0) w.entries.push_back({i, j, v});
        }
    }
    return w;
}

}  // namespace ensc
