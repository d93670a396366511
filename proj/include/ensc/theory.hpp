#pragma once

#include "ensc/core.hpp"
#include "ensc/elastic_net.hpp"
#include "ensc/orgen.hpp"
#include "ensc/parallel.hpp"
#include "ensc/rng.hpp"
#include "ensc/self_expressive.hpp"
#include "ensc/synth.hpp"

#include <cstdint>
#include <cstring>
#include <limits>
#include <ostream>
#include <vector>

namespace ensc::theory {

/// Geometric diagnostics of an in-subspace elastic net solve.
///
/// kappa is the coherence of the oracle point with its nearest in-subspace
/// atom; ratio = lambda / |delta| controls the oracle region size;
/// bound_rhs = kappa^2 / (kappa + (1-lambda)/lambda) is the subspace-
/// preserving threshold; delta_bound = (lambda kappa + 1 - lambda) / kappa^2
/// is the oracle-norm bound.
struct OracleDiagnostics {
    double delta_norm = 0.0;
    double ratio = 0.0;
    double kappa = 0.0;
    double bound_rhs = 0.0;
    double delta_bound = 0.0;
    double lambda = 0.0;
    Vector delta;
};

inline double subspace_preserving_rhs(double kappa, double lambda) {
    if (lambda <= 0.0) return 0.0;  // stated convention at lambda = 0
    return kappa * kappa / (kappa + (1.0 - lambda) / lambda);
}

/// Solves the elastic net of x against its same-subspace peers at full
/// accuracy and derives the oracle-point diagnostics. Large dictionaries go
/// through the active-set driver run to exact termination, which reaches the
/// same solution at the same residual tolerance far faster; the reported
/// residual is always measured on the whole in-subspace problem.
inline OracleDiagnostics oracle_diagnostics(const Vector& x, const Dictionary& same_subspace,
                                            double lambda, double gamma,
                                            const InnerSolverConfig& inner = {},
                                            const Tolerances& tol = default_tolerances()) {
    if (same_subspace.size() < 1)
        throw Error(ErrorCode::InvalidArgument, "oracle_diagnostics: need at least one atom");
    ElasticNetProblem p(x, same_subspace, lambda, gamma, tol);
    ElasticNetSolution sol;
    if (same_subspace.size() <= 256) {
        sol = solve_full(p, inner, tol);
    } else {
        OrgenConfig cfg;
        cfg.inner = inner;
        sol = orgen_solve(p, cfg, tol).first;
        if (sol.optimality_residual > inner.tolerance * 10) sol = solve_full(p, inner, tol);
    }

    OracleDiagnostics d;
    d.lambda = lambda;
    d.delta = sol.oracle_point;
    d.delta_norm = d.delta.norm();
    d.ratio = d.delta_norm > 0.0 ? lambda / d.delta_norm : 0.0;
    d.kappa = 0.0;
    if (d.delta_norm > tol.norm)
        for (Index j = 0; j < same_subspace.size(); ++j)
            d.kappa = std::max(d.kappa, coherence(Vector(same_subspace.atom(j)), d.delta, tol));
    d.bound_rhs = subspace_preserving_rhs(d.kappa, lambda);
    d.delta_bound = d.kappa > 0.0
                        ? (lambda * d.kappa + 1.0 - lambda) / (d.kappa * d.kappa)
                        : std::numeric_limits<double>::infinity();
    return d;
}

/// Oracle-region size bound from the inradius: checks
/// ratio >= r^2 / (r + (1-lambda)/lambda) - 1e-10, with the right-hand side
/// defined as 0 at lambda = 0. The inradius must be supplied externally
/// (planted ground truth or a Monte-Carlo proxy).
inline bool check_theorem2(const OracleDiagnostics& diag, double inradius_lower) {
    const double rhs = subspace_preserving_rhs(inradius_lower, diag.lambda);
    return diag.ratio >= rhs - 1e-10;
}

/// Local sufficient condition for a subspace-preserving solution:
/// max over out-of-subspace atoms of mu(x_k, delta) <= (or <, when strict)
/// kappa^2 / (kappa + (1-lambda)/lambda). Vacuously true with no out atoms.
inline bool check_theorem4(const OracleDiagnostics& diag, const Dictionary& out_of_subspace,
                           bool strict = false,
                           const Tolerances& tol = default_tolerances()) {
    double lhs = 0.0;
    if (out_of_subspace.size() > 0 && diag.delta_norm > tol.norm)
        for (Index j = 0; j < out_of_subspace.size(); ++j)
            lhs = std::max(lhs, coherence(Vector(out_of_subspace.atom(j)), diag.delta, tol));
    return strict ? lhs < diag.bound_rhs : lhs <= diag.bound_rhs;
}

/// Monte-Carlo proxy for the inradius of conv{+-a_j}: the minimum over
/// sampled directions v (inside span{a_j}) of max_j mu(a_j, v). Sampling can
/// only overshoot the true minimum, so this is an upper bound on the
/// inradius, reported as a bound and never used as ground truth.
inline double inradius_monte_carlo(const Dictionary& atoms, std::size_t samples,
                                   std::uint64_t seed) {
    if (atoms.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "inradius_monte_carlo: empty dictionary");
    // orthonormal basis of span{a_j} so that sampled directions stay in it
    Eigen::ColPivHouseholderQR<Matrix> qr(atoms.atoms);
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    const Matrix q = qr.householderQ() * Matrix::Identity(atoms.dim(), rank);

    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector v = q * rng.unit_vector(rank);
        const double worst = (atoms.atoms.transpose() * v).cwiseAbs().maxCoeff();
        best = std::min(best, worst);
    }
    return best;
}

/// Fraction (percent) of columns whose support stays within same-label
/// columns. Columns with empty support are excluded by default and counted
/// into `empty_count` when provided.
inline double subspace_preserving_rate(const SelfExpressiveModel& model,
                                       const std::vector<int>& truth,
                                       bool count_empty_as_preserving = false,
                                       Index* empty_count = nullptr) {
    const Index n = model.size();
    if (static_cast<Index>(truth.size()) != n)
        throw Error(ErrorCode::LengthMismatch, "subspace_preserving_rate: length mismatch");
    Index preserved = 0;
    Index empties = 0;
    Index counted = 0;
    for (Index j = 0; j < n; ++j) {
        bool any = false;
        bool ok = true;
        for (Index i = 0; i < n; ++i) {
            if (model.coefficients(i, j) == 0.0) continue;
            any = true;
            if (truth[static_cast<std::size_t>(i)] != truth[static_cast<std::size_t>(j)]) {
                ok = false;
                break;
            }
        }
        if (!any) {
            ++empties;
            if (count_empty_as_preserving) {
                ++counted;
                ++preserved;
            }
            continue;
        }
        ++counted;
        if (ok) ++preserved;
    }
    if (empty_count) *empty_count = empties;
    if (counted == 0) return 0.0;
    return 100.0 * static_cast<double>(preserved) / static_cast<double>(counted);
}

// ---------------------------------------------------------------------------
// Appendix-style phase study: grid over (N, lambda) of the experimental
// subspace-preserving rate and the rate predicted by the local sufficient
// condition.
// ---------------------------------------------------------------------------

struct PhaseGridConfig {
    Index ambient_dim = 20;
    Index n_subspaces = 4;
    Index subspace_dim = 8;
    std::vector<Index> n_points_list{100, 200, 400, 800, 1600, 3200};
    std::vector<double> lambda_list{0.99, 0.95, 0.90, 0.80, 0.60, 0.40, 0.20, 0.10};
    std::size_t seeds = 10;
    double alpha = 10.0;  ///< gamma = alpha * gamma_0 per column
    InnerSolverConfig inner;
    unsigned threads = 0;
    std::uint64_t master_seed = 0;
};

struct PhaseCell {
    Index n_points = 0;
    double lambda = 0.0;
    double experimental_pct = 0.0;
    double predicted_pct = 0.0;
    std::size_t seeds = 0;
    Index empty_columns = 0;
    Index sufficiency_violations = 0;  // predicted-correct but not preserving
};

struct PhaseGridResult {
    std::vector<PhaseCell> cells;  // lambda-major, then N, matching config order
    PhaseGridConfig config;        // generation parameters echoed for reproducibility

    void write_csv(std::ostream& out) const {
        out << "N,lambda,experimental_pct,predicted_pct,seeds\n";
        for (const auto& c : cells) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%zu\n",
                          static_cast<long long>(c.n_points), c.lambda, c.experimental_pct,
                          c.predicted_pct, c.seeds);
            out << buf;
        }
    }
};

namespace detail {

struct CellStats {
    double experimental_pct = 0.0;
    double predicted_pct = 0.0;
    Index empty_columns = 0;
    Index violations = 0;
};

/// One dataset trial: exact per-column solves of the full self-expressive
/// problem (experimental) and of the in-subspace problem (predicted).
inline CellStats phase_cell_trial(const synth::SubspaceDataset& ds, double lambda, double alpha,
                                  const InnerSolverConfig& inner, unsigned threads,
                                  const Tolerances& tol) {
    const Dictionary& x = ds.data;
    const Index n = x.size();
    const Index d = x.dim();

    std::vector<char> preserving(static_cast<std::size_t>(n), 0);
    std::vector<char> predicted(static_cast<std::size_t>(n), 0);
    std::vector<char> empty(static_cast<std::size_t>(n), 0);

    OrgenConfig orgen_cfg;  // exact: runs until the active set settles
    orgen_cfg.inner = inner;

    parallel_for(n, resolve_threads(threads), [&](Index j) {
        const int own = ds.labels[static_cast<std::size_t>(j)];

        // split X_{-j} into same-subspace and out-of-subspace parts
        Matrix same(d, n - 1), other(d, n - 1);
        Index ns = 0, no = 0;
        for (Index i = 0; i < n; ++i) {
            if (i == j) continue;
            if (ds.labels[static_cast<std::size_t>(i)] == own)
                same.col(ns++) = x.atom(i);
            else
                other.col(no++) = x.atom(i);
        }
        same.conservativeResize(d, ns);
        other.conservativeResize(d, no);

        Matrix reduced(d, n - 1);
        reduced.leftCols(j) = x.atoms.leftCols(j);
        reduced.rightCols(n - 1 - j) = x.atoms.rightCols(n - 1 - j);
        const Dictionary dict{std::move(reduced), true};

        const double g0 = gamma_zero(x.atom(j), dict, lambda, tol);
        const double gamma = alpha * g0;

        // experimental: support of the exact full solve stays in-subspace?
        ElasticNetProblem full(x.atom(j), dict, lambda, gamma, tol);
        auto [sol, trace] = orgen_solve(full, orgen_cfg, tol);
        if (sol.support.empty()) {
            empty[static_cast<std::size_t>(j)] = 1;
        } else {
            bool ok = true;
            for (Index t = 0; t < sol.support.size(); ++t) {
                Index orig = sol.support[t];
                if (orig >= j) ++orig;
                if (ds.labels[static_cast<std::size_t>(orig)] != own) {
                    ok = false;
                    break;
                }
            }
            preserving[static_cast<std::size_t>(j)] = ok ? 1 : 0;
        }

        // predicted: local sufficient condition from the in-subspace solve
        const Dictionary same_dict{same, true};
        const Dictionary other_dict{other, true};
        const OracleDiagnostics diag =
            oracle_diagnostics(x.atom(j), same_dict, lambda, gamma, inner, tol);
        predicted[static_cast<std::size_t>(j)] =
            check_theorem4(diag, other_dict, /*strict=*/lambda >= 1.0, tol) ? 1 : 0;
    });

    CellStats stats;
    Index counted = 0, preserved = 0, pred = 0;
    for (Index j = 0; j < n; ++j) {
        if (predicted[static_cast<std::size_t>(j)]) ++pred;
        if (empty[static_cast<std::size_t>(j)]) {
            ++stats.empty_columns;
            continue;
        }
        ++counted;
        if (preserving[static_cast<std::size_t>(j)]) ++preserved;
        if (predicted[static_cast<std::size_t>(j)] && !preserving[static_cast<std::size_t>(j)])
            ++stats.violations;
    }
    stats.experimental_pct =
        counted > 0 ? 100.0 * static_cast<double>(preserved) / static_cast<double>(counted) : 0.0;
    stats.predicted_pct = 100.0 * static_cast<double>(pred) / static_cast<double>(n);
    return stats;
}

}  // namespace detail

/// Runs the full (N, lambda) phase grid, averaging percentages over seeds.
/// Dataset seeds are derived deterministically from (master, N, lambda,
/// trial), so cells are reproducible in isolation.
inline PhaseGridResult phase_grid(const PhaseGridConfig& cfg,
                                  const Tolerances& tol = default_tolerances()) {
    if (cfg.n_points_list.empty() || cfg.lambda_list.empty())
        throw Error(ErrorCode::InvalidArgument, "phase_grid: empty grid");
    PhaseGridResult result;
    result.config = cfg;
    for (double lambda : cfg.lambda_list) {
        for (Index n : cfg.n_points_list) {
            PhaseCell cell;
            cell.n_points = n;
            cell.lambda = lambda;
            cell.seeds = cfg.seeds;
            const Index per = std::max<Index>(1, n / cfg.n_subspaces);
            for (std::size_t trial = 0; trial < cfg.seeds; ++trial) {
                std::uint64_t bits;
                static_assert(sizeof(bits) == sizeof(lambda));
                std::memcpy(&bits, &lambda, sizeof(bits));
                const std::uint64_t seed = derive_seed(cfg.master_seed,
                                                       static_cast<std::uint64_t>(n), bits,
                                                       static_cast<std::uint64_t>(trial));
                const synth::SubspaceDataset ds = synth::random_subspaces(
                    cfg.ambient_dim, cfg.n_subspaces, cfg.subspace_dim, per, seed);
                const detail::CellStats stats = detail::phase_cell_trial(
                    ds, lambda, cfg.alpha, cfg.inner, cfg.threads, tol);
                cell.experimental_pct += stats.experimental_pct;
                cell.predicted_pct += stats.predicted_pct;
                cell.empty_columns += stats.empty_columns;
                cell.sufficiency_violations += stats.violations;
            }
            cell.experimental_pct /= static_cast<double>(cfg.seeds);
            cell.predicted_pct /= static_cast<double>(cfg.seeds);
            result.cells.push_back(cell);
        }
    }
    return result;
}

}  // namespace ensc::theory
