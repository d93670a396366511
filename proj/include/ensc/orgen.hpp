#pragma once

#include "ensc/core.hpp"
#include "ensc/elastic_net.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ensc {

/// Configuration of the oracle-guided active-set driver.
struct OrgenConfig {
    Index init_size = 100;  ///< l: size of the initial active set (clipped to N)
    std::optional<Index> max_active;  ///< N_max: enables the capped update when set
    std::size_t max_outer_iterations = 100;
    InnerSolverConfig inner;
    bool lambda_one_mode = false;  ///< auto-enabled when lambda == 1
    /// Treats hitting the outer cap (and inner non-convergence) as a normal
    /// outcome instead of an error. Used by the clustering pipeline.
    bool best_effort = false;
    std::optional<IndexSet> initial_active_set;  ///< overrides ridge initialization

    /// Preset for the clustering pipeline: at most 2 outer iterations with a
    /// capped active set, which is sufficient for affinity construction.
    static OrgenConfig clustering_preset(Index n_max = 3000) {
        OrgenConfig cfg;
        cfg.max_outer_iterations = 2;
        cfg.max_active = n_max;
        cfg.best_effort = true;
        return cfg;
    }
};

struct OrgenIterationRecord {
    std::size_t iteration = 0;
    Index active_size = 0;
    double objective = 0.0;  ///< subproblem objective f(c*(b, A_T); b, A_T)
    Index support_size = 0;
    double residual = 0.0;  ///< subproblem optimality residual
};

struct OrgenTrace {
    std::vector<OrgenIterationRecord> records;
    bool hit_outer_limit = false;

    std::size_t outer_iterations() const { return records.size(); }

    void write_csv(std::ostream& out) const {
        out << "iteration,active_size,objective,support_size,residual\n";
        for (const auto& r : records) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%zu,%lld,%.17g,%lld,%.17g\n", r.iteration,
                          static_cast<long long>(r.active_size), r.objective,
                          static_cast<long long>(r.support_size), r.residual);
            out << buf;
        }
    }
};

/// Initial active set: the l largest-magnitude entries of the ridge
/// (lambda = 0) closed-form solution, ties broken toward the lower index.
inline IndexSet init_active_set(const ElasticNetProblem& p, const OrgenConfig& cfg) {
    const Index n = p.size();
    const Index l = std::clamp<Index>(cfg.init_size, 1, n);
    if (l >= n) return IndexSet::full(n);
    const Vector ridge = ridge_closed_form(p);
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    std::sort(order.begin(), order.end(), [&](Index i, Index j) {
        const double ai = std::abs(ridge[i]);
        const double aj = std::abs(ridge[j]);
        if (ai != aj) return ai > aj;
        return i < j;
    });
    order.resize(static_cast<std::size_t>(l));
    return IndexSet(std::move(order));
}

/// One active-set update from the oracle point of the current subproblem.
///
/// Plain mode keeps every atom strictly inside the oracle region. Capped mode
/// keeps the in-region members of the current set and admits only the top-n
/// new in-region atoms ranked by |a_j^T delta| (largest first, then lower
/// index), with n chosen so the result stays within max_active — but at
/// least one new atom is always admitted when any exists. In lambda-1 mode
/// the support of the current subproblem solution is added to the union,
/// since at lambda = 1 nonzero coefficients sit on the region boundary
/// rather than inside it.
inline IndexSet active_set_update(const Vector& delta, const Dictionary& dict,
                                  const IndexSet& current, const OrgenConfig& cfg, double lambda,
                                  const IndexSet& subproblem_support = {},
                                  const Tolerances& tol = default_tolerances()) {
    if (delta.size() != dict.dim())
        throw Error(ErrorCode::DimensionMismatch, "active_set_update: dimension mismatch");
    if (delta.norm() < tol.norm)
        throw Error(ErrorCode::DegenerateOracle, "active_set_update: oracle point is zero");
    const double lam = lambda;
    const Vector u = dict.atoms.transpose() * delta;

    std::vector<Index> base;       // in-region members of the current set
    std::vector<Index> newcomers;  // in-region atoms outside the current set
    for (Index j = 0; j < dict.size(); ++j) {
        if (std::abs(u[j]) - lam <= tol.boundary_band) continue;  // outside or on boundary
        if (current.contains(j))
            base.push_back(j);
        else
            newcomers.push_back(j);
    }
    if (cfg.lambda_one_mode) {
        for (Index j : subproblem_support)
            if (std::find(base.begin(), base.end(), j) == base.end()) base.push_back(j);
    }
    if (cfg.max_active) {
        std::sort(newcomers.begin(), newcomers.end(), [&](Index i, Index j) {
            const double ai = std::abs(u[i]);
            const double aj = std::abs(u[j]);
            if (ai != aj) return ai > aj;
            return i < j;
        });
        const Index budget = *cfg.max_active - static_cast<Index>(base.size());
        Index n_new = std::max<Index>(budget, newcomers.empty() ? 0 : 1);
        n_new = std::min<Index>(n_new, static_cast<Index>(newcomers.size()));
        newcomers.resize(static_cast<std::size_t>(n_new));
    }
    base.insert(base.end(), newcomers.begin(), newcomers.end());
    return IndexSet(std::move(base));
}

namespace detail {

inline ElasticNetSolution embed_solution(const Vector& c_sub, const IndexSet& active,
                                         const ElasticNetProblem& p, std::size_t inner_iters,
                                         bool converged, const Tolerances& tol) {
    ElasticNetSolution sol;
    Vector c = Vector::Zero(p.size());
    for (Index i = 0; i < active.size(); ++i) c[active[i]] = c_sub[i];
    std::vector<Index> support;
    for (Index j = 0; j < p.size(); ++j) {
        if (std::abs(c[j]) <= tol.support_cutoff)
            c[j] = 0.0;
        else
            support.push_back(j);
    }
    sol.coefficients = std::move(c);
    sol.support = IndexSet(std::move(support));
    sol.oracle_point = detail::oracle_point_raw(sol.coefficients, p.b, p.dict.atoms, p.gamma);
    sol.objective = detail::objective_raw(sol.coefficients, p.b, p.dict.atoms, p.lambda, p.gamma);
    sol.optimality_residual =
        detail::optimality_residual_raw(sol.coefficients, p.b, p.dict.atoms, p.lambda, p.gamma);
    sol.within_tolerance = sol.optimality_residual <= tol.optimality;
    sol.iterations = inner_iters;
    sol.converged = converged;
    return sol;
}

}  // namespace detail

/// Oracle-guided active-set solver. Solves a sequence of reduced subproblems;
/// after each solve the next active set is read off the oracle region of the
/// subproblem. Terminates when the updated set introduces no new atoms, at
/// which point the subproblem solution solves the full problem.
inline std::pair<ElasticNetSolution, OrgenTrace> orgen_solve(const ElasticNetProblem& p,
                                                             OrgenConfig cfg = {},
                                                             const Tolerances& tol =
                                                                 default_tolerances()) {
    if (p.lambda == 1.0) cfg.lambda_one_mode = true;
    OrgenTrace trace;

    IndexSet active = cfg.initial_active_set ? *cfg.initial_active_set : init_active_set(p, cfg);
    IndexSet solved_set;  // the set c_sub belongs to
    Vector warm;          // subproblem warm start, remapped between iterations
    Vector c_sub;
    std::size_t inner_total = 0;

    for (std::size_t k = 0; k < cfg.max_outer_iterations; ++k) {
        Vector delta;
        double sub_objective;
        double sub_residual = 0.0;
        IndexSet sub_support;

        if (active.empty()) {
            // empty subproblem: solution 0, oracle point gamma * b
            c_sub = Vector(0);
            delta = p.gamma * p.b;
            sub_objective = 0.5 * p.gamma;  // |b| = 1
        } else {
            const Matrix a_sub = p.dict.submatrix(active);
            detail::FistaOptions opt;
            if (warm.size() == a_sub.cols()) opt.warm_start = &warm;
            ElasticNetSolution sub =
                detail::fista(p.b, a_sub, p.lambda, p.gamma, cfg.inner, opt, tol);
            inner_total += sub.iterations;
            if (!sub.converged && !cfg.best_effort)
                throw MaxIterationsError(ErrorCode::MaxIterationsExceeded,
                                         "subproblem solver stopped at residual " +
                                             std::to_string(sub.optimality_residual),
                                         detail::embed_solution(sub.coefficients, active, p,
                                                                inner_total, false, tol));
            c_sub = std::move(sub.coefficients);
            delta = std::move(sub.oracle_point);
            sub_objective = sub.objective;
            sub_residual = sub.optimality_residual;
            std::vector<Index> sup;
            for (Index i = 0; i < active.size(); ++i)
                if (c_sub[i] != 0.0) sup.push_back(active[i]);
            sub_support = IndexSet(std::move(sup));
        }
        solved_set = active;

        trace.records.push_back({k, active.size(), sub_objective, sub_support.size(),
                                 sub_residual});

        if (delta.norm() < tol.norm)  // b reconstructed exactly; nothing to add
            return {detail::embed_solution(c_sub, solved_set, p, inner_total, true, tol),
                    std::move(trace)};

        const IndexSet next =
            active_set_update(delta, p.dict, active, cfg, p.lambda, sub_support, tol);
        if (next.subset_of(active))
            return {detail::embed_solution(c_sub, solved_set, p, inner_total, true, tol),
                    std::move(trace)};

        // remap the warm start onto the next active set
        warm = Vector::Zero(next.size());
        for (Index i = 0; i < next.size(); ++i) {
            const Index j = next[i];
            const auto& idx = active.indices();
            const auto it = std::lower_bound(idx.begin(), idx.end(), j);
            if (it != idx.end() && *it == j)
                warm[i] = c_sub[static_cast<Index>(it - idx.begin())];
        }
        active = next;
    }

    trace.hit_outer_limit = true;
    ElasticNetSolution best = detail::embed_solution(c_sub, solved_set, p, inner_total,
                                                     /*converged=*/false, tol);
    if (!cfg.best_effort)
        throw MaxIterationsError(ErrorCode::MaxOuterIterationsExceeded,
                                 "active set did not settle within " +
                                     std::to_string(cfg.max_outer_iterations) +
                                     " outer iterations",
                                 std::move(best));
    return {std::move(best), std::move(trace)};
}

}  // namespace ensc
