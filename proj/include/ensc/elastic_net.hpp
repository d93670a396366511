#pragma once

#include "ensc/core.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace ensc {

/// Settings for the inner solver used on full problems and on the reduced
/// subproblems of the active-set driver.
struct InnerSolverConfig {
    std::size_t max_iterations = 100000;
    double tolerance = 1e-10;  ///< infinity-norm fixed-point residual
    bool acceleration = true;
    /// When set, the per-iteration objective values are appended here.
    std::vector<double>* objective_trace = nullptr;
};

inline double soft_threshold(double v, double lambda) {
    if (v > lambda) return v - lambda;
    if (v < -lambda) return v + lambda;
    return 0.0;
}

inline Vector soft_threshold(const Vector& v, double lambda) {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], lambda);
    return out;
}

namespace detail {

// Raw objective on unvalidated inputs; shared by the checked overloads.
inline double objective_raw(const Vector& c, const Vector& b, const Matrix& a, double lambda,
                            double gamma) {
    const double l1 = c.lpNorm<1>();
    const double l2sq = c.squaredNorm();
    const double fit = (b - a * c).squaredNorm();
    return lambda * l1 + 0.5 * (1.0 - lambda) * l2sq + 0.5 * gamma * fit;
}

inline Vector oracle_point_raw(const Vector& c, const Vector& b, const Matrix& a, double gamma) {
    if (c.size() == 0) return gamma * b;
    return gamma * (b - a * c);
}

// Infinity-norm defect of the optimality system at c.
//   lambda < 1:  |(1-lambda) c - T_lambda(A^T delta)|_inf          (fixed point)
//   lambda = 1:  subgradient check: on the support |a_j^T delta - sgn(c_j)|,
//                on zeros max(|a_j^T delta| - 1, 0)
inline double optimality_residual_raw(const Vector& c, const Vector& b, const Matrix& a,
                                      double lambda, double gamma) {
    if (a.cols() == 0) return 0.0;
    const Vector delta = oracle_point_raw(c, b, a, gamma);
    const Vector u = a.transpose() * delta;
    double res = 0.0;
    if (lambda < 1.0) {
        for (Index j = 0; j < c.size(); ++j)
            res = std::max(res, std::abs((1.0 - lambda) * c[j] - soft_threshold(u[j], lambda)));
    } else {
        for (Index j = 0; j < c.size(); ++j) {
            if (c[j] != 0.0)
                res = std::max(res, std::abs(u[j] - (c[j] > 0.0 ? 1.0 : -1.0)));
            else
                res = std::max(res, std::max(std::abs(u[j]) - 1.0, 0.0));
        }
    }
    return res;
}

/// Largest eigenvalue of A^T A, estimated by power iteration on the smaller
/// Gram matrix. The start vector is pseudo-random so it cannot sit inside a
/// structured null space, and the trace of the Gram (an upper bound on the
/// top eigenvalue) backstops a failed run. The estimate carries a small
/// safety factor so that 1/(gamma*L) stays a valid proximal-gradient step.
inline double lipschitz_lambda_max(const Matrix& a) {
    const Index d = a.rows();
    const Index n = a.cols();
    if (n == 0) return 0.0;
    Matrix gram;
    if (d <= n)
        gram = Matrix(a * a.transpose());
    else
        gram = Matrix(a.transpose() * a);
    const Index m = gram.rows();
    const double trace = gram.trace();  // sum of eigenvalues >= lambda_max
    if (trace <= 0.0) return 0.0;

    Vector v(m);
    std::uint64_t state = 0x853c49e6748fea9bULL;
    for (Index i = 0; i < m; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    v /= v.norm();
    double eig = 0.0;
    for (int it = 0; it < 300; ++it) {
        Vector w = gram * v;
        const double nrm = w.norm();
        if (nrm < 1e-300) break;
        w /= nrm;
        const double rayleigh = w.dot(gram * w);
        if (it > 4 && std::abs(rayleigh - eig) <= 1e-12 * std::max(1.0, rayleigh)) {
            eig = rayleigh;
            break;
        }
        eig = rayleigh;
        v = std::move(w);
    }
    if (!(eig >= trace / static_cast<double>(m))) return trace;  // failed run
    return eig * 1.01;
}

struct FistaOptions {
    const Vector* warm_start = nullptr;
    double lipschitz_hint = -1.0;  ///< lambda_max(A^T A) if already known
};

/// Direct solve of the subproblem restricted to a candidate support with
/// fixed signs: ((1-lambda) I + gamma A_S^T A_S) c_S = gamma A_S^T b - lambda s.
/// Used to finish the iteration once the support has settled; the result is
/// only accepted by the caller after a full fixed-point verification.
inline bool polish_on_support(const Vector& b, const Matrix& a, double lambda, double gamma,
                              const std::vector<Index>& support, const std::vector<double>& signs,
                              Vector& c_out) {
    const Index m = static_cast<Index>(support.size());
    Matrix a_s(a.rows(), m);
    for (Index i = 0; i < m; ++i) a_s.col(i) = a.col(support[static_cast<std::size_t>(i)]);
    Matrix sys = Matrix::Zero(m, m);
    sys.selfadjointView<Eigen::Lower>().rankUpdate(a_s.transpose(), gamma);
    sys.diagonal().array() += (1.0 - lambda);
    Vector rhs = gamma * (a_s.transpose() * b);
    for (Index i = 0; i < m; ++i) rhs[i] -= lambda * signs[static_cast<std::size_t>(i)];

    Vector c_s;
    if (lambda < 1.0) {
        Eigen::LLT<Matrix> llt(sys.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success) return false;
        c_s = llt.solve(rhs);
    } else {
        Eigen::LDLT<Matrix> ldlt(sys.selfadjointView<Eigen::Lower>());
        if (ldlt.info() != Eigen::Success) return false;
        c_s = ldlt.solve(rhs);
    }
    for (Index i = 0; i < m; ++i)  // sign pattern must be reproduced
        if (c_s[i] * signs[static_cast<std::size_t>(i)] <= 0.0) return false;

    c_out = Vector::Zero(a.cols());
    for (Index i = 0; i < m; ++i) c_out[support[static_cast<std::size_t>(i)]] = c_s[i];
    return true;
}

/// Accelerated proximal gradient on the elastic net objective. The smooth
/// part is the fidelity term; the l1 and scaled l2 terms are handled by the
/// proximal map, which is soft thresholding followed by the shrink
/// 1/(1 + step*(1-lambda)). Momentum restarts whenever the objective would
/// increase, which keeps the objective sequence non-increasing.
inline ElasticNetSolution fista(const Vector& b, const Matrix& a, double lambda, double gamma,
                                const InnerSolverConfig& cfg,
                                const FistaOptions& opt = {},
                                const Tolerances& tol = default_tolerances()) {
    const Index n = a.cols();
    ElasticNetSolution sol;
    if (n == 0) {
        sol.coefficients = Vector(0);
        sol.oracle_point = gamma * b;
        sol.objective = 0.5 * gamma * b.squaredNorm();
        sol.optimality_residual = 0.0;
        sol.converged = true;
        sol.within_tolerance = true;
        return sol;
    }

    double lmax = opt.lipschitz_hint > 0.0 ? opt.lipschitz_hint : lipschitz_lambda_max(a);
    lmax = std::max(lmax, 1e-12);
    const double step = 1.0 / (gamma * lmax);
    const double shrink = 1.0 / (1.0 + step * (1.0 - lambda));
    const double thresh = lambda * step;

    Vector c = (opt.warm_start && opt.warm_start->size() == n) ? *opt.warm_start
                                                               : Vector::Zero(n);
    Vector r = b - a * c;  // residual b - A c
    double f = lambda * c.lpNorm<1>() + 0.5 * (1.0 - lambda) * c.squaredNorm() +
               0.5 * gamma * r.squaredNorm();
    Vector y = c;
    Vector ry = r;
    double t = 1.0;
    Vector c_next(n), r_next(n), v(n);

    if (cfg.objective_trace) cfg.objective_trace->push_back(f);

    const std::size_t check_every = 5;
    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    int stalls = 0;
    std::size_t polish_after = 20;
    for (; it < cfg.max_iterations; ++it) {
        // gradient step on y, then the elastic net proximal map
        v.noalias() = a.transpose() * ry;
        v = y + (step * gamma) * v;
        for (Index j = 0; j < n; ++j) c_next[j] = shrink * soft_threshold(v[j], thresh);
        r_next.noalias() = b - a * c_next;
        double f_next = lambda * c_next.lpNorm<1>() + 0.5 * (1.0 - lambda) * c_next.squaredNorm() +
                        0.5 * gamma * r_next.squaredNorm();

        if (f_next > f) {
            // restart: the plain proximal step from c descends for any step
            // below 1/L, so accept it up to roundoff
            t = 1.0;
            v.noalias() = a.transpose() * r;
            v = c + (step * gamma) * v;
            for (Index j = 0; j < n; ++j) c_next[j] = shrink * soft_threshold(v[j], thresh);
            r_next.noalias() = b - a * c_next;
            f_next = lambda * c_next.lpNorm<1>() + 0.5 * (1.0 - lambda) * c_next.squaredNorm() +
                     0.5 * gamma * r_next.squaredNorm();
            if (f_next > f + 1e-12 * std::max(1.0, f)) {  // diverging step; keep the iterate
                c_next = c;
                r_next = r;
                f_next = f;
                ++stalls;
            } else {
                stalls = 0;
            }
        } else {
            stalls = 0;
        }

        const bool check = (it % check_every == check_every - 1) ||
                           it + 1 == cfg.max_iterations || stalls > 50;
        bool polished = false;
        if (check) {
            const Vector u = gamma * (a.transpose() * r_next);
            if (lambda < 1.0) {
                residual = 0.0;
                for (Index j = 0; j < n; ++j)
                    residual = std::max(residual, std::abs((1.0 - lambda) * c_next[j] -
                                                           soft_threshold(u[j], lambda)));
            } else {
                residual = 0.0;
                for (Index j = 0; j < n; ++j) {
                    if (c_next[j] != 0.0)
                        residual = std::max(residual,
                                            std::abs(u[j] - (c_next[j] > 0.0 ? 1.0 : -1.0)));
                    else
                        residual = std::max(residual, std::max(std::abs(u[j]) - 1.0, 0.0));
                }
            }

            // near the optimum, finish with a direct solve on the settled
            // support instead of grinding out ill-conditioned iterations
            if (residual > cfg.tolerance &&
                residual <= std::max(1e-4, 1e3 * cfg.tolerance) && it >= polish_after) {
                polish_after = it + 50;
                std::vector<Index> support;
                std::vector<double> signs;
                for (Index j = 0; j < n; ++j) {
                    if (c_next[j] != 0.0) {
                        support.push_back(j);
                        signs.push_back(c_next[j] > 0.0 ? 1.0 : -1.0);
                    }
                }
                Vector candidate;
                if (static_cast<Index>(support.size()) <= std::min<Index>(n, 1000) &&
                    polish_on_support(b, a, lambda, gamma, support, signs, candidate)) {
                    const double cand_res =
                        optimality_residual_raw(candidate, b, a, lambda, gamma);
                    if (cand_res <= cfg.tolerance) {
                        c_next = candidate;
                        r_next.noalias() = b - a * c_next;
                        f_next = lambda * c_next.lpNorm<1>() +
                                 0.5 * (1.0 - lambda) * c_next.squaredNorm() +
                                 0.5 * gamma * r_next.squaredNorm();
                        residual = cand_res;
                        polished = true;
                    }
                }
            }
        }

        if (cfg.acceleration && !polished) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = (t - 1.0) / t_next;
            y = c_next + beta * (c_next - c);
            ry = (1.0 + beta) * r_next - beta * r;
            t = t_next;
        } else {
            y = c_next;
            ry = r_next;
            t = 1.0;
        }
        c.swap(c_next);
        r.swap(r_next);
        f = f_next;
        if (cfg.objective_trace) cfg.objective_trace->push_back(f);
        if (check && (residual <= cfg.tolerance || stalls > 50)) {
            ++it;
            break;
        }
    }

    sol.converged = residual <= cfg.tolerance;
    sol.iterations = it;

    // support cleanup: entries at or below the cutoff are exactly zeroed
    std::vector<Index> support;
    for (Index j = 0; j < n; ++j) {
        if (std::abs(c[j]) <= tol.support_cutoff)
            c[j] = 0.0;
        else
            support.push_back(j);
    }
    sol.coefficients = std::move(c);
    sol.support = IndexSet(std::move(support));
    sol.oracle_point = oracle_point_raw(sol.coefficients, b, a, gamma);
    sol.objective = objective_raw(sol.coefficients, b, a, lambda, gamma);
    sol.optimality_residual = optimality_residual_raw(sol.coefficients, b, a, lambda, gamma);
    sol.within_tolerance = sol.optimality_residual <= tol.optimality;
    return sol;
}

}  // namespace detail

/// Elastic net objective value (Eq. form: l1 + scaled l2 + scaled fidelity).
inline double objective(const Vector& c, const ElasticNetProblem& p) {
    if (c.size() != p.size())
        throw Error(ErrorCode::DimensionMismatch, "objective: coefficient length mismatch");
    return detail::objective_raw(c, p.b, p.dict.atoms, p.lambda, p.gamma);
}

/// Oracle point gamma * (b - A c). Meaningful when c solves the problem.
inline Vector oracle_point(const Vector& c, const ElasticNetProblem& p) {
    if (c.size() != p.size())
        throw Error(ErrorCode::DimensionMismatch, "oracle_point: coefficient length mismatch");
    return detail::oracle_point_raw(c, p.b, p.dict.atoms, p.gamma);
}

/// Infinity-norm defect of the optimality conditions at c; 0 at the solution.
inline double check_optimality(const Vector& c, const ElasticNetProblem& p) {
    if (c.size() != p.size())
        throw Error(ErrorCode::DimensionMismatch, "check_optimality: coefficient length mismatch");
    return detail::optimality_residual_raw(c, p.b, p.dict.atoms, p.lambda, p.gamma);
}

/// Membership test data for the oracle region: the antipodal spherical caps
/// around +-delta/|delta| with coherence threshold lambda/|delta|.
struct OracleRegionQuery {
    Vector delta;
    double lambda = 0.0;
    double threshold = 0.0;  // lambda / |delta|
    double delta_norm = 0.0;

    static OracleRegionQuery make(Vector delta, double lambda,
                                  const Tolerances& tol = default_tolerances()) {
        const double nrm = delta.norm();
        if (nrm < tol.norm)
            throw Error(ErrorCode::DegenerateOracle, "oracle point is zero");
        return OracleRegionQuery{std::move(delta), lambda, lambda / nrm, nrm};
    }
};

/// Strict membership, evaluated in the equivalent inner-product form
/// |<atom, delta>| > lambda for unit atoms. Values within the boundary band
/// count as "on boundary" and are excluded from the open region.
inline bool in_oracle_region(const Vector& atom, const OracleRegionQuery& q,
                             const Tolerances& tol = default_tolerances()) {
    if (atom.size() != q.delta.size())
        throw Error(ErrorCode::DimensionMismatch, "in_oracle_region: dimension mismatch");
    return std::abs(atom.dot(q.delta)) - q.lambda > tol.boundary_band;
}

inline bool on_region_boundary(const Vector& atom, const OracleRegionQuery& q,
                               const Tolerances& tol = default_tolerances()) {
    if (atom.size() != q.delta.size())
        throw Error(ErrorCode::DimensionMismatch, "on_region_boundary: dimension mismatch");
    return std::abs(std::abs(atom.dot(q.delta)) - q.lambda) <= tol.boundary_band;
}

/// |A^T delta|_inf; dual-feasible for the lambda = 1 problem iff <= 1.
inline double dual_feasibility_lambda1(const Vector& delta, const Dictionary& dict) {
    if (dict.size() == 0) return 0.0;
    if (delta.size() != dict.dim())
        throw Error(ErrorCode::DimensionMismatch, "dual_feasibility: dimension mismatch");
    return (dict.atoms.transpose() * delta).lpNorm<Eigen::Infinity>();
}

/// Closed-form ridge solution (lambda = 0):
///   c = gamma A^T (I_D + gamma A A^T)^{-1} b
/// via the push-through identity, so only a D x D system is solved.
inline Vector ridge_closed_form(const Vector& b, const Matrix& a, double gamma) {
    if (b.size() != a.rows())
        throw Error(ErrorCode::DimensionMismatch, "ridge: b length != rows");
    if (gamma <= 0.0) throw Error(ErrorCode::InvalidArgument, "ridge: gamma must be positive");
    const Index d = a.rows();
    Matrix sys = Matrix::Identity(d, d);
    sys.selfadjointView<Eigen::Lower>().rankUpdate(a, gamma);
    Eigen::LLT<Matrix> llt(sys.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::SingularSystem, "ridge: factorization failed");
    return gamma * (a.transpose() * llt.solve(b));
}

inline Vector ridge_closed_form(const ElasticNetProblem& p) {
    return ridge_closed_form(p.b, p.dict.atoms, p.gamma);
}

/// Solves the elastic net on the full dictionary with accelerated proximal
/// gradient. Throws MaxIterationsError (carrying the best iterate) if the
/// residual tolerance is not reached.
inline ElasticNetSolution solve_full(const ElasticNetProblem& p, const InnerSolverConfig& cfg = {},
                                     const Tolerances& tol = default_tolerances()) {
    ElasticNetSolution sol = detail::fista(p.b, p.dict.atoms, p.lambda, p.gamma, cfg, {}, tol);
    if (!sol.converged)
        throw MaxIterationsError(
            ErrorCode::MaxIterationsExceeded,
            "solver stopped at residual " + std::to_string(sol.optimality_residual),
            std::move(sol));
    return sol;
}

/// Same, starting the iteration from `start` instead of zero.
inline ElasticNetSolution solve_full(const ElasticNetProblem& p, const InnerSolverConfig& cfg,
                                     const Vector& start,
                                     const Tolerances& tol = default_tolerances()) {
    detail::FistaOptions opt;
    opt.warm_start = &start;
    ElasticNetSolution sol = detail::fista(p.b, p.dict.atoms, p.lambda, p.gamma, cfg, opt, tol);
    if (!sol.converged)
        throw MaxIterationsError(
            ErrorCode::MaxIterationsExceeded,
            "solver stopped at residual " + std::to_string(sol.optimality_residual),
            std::move(sol));
    return sol;
}

}  // namespace ensc
