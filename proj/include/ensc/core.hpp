#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ensc {

inline constexpr const char* kVersion = "0.1.0";

using Matrix = Eigen::MatrixXd;  // column-major; atoms are contiguous columns
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numeric thresholds shared across the library. All tolerances live here so
/// a run can tighten or relax them in one place.
struct Tolerances {
    double norm = 1e-12;            ///< unit-norm / zero-vector detection
    double optimality = 1e-8;       ///< acceptable fixed-point defect of a solution
    double solver = 1e-10;          ///< inner solver stopping tolerance
    double support_cutoff = 1e-9;   ///< |c_j| below this is declared zero
    double boundary_band = 1e-9;    ///< half-width of the oracle-region boundary band
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

enum class ErrorCode {
    ZeroColumn,
    ZeroVector,
    DimensionMismatch,
    DegenerateOracle,
    MaxIterationsExceeded,
    MaxOuterIterationsExceeded,
    SingularSystem,
    OrthogonalPoint,
    LambdaZero,
    LengthMismatch,
    EigenSolverFailure,
    InvalidDims,
    InvalidArgument,
    FileNotFound,
    FormatError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ZeroColumn: return "ZERO_COLUMN";
        case ErrorCode::ZeroVector: return "ZERO_VECTOR";
        case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::DegenerateOracle: return "DEGENERATE_ORACLE";
        case ErrorCode::MaxIterationsExceeded: return "MAX_ITERATIONS_EXCEEDED";
        case ErrorCode::MaxOuterIterationsExceeded: return "MAX_OUTER_ITERATIONS_EXCEEDED";
        case ErrorCode::SingularSystem: return "SINGULAR_SYSTEM";
        case ErrorCode::OrthogonalPoint: return "ORTHOGONAL_POINT";
        case ErrorCode::LambdaZero: return "LAMBDA_ZERO";
        case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
        case ErrorCode::EigenSolverFailure: return "EIGEN_SOLVER_FAILURE";
        case ErrorCode::InvalidDims: return "INVALID_DIMS";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
        case ErrorCode::FormatError: return "FORMAT_ERROR";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, Index index = -1)
        : std::runtime_error(std::move(message)), code_(code), index_(index) {}

    ErrorCode code() const { return code_; }
    /// Offending column/entry index when the error refers to one, else -1.
    Index index() const { return index_; }

private:
    ErrorCode code_;
    Index index_;
};

/// Sorted, deduplicated set of column indices in [0, N).
class IndexSet {
public:
    IndexSet() = default;

    explicit IndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {
        std::sort(indices_.begin(), indices_.end());
        indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    }

    static IndexSet full(Index n) {
        std::vector<Index> v(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
        IndexSet s;
        s.indices_ = std::move(v);  // already sorted unique
        return s;
    }

    Index size() const { return static_cast<Index>(indices_.size()); }
    bool empty() const { return indices_.empty(); }
    Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
    const std::vector<Index>& indices() const { return indices_; }

    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }

    bool contains(Index j) const {
        return std::binary_search(indices_.begin(), indices_.end(), j);
    }

    bool subset_of(const IndexSet& other) const {
        return std::includes(other.indices_.begin(), other.indices_.end(),
                             indices_.begin(), indices_.end());
    }

    IndexSet set_union(const IndexSet& other) const {
        std::vector<Index> out;
        out.reserve(indices_.size() + other.indices_.size());
        std::set_union(indices_.begin(), indices_.end(),
                       other.indices_.begin(), other.indices_.end(),
                       std::back_inserter(out));
        IndexSet s;
        s.indices_ = std::move(out);
        return s;
    }

    bool operator==(const IndexSet& other) const { return indices_ == other.indices_; }

private:
    std::vector<Index> indices_;
};

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite())
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entries");
}

/// Column-normalized atom matrix. Columns have unit l2 norm once `normalized`
/// is set; downstream code assumes this.
struct Dictionary {
    Matrix atoms;
    bool normalized = false;

    Index dim() const { return atoms.rows(); }
    Index size() const { return atoms.cols(); }

    Eigen::Ref<const Vector> atom(Index j) const { return atoms.col(j); }

    /// Submatrix with the columns listed in `set`, in set order.
    Matrix submatrix(const IndexSet& set) const {
        Matrix out(atoms.rows(), set.size());
        for (Index i = 0; i < set.size(); ++i) out.col(i) = atoms.col(set[i]);
        return out;
    }
};

/// Scales every column of `m` to unit l2 norm.
/// Throws ZeroColumn (with the column index) if a column norm is below tol.
inline Dictionary normalize_columns(const Matrix& m,
                                    const Tolerances& tol = default_tolerances()) {
    if (m.rows() < 1) throw Error(ErrorCode::InvalidDims, "matrix needs at least one row");
    require_finite(m, "normalize_columns");
    Matrix out = m;
    for (Index j = 0; j < out.cols(); ++j) {
        const double nrm = out.col(j).norm();
        if (nrm < tol.norm)
            throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " has zero norm", j);
        out.col(j) /= nrm;
    }
    return Dictionary{std::move(out), true};
}

/// Coherence of two vectors: |<v, w>| / (|v| |w|), in [0, 1].
inline double coherence(const Vector& v, const Vector& w,
                        const Tolerances& tol = default_tolerances()) {
    if (v.size() != w.size())
        throw Error(ErrorCode::DimensionMismatch, "coherence: length mismatch");
    const double nv = v.norm();
    const double nw = w.norm();
    if (nv < tol.norm || nw < tol.norm)
        throw Error(ErrorCode::ZeroVector, "coherence: zero vector");
    return std::abs(v.dot(w)) / (nv * nw);
}

/// One elastic net instance: minimize
///   lambda |c|_1 + (1-lambda)/2 |c|_2^2 + gamma/2 |b - A c|_2^2
/// with b unit norm and unit-norm dictionary columns.
struct ElasticNetProblem {
    Vector b;
    Dictionary dict;
    double lambda = 0.5;
    double gamma = 1.0;

    ElasticNetProblem(Vector b_, Dictionary dict_, double lambda_, double gamma_,
                      const Tolerances& tol = default_tolerances())
        : b(std::move(b_)), dict(std::move(dict_)), lambda(lambda_), gamma(gamma_) {
        if (b.size() != dict.dim())
            throw Error(ErrorCode::DimensionMismatch, "problem: b length != dictionary rows");
        if (std::abs(b.norm() - 1.0) > tol.norm * 10 + 1e-9)
            throw Error(ErrorCode::InvalidArgument, "problem: b must have unit norm");
        if (lambda < 0.0 || lambda > 1.0)
            throw Error(ErrorCode::InvalidArgument, "problem: lambda outside [0, 1]");
        if (gamma <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "problem: gamma must be positive");
        if (!dict.normalized)
            throw Error(ErrorCode::InvalidArgument, "problem: dictionary not normalized");
    }

    Index dim() const { return dict.dim(); }
    Index size() const { return dict.size(); }
};

/// Solver output. `oracle_point` is gamma * (b - A c); `support` lists the
/// indices of the nonzero coefficients after the cleanup pass.
struct ElasticNetSolution {
    Vector coefficients;
    IndexSet support;
    Vector oracle_point;
    double objective = 0.0;
    double optimality_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool within_tolerance = false;  // residual <= Tolerances::optimality
};

/// Thrown when an iteration cap is hit; carries the best iterate found.
class MaxIterationsError : public Error {
public:
    MaxIterationsError(ErrorCode code, std::string message, ElasticNetSolution best)
        : Error(code, std::move(message)), best_(std::move(best)) {}

    const ElasticNetSolution& best() const { return best_; }

private:
    ElasticNetSolution best_;
};

}  // namespace ensc
