#include "ensc/theory.hpp"
#include "ensc/rng.hpp"
#include "ensc/synth.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ensc;
using namespace ensc::theory;

namespace {

// The 3 x 4 counterexample data; columns and the query point get renormalized.
struct RemarkData {
    Vector x;
    Dictionary dict;
    RemarkData() {
        Matrix m(3, 4);
        m << -0.55, -0.82, -0.05, 0.22,
              0.22,  0.57,  0.84, 0.78,
             -0.80,  0.00,  0.55, 0.58;
        dict = normalize_columns(m);
        x = Vector(3);
        x << 0.22, 0.72, 0.66;
        x /= x.norm();
    }
};

}  // namespace

TEST(OracleDiagnosticsTest, RemarkRatioIsNotMonotoneInLambda) {
    const RemarkData data;
    const auto d88 = oracle_diagnostics(data.x, data.dict, 0.88, 10.0);
    const auto d95 = oracle_diagnostics(data.x, data.dict, 0.95, 10.0);
    EXPECT_GT(d88.ratio, d95.ratio);
    // values cross-checked against an interior-point solve of the same instance
    EXPECT_NEAR(d88.ratio, 0.767116, 1e-4);
    EXPECT_NEAR(d95.ratio, 0.749658, 1e-4);
}

TEST(OracleDiagnosticsTest, SingleAtomClosedForm) {
    // one in-subspace atom equal to x: delta = gamma (1 - c*) x with
    // c* = T_lambda(gamma) / (1 - lambda + gamma), and kappa = 1
    Vector x(3);
    x << 0.6, 0.0, 0.8;
    const double lambda = 0.5, gamma = 10.0;
    const auto diag = oracle_diagnostics(x, normalize_columns(Matrix(x)), lambda, gamma);
    const double c_star = (gamma - lambda) / (1.0 - lambda + gamma);
    EXPECT_NEAR(diag.kappa, 1.0, 1e-9);
    EXPECT_NEAR(diag.delta_norm, gamma * (1.0 - c_star), 1e-8);
    EXPECT_NEAR(diag.ratio, lambda / (gamma * (1.0 - c_star)), 1e-7);
    EXPECT_NEAR(diag.bound_rhs, 1.0 / (1.0 + (1.0 - lambda) / lambda), 1e-12);
}

TEST(OracleDiagnosticsTest, LemmaC2BoundHolds) {
    for (double lambda : {0.1, 0.5, 0.9, 1.0}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto dict = synth::random_unit_sphere(10, 40, 6000 + seed);
            Rng rng(derive_seed(seed, 55));
            const Vector b = rng.unit_vector(10);
            const auto diag =
                oracle_diagnostics(b, dict, lambda, 5.0 + static_cast<double>(seed % 5) * 10.0);
            EXPECT_LE(diag.delta_norm, diag.delta_bound + 1e-8)
                << "lambda " << lambda << " seed " << seed;
        }
    }
}

TEST(CheckTheorem2, LambdaZeroConvention) {
    OracleDiagnostics diag;
    diag.lambda = 0.0;
    diag.ratio = 0.0;
    EXPECT_TRUE(check_theorem2(diag, 0.9));  // RHS defined as zero
    EXPECT_DOUBLE_EQ(subspace_preserving_rhs(0.9, 0.0), 0.0);
}

TEST(CheckTheorem2, PlantedCrossPolytopeInradius) {
    // in-subspace atoms +-e_1..+-e_d (lifted): symmetrized hull is the l1
    // ball, whose inradius is exactly 1/sqrt(d)
    const Index d_sub = 4;
    const Index d_amb = 9;
    Rng rng(71);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix u = [&] {
            Matrix g(d_amb, d_sub);
            for (Index j = 0; j < d_sub; ++j) g.col(j) = rng.normal_vector(d_amb);
            return Matrix(Eigen::HouseholderQR<Matrix>(g).householderQ() *
                          Matrix::Identity(d_amb, d_sub));
        }();
        Matrix atoms(d_amb, 2 * d_sub);
        for (Index i = 0; i < d_sub; ++i) {
            atoms.col(2 * i) = u.col(i);
            atoms.col(2 * i + 1) = -u.col(i);
        }
        const Vector x = u * rng.unit_vector(d_sub);
        const double lambda = 0.3 + 0.65 * static_cast<double>(seed) / 10.0;
        const auto diag =
            oracle_diagnostics(x, Dictionary{atoms, true}, lambda, 20.0);
        EXPECT_TRUE(check_theorem2(diag, 1.0 / std::sqrt(static_cast<double>(d_sub))))
            << "seed " << seed;
    }
}

TEST(InradiusMonteCarlo, UpperBoundsThePlantedValue) {
    // sampling directions can only overshoot the true minimum
    const Index d = 3;
    Matrix atoms(d, 2 * d);
    for (Index i = 0; i < d; ++i) {
        atoms.col(2 * i) = Vector::Unit(d, i);
        atoms.col(2 * i + 1) = -Vector::Unit(d, i);
    }
    const double exact = 1.0 / std::sqrt(static_cast<double>(d));
    const double proxy = inradius_monte_carlo(Dictionary{atoms, true}, 10000, 3);
    EXPECT_GE(proxy, exact - 1e-12);
    EXPECT_LE(proxy, exact + 0.05);  // dense sampling lands close in low dimension
}

TEST(InradiusMonteCarlo, SamplesWithinTheSpan) {
    // atoms spanning a 2-plane inside R^5; directions outside the span would
    // drive the proxy to zero
    Rng rng(91);
    Matrix g(5, 2);
    g.col(0) = rng.normal_vector(5);
    g.col(1) = rng.normal_vector(5);
    const Matrix u = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(5, 2);
    Matrix atoms(5, 4);
    atoms.col(0) = u.col(0);
    atoms.col(1) = -u.col(0);
    atoms.col(2) = u.col(1);
    atoms.col(3) = -u.col(1);
    const double proxy = inradius_monte_carlo(Dictionary{atoms, true}, 5000, 5);
    EXPECT_NEAR(proxy, 1.0 / std::sqrt(2.0), 0.05);
}

TEST(CheckTheorem4, VacuousAndOrthogonalCases) {
    Vector x(4);
    x << 1, 0, 0, 0;
    Matrix same(4, 2);
    same.col(0) << 0.8, 0.6, 0.0, 0.0;
    same.col(1) << 0.8, -0.6, 0.0, 0.0;
    const auto diag = oracle_diagnostics(x, Dictionary{same, true}, 0.7, 15.0);

    Dictionary empty{Matrix(4, 0), true};
    EXPECT_TRUE(check_theorem4(diag, empty));

    // out-of-subspace atoms orthogonal to delta: LHS is 0
    Matrix out(4, 2);
    out.col(0) << 0, 0, 1, 0;
    out.col(1) << 0, 0, 0, 1;
    EXPECT_LE(std::abs(diag.delta.tail(2).cwiseAbs().maxCoeff()), 1e-12);
    EXPECT_TRUE(check_theorem4(diag, Dictionary{out, true}));
    EXPECT_TRUE(check_theorem4(diag, Dictionary{out, true}, /*strict=*/true));
}

TEST(SubspacePreservingRate, CountingRules) {
    SelfExpressiveModel model;
    model.coefficients = Matrix::Zero(6, 6);
    const std::vector<int> truth{0, 0, 0, 1, 1, 1};
    // block-diagonal pattern: 100%
    model.coefficients(1, 0) = 0.5;
    model.coefficients(0, 1) = 0.5;
    model.coefficients(2, 1) = 0.1;
    model.coefficients(4, 3) = 0.2;
    model.coefficients(3, 4) = 0.2;
    model.coefficients(5, 4) = 0.2;
    model.coefficients(4, 5) = 0.7;
    model.coefficients(2, 0) = 0.3;
    model.coefficients(1, 2) = 0.3;
    model.coefficients(5, 3) = 0.4;
    EXPECT_DOUBLE_EQ(subspace_preserving_rate(model, truth), 100.0);

    // one column with a single cross-subspace entry: 5/6
    model.coefficients(3, 2) = 0.05;
    EXPECT_NEAR(subspace_preserving_rate(model, truth), 100.0 * 5.0 / 6.0, 1e-12);

    // empty columns excluded by default, reported through the out parameter
    model.coefficients.col(5).setZero();
    Index empties = 0;
    const double rate = subspace_preserving_rate(model, truth, false, &empties);
    EXPECT_EQ(empties, 1);
    EXPECT_NEAR(rate, 100.0 * 4.0 / 5.0, 1e-12);
    const double rate_inclusive = subspace_preserving_rate(model, truth, true);
    EXPECT_NEAR(rate_inclusive, 100.0 * 5.0 / 6.0, 1e-12);
}

TEST(PhaseGrid, SingleCellShapeAndBounds) {
    PhaseGridConfig cfg;
    cfg.n_points_list = {100};
    cfg.lambda_list = {0.99};
    cfg.seeds = 1;
    cfg.master_seed = 7;
    const auto result = phase_grid(cfg);
    ASSERT_EQ(result.cells.size(), 1u);
    const auto& cell = result.cells.front();
    EXPECT_GE(cell.experimental_pct, 0.0);
    EXPECT_LE(cell.experimental_pct, 100.0);
    EXPECT_GE(cell.predicted_pct, 0.0);
    EXPECT_LE(cell.predicted_pct, 100.0);
    EXPECT_LE(cell.predicted_pct, cell.experimental_pct + 2.0);
    EXPECT_EQ(cell.sufficiency_violations, 0);
}

TEST(PhaseGrid, SmallGridOrderingAndSufficiency) {
    PhaseGridConfig cfg;
    cfg.n_points_list = {200, 400};
    cfg.lambda_list = {0.99, 0.60};
    cfg.seeds = 2;
    cfg.master_seed = 11;
    const auto result = phase_grid(cfg);
    ASSERT_EQ(result.cells.size(), 4u);
    for (const auto& cell : result.cells) {
        EXPECT_LE(cell.predicted_pct, cell.experimental_pct + 2.0)
            << "N " << cell.n_points << " lambda " << cell.lambda;
        EXPECT_EQ(cell.sufficiency_violations, 0);
    }
    // predicted rate ordering matches the lambda ordering, per-N
    for (int i = 0; i < 2; ++i)
        EXPECT_GE(result.cells[static_cast<std::size_t>(i)].predicted_pct,
                  result.cells[static_cast<std::size_t>(i + 2)].predicted_pct);
    std::ostringstream out;
    result.write_csv(out);
    const std::string csv = out.str();
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
