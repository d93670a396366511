#include "ensc/core.hpp"
#include "ensc/io.hpp"
#include "ensc/rng.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace ensc;

TEST(NormalizeColumns, IdentityUnchanged) {
    const Matrix id = Matrix::Identity(3, 3);
    const Dictionary d = normalize_columns(id);
    EXPECT_TRUE(d.normalized);
    EXPECT_TRUE(d.atoms.isApprox(id, 0.0));
}

TEST(NormalizeColumns, ThreeFourColumn) {
    Matrix m(2, 1);
    m << 3.0, 4.0;
    const Dictionary d = normalize_columns(m);
    EXPECT_DOUBLE_EQ(d.atoms(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(d.atoms(1, 0), 0.8);
}

TEST(NormalizeColumns, ZeroColumnRejected) {
    Matrix m = Matrix::Zero(3, 2);
    m(0, 0) = 1.0;
    try {
        normalize_columns(m);
        FAIL() << "expected ZeroColumn";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroColumn);
        EXPECT_EQ(e.index(), 1);
    }
}

TEST(NormalizeColumns, Idempotent) {
    Rng rng(7);
    Matrix m(5, 8);
    for (Index j = 0; j < m.cols(); ++j) m.col(j) = 3.7 * rng.normal_vector(5);
    const Dictionary once = normalize_columns(m);
    const Dictionary twice = normalize_columns(once.atoms);
    EXPECT_LE((once.atoms - twice.atoms).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Coherence, Examples) {
    Vector e1(2), e2(2), diag(2);
    e1 << 1, 0;
    e2 << 0, 1;
    diag << 1, 1;
    EXPECT_DOUBLE_EQ(coherence(e1, e1), 1.0);
    EXPECT_DOUBLE_EQ(coherence(e1, e2), 0.0);
    EXPECT_NEAR(coherence(e1, diag), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Coherence, ZeroVectorRejected) {
    Vector v(2), z = Vector::Zero(2);
    v << 1, 0;
    EXPECT_THROW(coherence(v, z), Error);
}

TEST(Coherence, SymmetricAndScaleInvariant) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector v = rng.normal_vector(6);
        const Vector w = rng.normal_vector(6);
        const double alpha = rng.uniform(-5.0, 5.0);
        const double beta = rng.uniform(0.1, 9.0);
        if (std::abs(alpha) < 1e-3) continue;
        const double base = coherence(v, w);
        EXPECT_NEAR(base, coherence(w, v), 1e-12);
        EXPECT_NEAR(base, coherence(Vector(alpha * v), Vector(beta * w)), 1e-12);
    }
}

TEST(IndexSet, Basics) {
    const IndexSet s(std::vector<Index>{4, 1, 4, 2});
    EXPECT_EQ(s.size(), 3);
    EXPECT_TRUE(s.contains(2));
    EXPECT_FALSE(s.contains(3));
    const IndexSet t(std::vector<Index>{1, 2, 4, 9});
    EXPECT_TRUE(s.subset_of(t));
    EXPECT_FALSE(t.subset_of(s));
    EXPECT_EQ(s.set_union(t).size(), 4);
    EXPECT_EQ(IndexSet::full(3), IndexSet(std::vector<Index>{0, 1, 2}));
}

TEST(ProblemValidation, RejectsBadInputs) {
    const Dictionary d = normalize_columns(Matrix::Identity(3, 3));
    Vector b(3);
    b << 1, 0, 0;
    EXPECT_NO_THROW(ElasticNetProblem(b, d, 0.5, 1.0));
    EXPECT_THROW(ElasticNetProblem(2 * b, d, 0.5, 1.0), Error);
    EXPECT_THROW(ElasticNetProblem(b, d, 1.5, 1.0), Error);
    EXPECT_THROW(ElasticNetProblem(b, d, 0.5, 0.0), Error);
    EXPECT_THROW(ElasticNetProblem(b, d, -0.1, 1.0), Error);
}

class MatrixIo : public ::testing::Test {
protected:
    std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "ensc_io_test";
    void SetUp() override { std::filesystem::create_directories(dir_); }
    void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(MatrixIo, BinaryRoundTripIsBitExact) {
    Rng rng(3);
    Matrix m(4, 6);
    for (Index j = 0; j < m.cols(); ++j) m.col(j) = rng.normal_vector(4);
    const auto path = dir_ / "m.bin";
    io::save_matrix_binary(path, m);
    const Matrix back = io::load_matrix_binary(path);
    EXPECT_TRUE(back.isApprox(m, 0.0));

    // header layout: magic, u32 rows, u32 cols little-endian
    std::ifstream in(path, std::ios::binary);
    char head[16];
    in.read(head, 16);
    EXPECT_EQ(std::string(head, 8), "ENSCMAT1");
    EXPECT_EQ(static_cast<unsigned char>(head[8]), 4u);
    EXPECT_EQ(static_cast<unsigned char>(head[12]), 6u);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 8u * 4u * 6u);
}

TEST_F(MatrixIo, CsvRoundTripAndOptionalHeader) {
    Matrix m(2, 3);
    m << 1.5, -2.25, 3.0, 0.0, 42.0, -1e-3;
    const auto path = dir_ / "m.csv";
    io::save_matrix_csv(path, m);
    EXPECT_TRUE(io::load_matrix_csv(path).isApprox(m, 0.0));

    const auto with_header = dir_ / "h.csv";
    {
        std::ofstream out(with_header);
        out << "a,b,c\n1,2,3\n4,5,6\n";
    }
    const Matrix parsed = io::load_matrix_csv(with_header);
    EXPECT_EQ(parsed.rows(), 2);
    EXPECT_EQ(parsed(1, 2), 6.0);
}

TEST_F(MatrixIo, MissingFileThrows) {
    try {
        io::load_matrix(dir_ / "nope.bin");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
    }
}

TEST_F(MatrixIo, SniffsFormat) {
    Matrix m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    io::save_matrix_binary(dir_ / "a.dat", m);
    io::save_matrix_csv(dir_ / "a.csv", m);
    EXPECT_TRUE(io::load_matrix(dir_ / "a.dat").isApprox(m, 0.0));
    EXPECT_TRUE(io::load_matrix(dir_ / "a.csv").isApprox(m, 0.0));
}
