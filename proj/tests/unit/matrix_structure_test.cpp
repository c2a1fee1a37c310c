#include "invset/errors.hpp"
#include "invset/matrix_structure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace invset {
namespace {

using MatrixList = SystemCoefficients::MatrixList;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) M(i, j++) = v;
        ++i;
    }
    return M;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

TEST(ClassifyMatrix, DiagonalOnOrthantRecoversEntries) {
    const auto body = ConvexBody::orthant(vec({0, 1, 2}));
    const auto c = classify_matrix(vec({1.5, -2, 7}).asDiagonal().toDenseMatrix(), body);
    ASSERT_TRUE(c.has_value());
    ASSERT_EQ(c->scalars.size(), 3u);
    EXPECT_DOUBLE_EQ(c->scalars[0].scalar, 1.5);
    EXPECT_DOUBLE_EQ(c->scalars[1].scalar, -2.0);
    EXPECT_DOUBLE_EQ(c->scalars[2].scalar, 7.0);
    EXPECT_FALSE(c->sampled);
}

TEST(ClassifyMatrix, SphericalCylinderWithEqualTrailingDiagonal) {
    const Matrix M = mat({{4, -1, 2}, {0, 3, 0}, {0, 0, 3}});
    const auto c = classify_matrix(M, ConvexBody::spherical_cylinder(3, 2, 1.0), kEigenTol, 40);
    ASSERT_TRUE(c.has_value());
    EXPECT_TRUE(c->sampled);
    for (const auto& s : c->scalars) EXPECT_NEAR(s.scalar, 3.0, 1e-12);
    Matrix unequal = M;
    unequal(2, 2) = 3.1;
    EXPECT_FALSE(classify_matrix(unequal, ConvexBody::spherical_cylinder(3, 2, 1.0), kEigenTol, 40).has_value());
}

TEST(ClassifyMatrix, BallAdmitsOnlyScalars) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int m = 2; m <= 4; ++m) {
        const auto ball = ConvexBody::ball(Vector::Zero(m), 1.0);
        for (int t = 0; t < 20; ++t) {
            const Matrix M = Matrix::NullaryExpr(m, m, [&] { return g(rng); });
            EXPECT_FALSE(classify_matrix(M, ball).has_value());
        }
        EXPECT_TRUE(classify_matrix(-2.5 * Matrix::Identity(m, m), ball).has_value());
    }
}

TEST(AdmissibleFamily, CatalogueExamples) {
    EXPECT_EQ(admissible_family(ConvexBody::orthant(vec({1, 2, 3}))).tag, StructureTag::Diagonal);

    const auto angle = admissible_family(ConvexBody::polyhedral_angle(3, {1, 2}, {0.0, 0.0}));
    EXPECT_EQ(angle.tag, StructureTag::RowsZeroedDiagonal);
    EXPECT_EQ(angle.rows, (std::vector<int>{1, 2}));

    const auto cyl = admissible_family(ConvexBody::spherical_cylinder(3, 2, 2.0));
    EXPECT_EQ(cyl.tag, StructureTag::RowsZeroedEqualDiagonal);
    EXPECT_EQ(cyl.rows, (std::vector<int>{1, 2}));

    EXPECT_EQ(admissible_family(ConvexBody::ball(Vector::Zero(3), 1.0)).tag, StructureTag::Scalar);
    const double s = 1.0 / std::sqrt(3.0);
    const auto k3 = admissible_family(
        ConvexBody::polyhedral_cone(Vector::Zero(3), {vec({-1, 0, 0}), vec({0, -1, 0}), vec({-s, -s, -s})}));
    EXPECT_EQ(k3.tag, StructureTag::ConjugatedDiagonal);
    EXPECT_NEAR(std::abs(k3.normals.determinant()), s, 1e-12);
    const auto k4 = admissible_family(ConvexBody::polyhedral_cone(
        Vector::Zero(3), {vec({-1, 0, 0}), vec({0, -1, 0}), vec({0, 0, -1}), vec({s, s, -s})}));
    EXPECT_EQ(k4.tag, StructureTag::Scalar);
}

TEST(AdmissibleFamily, RoundTripAndPerturbation) {
    std::mt19937_64 rng(99);
    const double s = 1.0 / std::sqrt(3.0);
    const std::vector<ConvexBody> bodies{
        ConvexBody::polyhedral_angle(3, {2}, {0.0}),
        ConvexBody::polyhedral_cylinder(3, {0, 2}, {0.0, -1.0}, {1.0, 1.0}),
        ConvexBody::spherical_cylinder(3, 2, 1.0),
        ConvexBody::polyhedral_cone(Vector::Zero(3), {vec({-1, 0, 0}), vec({0, -1, 0}), vec({-s, -s, -s})}),
        ConvexBody::ball(Vector::Zero(3), 1.0),
    };
    for (const auto& body : bodies) {
        const StructureClass cls = admissible_family(body);
        for (int t = 0; t < 20; ++t) {
            const Matrix M = random_member(cls, rng);
            EXPECT_TRUE(classify_matrix(M, body).has_value()) << body.describe();
            const Matrix P = perturb_constrained_entry(cls, M, 1e-3, rng);
            EXPECT_FALSE(classify_matrix(P, body).has_value()) << body.describe();
        }
    }
}

TEST(ConeConjugation, NegativeIdentityGivesTheDiagonal) {
    const Vector d = vec({1, 2, 3});
    const Matrix A = cone_conjugation({vec({-1, 0, 0}), vec({0, -1, 0}), vec({0, 0, -1})}, d);
    EXPECT_TRUE(A.isApprox(Matrix(d.asDiagonal()), 1e-15));
}

TEST(ConeConjugation, TwoDimensionalEigenvectorOracle) {
    const Vector n1 = vec({0, -1});
    const Vector n2 = vec({1, 1}) / std::sqrt(2.0);
    const Matrix A = cone_conjugation({n1, n2}, vec({1, 2}));
    EXPECT_LE((A.transpose() * n1 - 1.0 * n1).norm(), 1e-12);
    EXPECT_LE((A.transpose() * n2 - 2.0 * n2).norm(), 1e-12);
}

TEST(ConeConjugation, ScalarDiagonalIsScalar) {
    const Matrix A = cone_conjugation({vec({0.6, 0.8}), vec({-1, 0})}, vec({2.5, 2.5}));
    EXPECT_TRUE(A.isApprox(2.5 * Matrix::Identity(2, 2), 1e-14));
}

TEST(ConeConjugation, SingularNormalsThrow) {
    EXPECT_THROW((void)cone_conjugation({vec({1, 0}), vec({-1, 0})}, vec({1, 2})), DegenerateBody);
}

TEST(ConstraintSpace, GenericExtraNormalLeavesOnlyScalars) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int m = 2; m <= 4; ++m) {
        std::vector<Vector> normals;
        for (int i = 0; i <= m; ++i) normals.push_back(Vector::NullaryExpr(m, [&] { return g(rng); }).normalized());
        const ConstraintSpace space = left_eigen_constraint_space(normals);
        ASSERT_EQ(space.dimension, 1);
        const Matrix& B = space.basis.front();
        EXPECT_LE((B - B.trace() / m * Matrix::Identity(m, m)).norm(), 1e-10 * B.norm());

        normals.pop_back();
        EXPECT_EQ(left_eigen_constraint_space(normals).dimension, m);
    }
}

TEST(DetectFactorization, DiagonalFamilyExample) {
    const MatrixList second{mat({{1, 1}, {0, 1}}), Matrix::Zero(2, 2), mat({{1, 2}, {0, 2}})};
    const auto f = detect_factorization(SystemCoefficients::constant(2, 2, second));
    ASSERT_EQ(f.kind, FactorizationKind::DiagonalFamily) << f.diagnostic;
    EXPECT_LE(f.residual, 1e-12);
    // columns of b are parallel to (1, 0) and (1, 1)
    EXPECT_NEAR(f.b(1, 0), 0.0, 1e-14);
    EXPECT_NEAR(f.b(0, 1), f.b(1, 1), 1e-14);
    ASSERT_EQ(f.forms.size(), 2u);
    EXPECT_TRUE(f.forms[0].isApprox(mat({{1, 0}, {0, 1}}), 1e-14));
    EXPECT_TRUE(f.forms[1].isApprox(mat({{0.5, 0}, {0, 1}}), 1e-14));
    const MatrixList rebuilt = compose_diagonal_family(f.b, f.forms);
    for (std::size_t p = 0; p < second.size(); ++p) EXPECT_LE((rebuilt[p] - second[p]).norm(), 1e-12);
}

TEST(DetectFactorization, ScalarOperatorRecoversTheMatrix) {
    const Matrix A0 = mat({{2, 1, 0}, {0.5, 3, -1}, {0, 0.2, 1}});
    const Matrix form = mat({{1.5, 0.3}, {0.3, 0.8}});
    const auto f = detect_factorization(SystemCoefficients::constant(2, 3, compose_scalar_operator(A0, form)));
    ASSERT_EQ(f.kind, FactorizationKind::ScalarOperator) << f.diagnostic;
    EXPECT_LE(f.residual, 1e-12);
    const double scale = f.b(0, 0) / A0(0, 0);
    EXPECT_TRUE(f.b.isApprox(scale * A0, 1e-12));
    EXPECT_TRUE(f.forms.front().isApprox(form / form(1, 1), 1e-12));
}

TEST(DetectFactorization, EpsilonCouplingIsNotFactorizable) {
    const double eps = 0.1;
    Matrix E21 = Matrix::Zero(2, 2);
    E21(1, 0) = eps;
    const MatrixList second{Matrix::Identity(2, 2), E21, Matrix::Identity(2, 2)};
    const auto f = detect_factorization(SystemCoefficients::constant(2, 2, second));
    EXPECT_EQ(f.kind, FactorizationKind::None);
    // column 0 stacks (p, 0) entries of A_11, A_12, A_22 as rows p
    Matrix stacked(2, 3);
    stacked << 1, 0, 1, 0, eps, 0;
    const Vector sv = Eigen::JacobiSVD<Matrix>(stacked).singularValues();
    EXPECT_NEAR(f.column_rank_ratio, sv(1) / sv(0), 1e-12);
    EXPECT_NEAR(f.column_rank_ratio, eps / std::sqrt(2.0), 1e-12);
}

TEST(DetectFactorization, GaugeInvariantResidual) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int t = 0; t < 20; ++t) {
        Matrix b = Matrix::Identity(3, 3) + Matrix::NullaryExpr(3, 3, [&] { return u(rng); });
        std::vector<Matrix> forms;
        for (int s = 0; s < 3; ++s) {
            Matrix F = Matrix::NullaryExpr(2, 2, [&] { return u(rng); });
            F = 0.5 * (F + F.transpose()) + Matrix::Identity(2, 2);
            forms.push_back(F);
        }
        const auto f1 = detect_factorization(SystemCoefficients::constant(2, 3, compose_diagonal_family(b, forms)));
        Matrix b2 = b;
        std::vector<Matrix> forms2 = forms;
        for (int s = 0; s < 3; ++s) {
            const double c = 0.5 + s;
            b2.col(s) *= c;
            forms2[static_cast<std::size_t>(s)] /= c;
        }
        const auto f2 = detect_factorization(SystemCoefficients::constant(2, 3, compose_diagonal_family(b2, forms2)));
        ASSERT_EQ(f1.kind, FactorizationKind::DiagonalFamily);
        ASSERT_EQ(f2.kind, FactorizationKind::DiagonalFamily);
        EXPECT_NEAR(f1.residual, f2.residual, 1e-14);
        for (int s = 0; s < 3; ++s) {
            EXPECT_TRUE(f1.forms[static_cast<std::size_t>(s)].isApprox(f2.forms[static_cast<std::size_t>(s)], 1e-12));
        }
    }
}

TEST(DetectFactorization, NonPositiveNormalizingEntryIsRejected) {
    // second column's form has a zero d^2/dx_n^2 coefficient
    const Matrix b = Matrix::Identity(2, 2);
    const auto second = compose_diagonal_family(b, {mat({{1, 0}, {0, 1}}), mat({{1, 0.5}, {0.5, 0}})});
    const auto f = detect_factorization(SystemCoefficients::constant(2, 2, second));
    EXPECT_EQ(f.kind, FactorizationKind::None);
    EXPECT_FALSE(f.diagnostic.empty());
}

}  // namespace
}  // namespace invset
