#include "invset/errors.hpp"
#include "invset/integral_transform.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace invset {
namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

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

// Two nodes with equal weights; K_2 is chosen so the kernel is normalized.
DiscreteKernel pair_kernel(const Matrix& K1) {
    const Eigen::Index m = K1.rows();
    const Matrix K2 = 2.0 * Matrix::Identity(m, m) - K1;
    return DiscreteKernel(static_cast<int>(m), {{"x0", {{0.5, K1}, {0.5, K2}}}});
}

Polygon unit_square() {
    return {{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)}};
}

// Angle subtended at x by the segment [p, q], computed from atan2 of cross and dot products.
double subtended(const Eigen::Vector2d& x, const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    const Eigen::Vector2d a = p - x, b = q - x;
    return std::abs(std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b)));
}

TEST(DiscreteKernel, ValidatesNormalizationAndWeights) {
    EXPECT_THROW(DiscreteKernel(1, {{"x", {{0.5, mat({{1}})}}}}), InvalidArgument);
    EXPECT_THROW(DiscreteKernel(1, {{"x", {{-1.0, mat({{-1}})}}}}), InvalidArgument);
    EXPECT_THROW(DiscreteKernel(1, {{"x", {}}}), InvalidArgument);
    EXPECT_THROW(DiscreteKernel(2, {{"x", {{1.0, mat({{1}})}}}}), InvalidArgument);
    EXPECT_NO_THROW(DiscreteKernel(1, {{"x", {{0.25, mat({{2}})}, {0.5, mat({{1}})}}}}));
}

TEST(ApplyTransform, ConstantsAreReproduced) {
    const auto k = pair_kernel(mat({{1.5, 0.3}, {-0.2, 0.7}}));
    const Vector c = vec({3.25, -1.5});
    EXPECT_LE((apply_transform(k, 0, {c, c}) - c).norm(), 1e-10);
}

TEST(ApplyTransform, ScalarMultipleOfIdentityIsConvexCombination) {
    const DiscreteKernel k(2, {{"x", {{0.2, 2.0 * Matrix::Identity(2, 2)}, {0.4, 1.5 * Matrix::Identity(2, 2)}}}});
    const Vector u1 = vec({0, 1}), u2 = vec({2, -1});
    const Vector out = apply_transform(k, 0, {u1, u2});
    EXPECT_TRUE(out.isApprox(0.4 * u1 + 0.6 * u2, 1e-15));
}

TEST(ApplyTransform, MissingValuesThrow) {
    const auto k = pair_kernel(Matrix::Identity(2, 2));
    EXPECT_THROW((void)apply_transform(k, 0, {vec({1, 1})}), InvalidArgument);
}

TEST(AveragedKernel, KeepsValuesInTheirRange) {
    const auto k = averaged_kernel([](double x, double y) { return std::exp(-(x - y) * (x - y)) + 0.1; }, 0.0, 2.0, 64,
                                   {0.0, 0.3, 1.0, 1.7, 2.0});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<Vector> values;
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 64; ++i) {
            values.push_back(vec({u(rng)}));
            lo = std::min(lo, values.back()(0));
            hi = std::max(hi, values.back()(0));
        }
        for (std::size_t x = 0; x < k.points().size(); ++x) {
            const double v = apply_transform(k, x, values)(0);
            EXPECT_GE(v, lo - 1e-12);
            EXPECT_LE(v, hi + 1e-12);
        }
    }
}

TEST(KernelInvariance, ScalarKernelsPassEveryBody) {
    const DiscreteKernel k(3, {{"x", {{0.5, 0.4 * Matrix::Identity(3, 3)}, {1.0, 0.8 * Matrix::Identity(3, 3)}}}});
    for (const auto& body : {ConvexBody::ball(Vector::Zero(3), 1.0), ConvexBody::orthant(Vector::Zero(3)),
                             ConvexBody::spherical_cylinder(3, 2, 1.0)}) {
        const auto rep = check_kernel_invariance(k, body);
        EXPECT_TRUE(rep.passed) << body.describe();
        for (const auto& e : rep.g_table) EXPECT_GE(e.g, 0.0);
    }
}

TEST(KernelInvariance, UpperTriangularPassesHalfPlaneOnly) {
    const auto k = pair_kernel(mat({{1.2, 0.7}, {0.0, 0.9}}));
    const auto half_plane = ConvexBody::polyhedral_angle(2, {1}, {0.3});
    const auto rep = check_kernel_invariance(k, half_plane);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.normals.size(), 1u);
    EXPECT_FALSE(check_kernel_invariance(k, ConvexBody::ball(Vector::Zero(2), 1.0)).passed);
}

TEST(KernelInvariance, ResidualsAreOrthogonalToTheirNormals) {
    const auto k = pair_kernel(mat({{1.2, 0.7}, {-0.4, 0.9}}));
    const auto rep = check_kernel_invariance(k, ConvexBody::ball(Vector::Zero(2), 1.0), 32);
    ASSERT_FALSE(rep.passed);
    for (const auto& f : rep.failures) {
        EXPECT_LE(std::abs(f.residual.dot(f.normal)), 1e-12);
        const Matrix& K = k.point(f.x_index).nodes[f.node_index].K;
        EXPECT_TRUE((f.g * f.normal + f.residual).isApprox(K.transpose() * f.normal, 1e-12));
    }
}

TEST(KernelInvariance, NegativeScalarWeightFails) {
    const DiscreteKernel k(1, {{"x", {{1.0, mat({{2}})}, {1.0, mat({{-1}})}}}});
    const auto body = ConvexBody::polyhedral_cylinder(1, {0}, {0.0}, {1.0});
    const auto rep = check_kernel_invariance(k, body);
    ASSERT_FALSE(rep.passed);
    for (const auto& f : rep.failures) {
        EXPECT_TRUE(f.negative_g);
        EXPECT_EQ(f.node_index, 1u);
    }
}

TEST(BuildWitness, LeavesTheBallForSmallAlpha) {
    const auto k = pair_kernel(mat({{1.0, 0.6}, {-0.6, 1.0}}));
    const auto ball = ConvexBody::ball(Vector::Zero(2), 1.0);
    const auto rep = check_kernel_invariance(k, ball, 16);
    ASSERT_FALSE(rep.failures.empty());
    const auto& f = rep.failures.front();
    const Vector a = *smooth_boundary_point(ball, f.normal);
    const Witness w = build_witness(k, ball, f.x_index, a, f.normal);
    for (const auto& u : w.values) EXPECT_LE(violation_margin(ball, u), 1e-12);
    EXPECT_GT(w.image_margin, 0.0);
    EXPECT_NEAR(w.image_margin, violation_margin(ball, apply_transform(k, f.x_index, w.values)), 1e-14);
    EXPECT_FALSE(w.from_negative_g);
}

TEST(BuildWitness, NegativeWeightConstruction) {
    const DiscreteKernel k(1, {{"x", {{1.0, mat({{2}})}, {1.0, mat({{-1}})}}}});
    const auto body = ConvexBody::polyhedral_cylinder(1, {0}, {0.0}, {1.0});
    const Vector nu = vec({1});
    const Witness w = build_witness(k, body, 0, vec({1}), nu);
    EXPECT_TRUE(w.from_negative_g);
    for (const auto& u : w.values) EXPECT_LE(violation_margin(body, u), 1e-12);
    EXPECT_GT(w.image_margin, 0.0);
}

TEST(BuildWitness, RefusesPassingKernel) {
    const auto k = pair_kernel(0.5 * Matrix::Identity(2, 2));
    const auto ball = ConvexBody::ball(Vector::Zero(2), 1.0);
    EXPECT_THROW((void)build_witness(k, ball, 0, vec({1, 0}), vec({1, 0})), InvalidArgument);
}

TEST(DoubleLayer, SquareCenterHasFourEqualWeights) {
    const auto k = double_layer_kernel(unit_square(), {Eigen::Vector2d(0.5, 0.5)});
    const auto& nodes = k.point(0).nodes;
    ASSERT_EQ(nodes.size(), 4u);
    for (const auto& n : nodes) EXPECT_NEAR(n.weight, 0.25, 1e-15);
}

TEST(DoubleLayer, WeightsMatchSubtendedAnglesAndSumToOne) {
    const Polygon poly{{Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), Eigen::Vector2d(4, 2), Eigen::Vector2d(1, 3)}};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Eigen::Vector2d> xs;
    for (int i = 0; i < 20; ++i) {
        const double s = u(rng), t = u(rng);
        xs.push_back((1 - t) * ((1 - s) * poly.vertices[0] + s * poly.vertices[1]) +
                     t * ((1 - s) * poly.vertices[3] + s * poly.vertices[2]));
    }
    const int refinement = 2;
    const auto k = double_layer_kernel(poly, xs, refinement);
    const int per_edge = 1 << refinement;
    for (std::size_t x = 0; x < xs.size(); ++x) {
        double total = 0.0;
        const auto& nodes = k.point(x).nodes;
        ASSERT_EQ(nodes.size(), 4u * per_edge);
        for (std::size_t e = 0; e < 4; ++e) {
            const Eigen::Vector2d p = poly.vertices[e], q = poly.vertices[(e + 1) % 4];
            for (int s = 0; s < per_edge; ++s) {
                const Eigen::Vector2d a = p + (q - p) * (static_cast<double>(s) / per_edge);
                const Eigen::Vector2d b = p + (q - p) * (static_cast<double>(s + 1) / per_edge);
                const double expected = subtended(xs[x], a, b) / (2.0 * std::numbers::pi);
                EXPECT_NEAR(nodes[e * per_edge + static_cast<std::size_t>(s)].weight, expected, 1e-14);
            }
        }
        for (const auto& n : nodes) total += n.weight;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(DoubleLayer, UnitIntervalIsInvariant) {
    const auto nodes = double_layer_nodes(unit_square(), 3);
    const auto k = double_layer_kernel(unit_square(), {Eigen::Vector2d(0.2, 0.7), Eigen::Vector2d(0.9, 0.1)}, 3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const double a = u(rng) * 10, b = u(rng) * 10;
        std::vector<Vector> values;
        for (const auto& y : nodes) values.push_back(vec({0.5 + 0.5 * std::sin(a * y.x() + b * y.y())}));
        for (std::size_t x = 0; x < 2; ++x) {
            const double v = apply_transform(k, x, values)(0);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(DoubleLayer, BoundaryPointThrows) {
    EXPECT_THROW((void)double_layer_kernel(unit_square(), {Eigen::Vector2d(0.5, 0.0)}), InvalidArgument);
    EXPECT_THROW((void)double_layer_kernel(unit_square(), {Eigen::Vector2d(1.5, 0.5)}), InvalidArgument);
}

}  // namespace
}  // namespace invset
