#include "invset/convex_body.hpp"
#include "invset/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace invset {
namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<ConvexBody> catalogue() {
    const double s = 1.0 / std::sqrt(3.0);
    return {
        ConvexBody::half_space(vec({0, 0, -1}), vec({0, 0, 0.5})),
        ConvexBody::orthant(vec({0, -1, 2})),
        ConvexBody::polyhedral_angle(3, {1, 2}, {0.0, 1.0}),
        ConvexBody::polyhedral_cylinder(3, {2}, {0.0}, {1.0}),
        ConvexBody::polyhedral_cylinder(3, {0, 1, 2}, {-1.0, 0.0, 0.0}, {1.0, 2.0, 0.5}),
        ConvexBody::spherical_cylinder(3, 2, 1.5),
        ConvexBody::polyhedral_cone(vec({0, 0, 0}), {vec({-1, 0, 0}), vec({0, -1, 0}), vec({-s, -s, -s})}),
        ConvexBody::polyhedral_cone(vec({1, 1, 1}),
                                    {vec({-1, 0, 0}), vec({0, -1, 0}), vec({0, 0, -1}), vec({s, s, -s})}),
        ConvexBody::polytope({{vec({1, 0}), vec({1, 0})},
                              {vec({-1, 0}), vec({-1, 0})},
                              {vec({0, 1}), vec({0, 1})},
                              {vec({0, -1}), vec({0, -1})}}),
        ConvexBody::ball(vec({0.5, -0.5, 1}), 2.0),
    };
}

TEST(NormalSamples, OrthantNormalsAreNegatedAxes) {
    const auto body = ConvexBody::orthant(vec({0, 0}));
    const auto ns = normal_samples(body, 10);
    ASSERT_EQ(ns.size(), 2u);
    EXPECT_TRUE(ns[0].normal.isApprox(vec({-1, 0})));
    EXPECT_TRUE(ns[1].normal.isApprox(vec({0, -1})));
    EXPECT_TRUE(ns[0].point.isZero());
    EXPECT_TRUE(ns[1].point.isZero());
}

TEST(NormalSamples, UnitBallNormalEqualsPoint) {
    const auto ns = normal_samples(ConvexBody::ball(Vector::Zero(2), 1.0), 4);
    ASSERT_EQ(ns.size(), 4u);
    for (const auto& bn : ns) {
        EXPECT_NEAR(bn.normal.norm(), 1.0, 1e-12);
        EXPECT_TRUE(bn.point.isApprox(bn.normal, 1e-14));
    }
}

TEST(NormalSamples, SphericalCylinderNormalsLieInTrailingPlane) {
    const auto ns = normal_samples(ConvexBody::spherical_cylinder(3, 2, 2.0), 33);
    ASSERT_EQ(ns.size(), 33u);
    for (const auto& bn : ns) {
        EXPECT_EQ(bn.normal(0), 0.0);
        EXPECT_NEAR(bn.normal.tail(2).norm(), 1.0, 1e-12);
        EXPECT_NEAR(bn.point.tail(2).norm(), 2.0, 1e-12);
    }
}

TEST(NormalSamples, NormalsPointOutward) {
    for (const auto& body : catalogue()) {
        for (const auto& bn : normal_samples(body, 24)) {
            EXPECT_NEAR(bn.normal.norm(), 1.0, kUnitTol) << body.describe();
            EXPECT_TRUE(contains(body, bn.point, 1e-12)) << body.describe();
            for (double t : {2e-9, 1e-6, 0.1, 3.0}) {
                EXPECT_FALSE(contains(body, bn.point + t * bn.normal, 0.0)) << body.describe() << " t=" << t;
            }
        }
    }
}

TEST(NormalSamples, SupportingHalfSpacesContainMembers) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 2.0);
    for (const auto& body : catalogue()) {
        const auto ns = normal_samples(body, 40);
        for (int t = 0; t < 200; ++t) {
            Vector u(body.dim());
            for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = g(rng);
            if (!contains(body, u)) continue;
            for (const auto& bn : ns) EXPECT_LE((u - bn.point).dot(bn.normal), 1e-12) << body.describe();
        }
    }
}

TEST(Contains, Examples) {
    EXPECT_TRUE(contains(ConvexBody::orthant(vec({0, 0})), vec({1, 2}), 0.0));
    EXPECT_FALSE(contains(ConvexBody::ball(Vector::Zero(2), 1.0), vec({0, 1 + 1e-6}), 1e-9));
    const auto layer = ConvexBody::polyhedral_cylinder(3, {2}, {0.0}, {1.0});
    EXPECT_TRUE(contains(layer, vec({5, -7, 0.5}), 0.0));
    EXPECT_FALSE(contains(layer, vec({5, -7, 1.5}), 0.0));
}

TEST(ViolationMargin, Examples) {
    EXPECT_DOUBLE_EQ(violation_margin(ConvexBody::orthant(vec({0, 0})), vec({-0.3, 1})), 0.3);
    EXPECT_DOUBLE_EQ(violation_margin(ConvexBody::ball(Vector::Zero(2), 1.0), vec({2, 0})), 1.0);
    const double alpha = 0.75;
    const auto hs = ConvexBody::half_space(vec({0, -1}), vec({0, alpha}));
    EXPECT_EQ(violation_margin(hs, vec({13.0, alpha})), 0.0);
}

TEST(ViolationMargin, AgreesWithContains) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.5);
    for (const auto& body : catalogue()) {
        for (int t = 0; t < 500; ++t) {
            Vector u(body.dim());
            for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = g(rng);
            const double margin = violation_margin(body, u);
            EXPECT_EQ(contains(body, u, 0.0), margin <= 0.0) << body.describe() << " margin " << margin;
        }
    }
}

TEST(ViolationMargin, ContinuousInU) {
    const auto ball = ConvexBody::ball(vec({0, 0, 0}), 1.0);
    const Vector u = vec({0.3, 0.9, -0.4});
    const Vector d = vec({1e-7, -2e-7, 1e-7});
    EXPECT_LE(std::abs(violation_margin(ball, u + d) - violation_margin(ball, u)), d.norm() + 1e-15);
}

TEST(ConvexBodyFactories, RejectInvalidInput) {
    EXPECT_THROW((void)ConvexBody::half_space(vec({0, 2}), vec({0, 0})), InvalidArgument);
    EXPECT_THROW((void)ConvexBody::polyhedral_cylinder(2, {0}, {1.0}, {1.0}), DegenerateBody);
    EXPECT_THROW((void)ConvexBody::polyhedral_cylinder(2, {0}, {2.0}, {1.0}), DegenerateBody);
    EXPECT_THROW((void)ConvexBody::ball(vec({0, 0}), -1.0), DegenerateBody);
}

TEST(ConvexBodyFactories, DependentConeNormalsNameTheSubset) {
    const double r = 1.0 / std::sqrt(2.0);
    try {
        (void)ConvexBody::polyhedral_cone(vec({0, 0, 0}), {vec({-1, 0, 0}), vec({0, -1, 0}), vec({-r, -r, 0})});
        FAIL() << "expected DegenerateBody";
    } catch (const DegenerateBody& e) {
        EXPECT_NE(std::string(e.what()).find("0"), std::string::npos);
    }
}

TEST(ConvexBodyFactories, ConeSubsetsAreIndependent) {
    const double s = 1.0 / std::sqrt(3.0);
    const std::vector<Vector> normals{vec({-1, 0, 0}), vec({0, -1, 0}), vec({0, 0, -1}), vec({s, s, -s})};
    EXPECT_FALSE(first_dependent_subset(normals).has_value());
    auto bad = normals;
    bad.push_back(vec({-1, 0, 0}));
    const auto subset = first_dependent_subset(bad);
    ASSERT_TRUE(subset.has_value());
    EXPECT_EQ(subset->size(), 3u);
}

TEST(SmoothBoundaryPoint, FacetInteriorAndSphere) {
    const auto box = ConvexBody::polyhedral_cylinder(2, {0, 1}, {0.0, 0.0}, {1.0, 2.0});
    const auto a = smooth_boundary_point(box, vec({0, 1}));
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR((*a)(1), 2.0, 1e-15);
    EXPECT_GT((*a)(0), 0.0);
    EXPECT_LT((*a)(0), 1.0);
    EXPECT_FALSE(smooth_boundary_point(box, vec({1, 1}).normalized()).has_value());

    const auto ball = ConvexBody::ball(vec({1, 1}), 2.0);
    const Vector nu = vec({0.6, 0.8});
    const auto b = smooth_boundary_point(ball, nu);
    ASSERT_TRUE(b.has_value());
    EXPECT_TRUE(b->isApprox(vec({1, 1}) + 2.0 * nu));
}

TEST(BoundaryGraphHeight, BallClosedForm) {
    const auto ball = ConvexBody::ball(Vector::Zero(2), 1.0);
    const Vector nu = vec({0, 1});
    const auto h = boundary_graph_height(ball, nu, nu, 0.6);
    ASSERT_TRUE(h.has_value());
    EXPECT_NEAR(*h, 1.0 - 0.8, 1e-14);
    const auto orthant = ConvexBody::orthant(vec({0, 0}));
    const auto flat = boundary_graph_height(orthant, vec({0, 5}), vec({-1, 0}), 3.0);
    ASSERT_TRUE(flat.has_value());
    EXPECT_EQ(*flat, 0.0);
    // the corner has no unique normal, and a radius reaching past the facet has no closed form
    EXPECT_FALSE(boundary_graph_height(orthant, Vector::Zero(2), vec({-1, 0}), 3.0).has_value());
    EXPECT_FALSE(boundary_graph_height(orthant, vec({0, 1}), vec({-1, 0}), 3.0).has_value());
}

TEST(InteriorPoint, StrictlyInsideEveryCatalogueBody) {
    for (const auto& body : catalogue()) {
        const Vector c = interior_point(body);
        EXPECT_LT(violation_margin(body, c), 0.0) << body.describe();
    }
}

TEST(RadialScale, ReachesTheBoundaryFromInside) {
    const auto ball = ConvexBody::ball(Vector::Zero(2), 1.0);
    const double t = radial_scale_into(ball, Vector::Zero(2), vec({4, 0}));
    EXPECT_NEAR(t, 0.25, 1e-12);
    EXPECT_LE(violation_margin(ball, t * vec({4, 0})), 0.0);
    EXPECT_EQ(radial_scale_into(ball, Vector::Zero(2), vec({0.5, 0})), 1.0);
}

TEST(SampledSmooth, MembershipFromSamples) {
    SampledSmooth s;
    s.dim = 2;
    s.sampler = [](std::size_t budget) {
        std::vector<BoundaryNormal> out;
        for (std::size_t i = 0; i < budget; ++i) {
            const double a = 2.0 * 3.141592653589793 * static_cast<double>(i) / static_cast<double>(budget);
            const Vector nu = vec({std::cos(a), std::sin(a)});
            out.push_back({2.0 * nu, nu});
        }
        return out;
    };
    const auto body = ConvexBody::sampled_smooth(s);
    EXPECT_TRUE(contains(body, vec({1.9, 0})));
    EXPECT_FALSE(contains(body, vec({2.1, 0})));
    EXPECT_EQ(normal_samples(body, 16).size(), 16u);
}

}  // namespace
}  // namespace invset
