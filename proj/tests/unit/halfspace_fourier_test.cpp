#include "invset/errors.hpp"
#include "invset/halfspace_fourier.hpp"
#include "invset/matrix_structure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace invset {
namespace {

using MatrixList = SystemCoefficients::MatrixList;
constexpr double kPi = std::numbers::pi;

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

SystemCoefficients laplacian(int n, int m) {
    MatrixList second;
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) second.push_back(j == k ? Matrix(Matrix::Identity(m, m)) : Matrix(Matrix::Zero(m, m)));
    return SystemCoefficients::constant(n, m, second);
}

SystemCoefficients coupled(double eps) {
    Matrix E21 = Matrix::Zero(2, 2);
    E21(1, 0) = eps;
    return SystemCoefficients::constant(2, 2, {Matrix::Identity(2, 2), E21, Matrix::Identity(2, 2)});
}

PeriodicField sample(const TangentialGrid& g, int m, const std::function<Vector(const Vector&)>& f) {
    PeriodicField out(g, m);
    for (std::size_t i = 0; i < g.size(); ++i) out.set(i, f(g.coordinate(i)));
    return out;
}

TEST(TangentialGrid, Validation) {
    EXPECT_NO_THROW(TangentialGrid(1, 2.0, 64));
    EXPECT_NO_THROW(TangentialGrid(2, 2.0, 16));
    EXPECT_THROW(TangentialGrid(1, 2.0, 48), InvalidArgument);
    EXPECT_THROW(TangentialGrid(3, 2.0, 16), InvalidArgument);
    EXPECT_THROW(TangentialGrid(1, -1.0, 16), InvalidArgument);
    const TangentialGrid g(2, 4.0, 8);
    EXPECT_EQ(g.size(), 64u);
    EXPECT_TRUE(g.coordinate(9).isApprox(vec({0.5, 0.5})));
}

TEST(SolveHalfspace, ConstantDataIsReproduced) {
    const TangentialGrid g(1, 3.0, 32);
    const Vector c = vec({0.7, -2.0});
    const auto sol = solve_halfspace({coupled(0.3), sample(g, 2, [&](const Vector&) { return c; }), {0.01, 0.5, 4.0}, {}});
    for (const auto& u : sol.fields) {
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE((u.at(i) - c).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(SolveHalfspace, OddDataVanishesOnTheAxis) {
    const TangentialGrid g(1, 8.0, 128);
    // odd about x = 4 (the cell center), so u(4, h) = 0
    const auto f = sample(g, 1, [](const Vector& x) { return vec({std::sin(kPi * (x(0) - 4.0) / 4.0) * std::exp(-(x(0) - 4) * (x(0) - 4))}); });
    const auto sol = solve_halfspace({laplacian(2, 1), f, {0.1, 0.5, 2.0}, {}});
    for (const auto& u : sol.fields) EXPECT_NEAR(u.at(64)(0), 0.0, 1e-13);
}

TEST(SolveHalfspace, MatchesPeriodicPoissonQuadrature) {
    const double L = 10.0, s = 0.5;
    const auto gauss = [&](double y) {
        double v = 0.0;
        for (int k = -4; k <= 4; ++k) v += std::exp(-std::pow(y - L / 2 - k * L, 2) / (2 * s * s));
        return v;
    };
    const TangentialGrid g(1, L, 256);
    const std::vector<double> heights{0.1, 0.3, 1.0};
    const auto sol = solve_halfspace({laplacian(2, 1), sample(g, 1, [&](const Vector& x) { return vec({gauss(x(0))}); }),
                                      heights, {}});
    EXPECT_LE(sol.max_imaginary, 1e-10);
    // periodized Poisson kernel of the strip of period L, integrated by the trapezoid rule
    const int Q = 8192;
    for (std::size_t h = 0; h < heights.size(); ++h) {
        const double a = 2 * kPi * heights[h] / L;
        for (std::size_t node : {0u, 100u, 128u, 200u}) {
            const double x = g.coordinate(node)(0);
            double u = 0.0;
            for (int q = 0; q < Q; ++q) {
                const double y = L * q / Q;
                u += gauss(y) * std::sinh(a) / (std::cosh(a) - std::cos(2 * kPi * (x - y) / L));
            }
            u /= Q;
            EXPECT_NEAR(sol.fields[h].at(node)(0), u, 1e-6) << "h " << heights[h] << " node " << node;
        }
    }
}

TEST(StableModes, SplitAndScalingCovariance) {
    const auto c = coupled(0.3);
    for (double xi : {0.5, 1.0, 3.0}) {
        const auto a = stable_modes(c.constant_second_order(), 2, vec({xi}));
        const auto b = stable_modes(c.constant_second_order(), 2, vec({2 * xi}));
        ASSERT_EQ(a.exponents.size(), 2);
        EXPECT_GE(a.min_abs_real, 1e-8 * std::max(xi, 1.0));
        for (Eigen::Index r = 0; r < 2; ++r) {
            EXPECT_LT(a.exponents(r).real(), 0.0);
            EXPECT_LE(std::abs(b.exponents(r) - 2.0 * a.exponents(r)), 1e-9 * std::abs(b.exponents(r)));
        }
    }
}

TEST(StableModes, AnisotropicExponentsMatchClosedForm) {
    // scalar operator a u_xx + 2b u_xy + c u_yy: the decaying root is l = (-i b xi - xi sqrt(ac - b^2)) / c
    const double a = 2.0, b = 0.4, cc = 1.5;
    const auto coeffs = SystemCoefficients::constant(2, 1, {mat({{a}}), mat({{b}}), mat({{cc}})});
    const double xi = 1.7;
    const auto modes = stable_modes(coeffs.constant_second_order(), 2, vec({xi}));
    const Complex expected = (Complex(0, -b * xi) - xi * std::sqrt(a * cc - b * b)) / cc;
    EXPECT_LE(std::abs(modes.exponents(0) - expected), 1e-12);
    EXPECT_LE(std::abs(modes.response(0.7)(0, 0) - std::exp(expected * 0.7)), 1e-12);
}

TEST(StableModes, RepeatedExponentsWithJordanChain) {
    // the coupled system has the double exponent -|xi| with a single eigenvector
    const auto c = coupled(0.3);
    const auto modes = stable_modes(c.constant_second_order(), 2, vec({1.0}));
    EXPECT_NEAR(modes.exponents(0).real(), -1.0, 1e-6);
    EXPECT_NEAR(modes.exponents(1).real(), -1.0, 1e-6);
    EXPECT_TRUE(modes.response(0.0).isApprox(CMatrix::Identity(2, 2), 1e-12));
    // d/dh R(h) = B G B^{-1} R(h), G acting on basis coordinates
    const double h = 0.4, d = 1e-5;
    const CMatrix fd = (modes.response(h + d) - modes.response(h - d)) / (2 * d);
    const CMatrix G = modes.basis * modes.generator * modes.basis.inverse();
    EXPECT_LE((fd - G * modes.response(h)).norm(), 1e-8);
}

TEST(HalfSpaceSolver, RejectsNonEllipticAndSampled) {
    const TangentialGrid g(1, 1.0, 16);
    const auto bad = SystemCoefficients::constant(2, 1, {mat({{1}}), mat({{2}}), mat({{1}})});
    EXPECT_THROW(HalfSpaceSolver(bad, g, {1.0}), InvalidArgument);
    const auto sampled = SystemCoefficients::sampled(2, 1, [](const Vector&) {
        return MatrixList{mat({{1}}), mat({{0}}), mat({{1}})};
    });
    EXPECT_THROW(HalfSpaceSolver(sampled, g, {1.0}), InvalidArgument);
    const auto first = SystemCoefficients::constant(2, 1, {mat({{1}}), mat({{0}}), mat({{1}})}, {mat({{1}}), mat({{0}})});
    EXPECT_THROW(HalfSpaceSolver(first, g, {1.0}), InvalidArgument);
    EXPECT_THROW(HalfSpaceSolver(laplacian(2, 1), g, {-1.0}), InvalidArgument);
}

TEST(HalfSpaceSolver, RealDataGivesRealFields) {
    const TangentialGrid g(2, 2 * kPi, 32);
    std::mt19937_64 rng(5);
    const auto data = random_periodic_data(g, ConvexBody::ball(Vector::Zero(2), 1.0), rng);
    const auto c = SystemCoefficients::constant(3, 2, {Matrix::Identity(2, 2), mat({{0, 0.2}, {0, 0}}), Matrix::Zero(2, 2),
                                                       Matrix::Identity(2, 2), mat({{0.1, 0}, {0, -0.1}}), Matrix::Identity(2, 2)});
    const HalfSpaceSolver solver(c, g, {0.1, 1.0});
    double imag = 1.0;
    (void)solver.solve(data, &imag);
    EXPECT_LE(imag, 1e-10);
}

TEST(HalfSpaceSolver, ScalarOperatorFieldSatisfiesTheOperator) {
    // A L u = 0 with A invertible, so each component satisfies L u = 0
    const Matrix form = mat({{1.0, 0.3}, {0.3, 2.0}});
    const auto c = SystemCoefficients::constant(2, 2, compose_scalar_operator(mat({{1, 0.4}, {-0.2, 1.5}}), form));
    const TangentialGrid g(1, 2 * kPi, 256);
    const double dx = 2 * kPi / 256, h0 = 0.5;
    const auto f = sample(g, 2, [](const Vector& x) { return vec({std::cos(x(0)) + 0.3 * std::sin(2 * x(0)), std::sin(x(0))}); });
    const HalfSpaceSolver solver(c, g, {h0 - dx, h0, h0 + dx});
    const auto u = solver.solve(f);
    const auto N = static_cast<std::size_t>(g.N);
    double worst = 0.0;
    for (std::size_t i = 0; i < N; i += 16) {
        const std::size_t ip = (i + 1) % N, im = (i + N - 1) % N;
        const Vector uxx = (u[1].at(ip) - 2 * u[1].at(i) + u[1].at(im)) / (dx * dx);
        const Vector uyy = (u[2].at(i) - 2 * u[1].at(i) + u[0].at(i)) / (dx * dx);
        const Vector uxy = (u[2].at(ip) - u[2].at(im) - u[0].at(ip) + u[0].at(im)) / (4 * dx * dx);
        const Vector Lu = form(0, 0) * uxx + 2 * form(0, 1) * uxy + form(1, 1) * uyy;
        worst = std::max(worst, Lu.cwiseAbs().maxCoeff());
    }
    EXPECT_LE(worst, 10 * dx * dx);
}

TEST(AuditHalfspace, DiagonalFamilyKeepsTheOrthant) {
    const Matrix b = mat({{1.0, 0.2}, {0.1, 0.8}});
    const auto c = SystemCoefficients::constant(2, 2, compose_diagonal_family(b, {mat({{1, 0.2}, {0.2, 1}}), mat({{2, -0.5}, {-0.5, 1}})}));
    const TangentialGrid g(1, 2 * kPi, 128);
    const auto body = ConvexBody::orthant(vec({0, 0}));
    std::mt19937_64 rng(10);
    std::vector<PeriodicField> data;
    for (int t = 0; t < 5; ++t) data.push_back(random_periodic_data(g, body, rng));
    const HalfSpaceSolver solver(c, g, {0.05, 0.2, 1.0});
    const auto a = audit_halfspace_invariance(solver, body, data);
    EXPECT_TRUE(a.passed);
    EXPECT_LE(a.max_margin, 1e-6);
}

TEST(AuditHalfspace, ScalarOperatorKeepsTheBall) {
    const auto c = SystemCoefficients::constant(2, 2, compose_scalar_operator(mat({{1.0, 0.5}, {-0.5, 1.0}}), mat({{1, 0.3}, {0.3, 1}})));
    const TangentialGrid g(1, 2 * kPi, 128);
    const auto ball = ConvexBody::ball(vec({0.5, 0.5}), 1.0);
    std::mt19937_64 rng(12);
    std::vector<PeriodicField> data;
    for (int t = 0; t < 5; ++t) data.push_back(random_periodic_data(g, ball, rng));
    const HalfSpaceSolver solver(c, g, {0.05, 0.2, 1.0});
    EXPECT_LE(audit_halfspace_invariance(solver, ball, data).max_margin, 1e-6);
}

TEST(AuditHalfspace, DataOutsideTheBodyThrows) {
    const TangentialGrid g(1, 1.0, 16);
    const HalfSpaceSolver solver(laplacian(2, 1), g, {1.0});
    const auto f = sample(g, 1, [](const Vector& x) { return vec({x(0) - 0.5}); });
    EXPECT_THROW((void)audit_halfspace_invariance(solver, ConvexBody::orthant(vec({0})), {f}), InvalidArgument);
}

TEST(RandomPeriodicData, StaysInsideTheBody) {
    const TangentialGrid g(2, 1.0, 16);
    const double s = 1.0 / std::sqrt(2.0);
    const auto cone = ConvexBody::polyhedral_cone(vec({0, 0}), {vec({-1, 0}), vec({s, -s})});
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto f = random_periodic_data(g, cone, rng);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(violation_margin(cone, f.at(i)), 0.0);
    }
}

TEST(NormalizationCheck, ExactForEllipticSystems) {
    EXPECT_LE(kernel_normalization_check(laplacian(2, 2), 64), 1e-10);
    EXPECT_LE(kernel_normalization_check(laplacian(3, 3), 16), 1e-10);
    EXPECT_LE(kernel_normalization_check(coupled(0.3), 64), 1e-10);
}

TEST(NormalizationCheck, CorruptedZeroModeIsDetected) {
    HalfSpaceOptions opts;
    opts.zero_mode_gain = 1.1;
    EXPECT_NEAR(kernel_normalization_check(laplacian(2, 2), 64, opts), 0.1, 1e-12);
}

TEST(HalfSpaceSearch, CoupledSystemLeavesTheOrthant) {
    const TangentialGrid g(1, 2 * kPi, 256);
    const HalfSpaceSolver solver(coupled(0.3), g, {0.1, 0.25, 0.5, 1.0, 2.0});
    HalfSpaceSearchConfig cfg;
    cfg.seed = 7;
    const auto r = search_halfspace_counterexample(solver, ConvexBody::orthant(vec({0, 0})), cfg);
    EXPECT_GT(r.max_margin, 1e-3);
    EXPECT_LE(r.solves, cfg.max_solves);
}

}  // namespace
}  // namespace invset
