#include "invset/convex_body.hpp"
#include "invset/elliptic_fd.hpp"
#include "invset/halfspace_fourier.hpp"
#include "invset/matrix_structure.hpp"
#include "invset/system_conditions.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

using namespace invset;

SystemCoefficients coupled(double eps) {
    Matrix E21 = Matrix::Zero(2, 2);
    E21(1, 0) = eps;
    return SystemCoefficients::constant(2, 2, {Matrix::Identity(2, 2), E21, Matrix::Identity(2, 2)});
}

void BM_EllipticityScan(benchmark::State& state) {
    const auto c = coupled(0.3);
    const std::vector<Vector> xs{Vector::Zero(2)};
    for (auto _ : state) benchmark::DoNotOptimize(ellipticity_constant(c, xs, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_EllipticityScan)->Arg(64)->Arg(512);

void BM_DetectFactorization(benchmark::State& state) {
    const auto c = coupled(0.3);
    for (auto _ : state) benchmark::DoNotOptimize(detect_factorization(c).column_rank_ratio);
}
BENCHMARK(BM_DetectFactorization);

void BM_BoxSolve(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    const BoxGrid g = BoxGrid::cube(2, 0, 1, nodes);
    const auto c = coupled(0.3);
    const auto body = ConvexBody::orthant(Vector::Zero(2));
    std::mt19937_64 rng(1);
    const GridField bc = random_box_boundary(g, body, rng);
    const SolverConfig lu{SolverKind::SparseLU, 1e-12, 1};
    for (auto _ : state) benchmark::DoNotOptimize(solve_linear(assemble_linear(c, g, bc), lu).field.max_abs());
}
BENCHMARK(BM_BoxSolve)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_BoxSolverReuse(benchmark::State& state) {
    const BoxGrid g = BoxGrid::cube(2, 0, 1, 65);
    const BoxSolver solver(coupled(0.3), g);
    std::mt19937_64 rng(1);
    const GridField bc = random_box_boundary(g, ConvexBody::orthant(Vector::Zero(2)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(bc).max_abs());
}
BENCHMARK(BM_BoxSolverReuse)->Unit(benchmark::kMillisecond);

void BM_HalfspaceSolve(benchmark::State& state) {
    const TangentialGrid g(1, 2 * 3.14159265358979323846, static_cast<int>(state.range(0)));
    const HalfSpaceSolver solver(coupled(0.3), g, {0.1, 0.5, 2.0});
    std::mt19937_64 rng(1);
    const PeriodicField f = random_periodic_data(g, ConvexBody::orthant(Vector::Zero(2)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(f).size());
}
BENCHMARK(BM_HalfspaceSolve)->Arg(256)->Arg(1024);

void BM_HalfspaceSetup(benchmark::State& state) {
    const TangentialGrid g(1, 2 * 3.14159265358979323846, 256);
    for (auto _ : state) {
        const HalfSpaceSolver solver(coupled(0.3), g, {0.1, 0.5, 2.0});
        benchmark::DoNotOptimize(solver.min_abs_real());
    }
}
BENCHMARK(BM_HalfspaceSetup)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
