#pragma once

#include "invset/coefficients.hpp"
#include "invset/convex_body.hpp"
#include "invset/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace invset {

/// Periodic grid on the tangential cell [0, L)^d of the boundary x_n = 0, d = n - 1 in {1, 2}.
///
/// Nodes are numbered with axis 0 varying fastest.
struct TangentialGrid {
    int d = 1;
    double L = 1.0;
    int N = 64;

    TangentialGrid() = default;
    TangentialGrid(int d, double L, int N);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] Vector coordinate(std::size_t node) const;
};

/// One m-vector per tangential node, components innermost.
class PeriodicField {
public:
    PeriodicField(TangentialGrid grid, int m);
    PeriodicField(TangentialGrid grid, int m, Vector values);

    [[nodiscard]] const TangentialGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] Vector& values() noexcept { return values_; }
    [[nodiscard]] Vector at(std::size_t node) const { return values_.segment(static_cast<Eigen::Index>(node) * m_, m_); }
    void set(std::size_t node, const Vector& v) { values_.segment(static_cast<Eigen::Index>(node) * m_, m_) = v; }

private:
    TangentialGrid grid_;
    int m_;
    Vector values_;
};

/// Decaying solutions of one tangential mode xi.
///
/// `exponents` are the m roots with Re < 0 of
/// det(A_nn l^2 + 2i l sum_j A_jn xi_j - sum_{j,k<n} A_jk xi_j xi_k) = 0, sorted by (Re, Im).
/// `basis` spans the boundary values of the decaying solutions and `generator`
/// is the m x m matrix with d/dx_n (basis c) = basis generator c.
struct ModeSolution {
    Vector xi;
    CVector exponents;
    CMatrix basis;
    CMatrix generator;
    /// min |Re l| over all 2m roots.
    double min_abs_real = 0.0;

    /// m x m response matrix mapping boundary values to values at height h.
    [[nodiscard]] CMatrix response(double h) const;
};

struct HalfSpaceOptions {
    /// eps_spec = eps_scale * max(|xi|, 1)
    double eps_scale = 1e-8;
    /// Rejects matching systems with reciprocal condition number below this.
    double matching_rcond = 1e-12;
    /// Multiplier applied to the zero mode; 1 is the bounded solution, other values are fault injection.
    double zero_mode_gain = 1.0;
    std::size_t ellipticity_budget = 128;
};

/// Throws SpectralFailure on a bad stable/unstable split or a singular matching system.
[[nodiscard]] ModeSolution stable_modes(const SystemCoefficients::MatrixList& second_order, int n, const Vector& xi,
                                        const HalfSpaceOptions& options = {});

/// Tangential FFT solver for constant-coefficient systems on R^n_+ = {x_n > 0}.
///
/// The response matrices of all modes at all heights are computed once, so
/// repeated solves cost two FFTs per component and height.
class HalfSpaceSolver {
public:
    HalfSpaceSolver(const SystemCoefficients& coeffs, TangentialGrid grid, std::vector<double> heights,
                    HalfSpaceOptions options = {});

    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] const TangentialGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& heights() const noexcept { return heights_; }
    [[nodiscard]] double delta_estimate() const noexcept { return delta_; }
    [[nodiscard]] double min_abs_real() const noexcept { return min_abs_real_; }

    /// One field per height; `max_imaginary`, if given, receives max |Im| of the inverse transforms.
    [[nodiscard]] std::vector<PeriodicField> solve(const PeriodicField& boundary, double* max_imaginary = nullptr) const;

private:
    int m_;
    TangentialGrid grid_;
    std::vector<double> heights_;
    double delta_ = 0.0;
    double min_abs_real_ = 0.0;
    /// response_[h * modes + k] for mode k and height index h
    std::vector<CMatrix> response_;
};

struct HalfSpaceProblem {
    SystemCoefficients coeffs;
    PeriodicField boundary;
    std::vector<double> heights;
    HalfSpaceOptions options;
};

struct HalfSpaceSolution {
    std::vector<double> heights;
    std::vector<PeriodicField> fields;
    double max_imaginary = 0.0;
    double delta_estimate = 0.0;
};

[[nodiscard]] HalfSpaceSolution solve_halfspace(const HalfSpaceProblem& problem);

struct HalfSpaceAudit {
    bool passed = false;
    double max_margin = 0.0;
    double tol = 1e-6;
    std::size_t worst_instance = 0;
    std::size_t worst_height = 0;
    std::size_t worst_node = 0;
    double max_imaginary = 0.0;
};

/// Max violation margin over all data instances, heights and tangential nodes.
/// Throws InvalidArgument if some boundary value lies outside the body.
[[nodiscard]] HalfSpaceAudit audit_halfspace_invariance(const HalfSpaceSolver& solver, const ConvexBody& body,
                                                        const std::vector<PeriodicField>& data, double tol = 1e-6);

/// Solves with f = e_i for each basis vector and returns the largest deviation of u from e_i
/// over the heights {0.01, 0.1, 1, 10} and all tangential nodes.
[[nodiscard]] double kernel_normalization_check(const SystemCoefficients& coeffs, int resolution,
                                                const HalfSpaceOptions& options = {});

/// Random trigonometric body-valued periodic data, pushed into the body with a safety factor
/// checked on a 4x oversampled grid so the continuous data stays inside.
[[nodiscard]] PeriodicField random_periodic_data(const TangentialGrid& grid, const ConvexBody& body,
                                                 std::mt19937_64& rng, int modes = 4);

struct HalfSpaceSearchConfig {
    std::uint64_t seed = 1;
    int max_solves = 10000;
    int candidates = 200;
    int modes = 3;
    /// Stop once the margin exceeds this value.
    double target_margin = 1e-3;
};

struct HalfSpaceSearchResult {
    double max_margin = 0.0;
    std::size_t worst_height = 0;
    std::size_t worst_node = 0;
    int solves = 0;
    PeriodicField boundary;
};

/// Random candidates followed by greedy hill climbing on the trigonometric coefficients,
/// maximizing the violation margin of the solution.
[[nodiscard]] HalfSpaceSearchResult search_halfspace_counterexample(const HalfSpaceSolver& solver,
                                                                    const ConvexBody& body,
                                                                    const HalfSpaceSearchConfig& config);

}  // namespace invset
