#pragma once

#include "invset/coefficients.hpp"
#include "invset/convex_body.hpp"
#include "invset/linalg.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace invset {

/// Uniform tensor grid on the box [lower, upper] in R^n, n in {2, 3}.
///
/// Nodes are numbered lexicographically with axis 0 varying fastest.
class BoxGrid {
public:
    BoxGrid(Vector lower, Vector upper, std::vector<int> nodes);
    /// Square/cube [lo, hi]^n with `nodes` points per axis.
    static BoxGrid cube(int n, double lo, double hi, int nodes);

    [[nodiscard]] int n() const noexcept { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] int nodes(int axis) const { return nodes_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] double spacing(int axis) const { return spacing_(axis); }
    [[nodiscard]] double max_spacing() const { return spacing_.maxCoeff(); }
    [[nodiscard]] const Vector& lower() const noexcept { return lower_; }
    [[nodiscard]] const Vector& upper() const noexcept { return upper_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }

    [[nodiscard]] std::vector<int> multi_index(std::size_t node) const;
    [[nodiscard]] std::size_t flat_index(const std::vector<int>& idx) const;
    [[nodiscard]] Vector coordinate(std::size_t node) const;
    [[nodiscard]] bool is_boundary(std::size_t node) const;
    /// Node reached from `node` by moving `step` cells along `axis`.
    [[nodiscard]] std::size_t shifted(std::size_t node, int axis, int step) const;

private:
    Vector lower_;
    Vector upper_;
    std::vector<int> nodes_;
    Vector spacing_;
    std::size_t size_ = 0;
};

/// One m-vector per grid node, stored node-major with components innermost.
class GridField {
public:
    GridField(BoxGrid grid, int m);
    GridField(BoxGrid grid, int m, Vector values);
    /// Samples `f` at every node.
    static GridField from_function(const BoxGrid& grid, int m, const std::function<Vector(const Vector&)>& f);

    [[nodiscard]] const BoxGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] Vector& values() noexcept { return values_; }
    [[nodiscard]] Vector at(std::size_t node) const { return values_.segment(static_cast<Eigen::Index>(node) * m_, m_); }
    void set(std::size_t node, const Vector& v) { values_.segment(static_cast<Eigen::Index>(node) * m_, m_) = v; }
    [[nodiscard]] double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

private:
    BoxGrid grid_;
    int m_;
    Vector values_;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct LinearProblem {
    BoxGrid grid;
    int m = 1;
    SparseMatrix matrix;
    Vector rhs;
};

/// Central-difference discretization with identity rows pinned to the boundary data.
///
/// `forcing`, when given, is the right-hand side F of L u = F at interior nodes.
[[nodiscard]] LinearProblem assemble_linear(const SystemCoefficients& coeffs, const BoxGrid& grid,
                                            const GridField& boundary, const GridField* forcing = nullptr);

enum class SolverKind { BiCGSTAB, SparseLU };

struct SolverConfig {
    SolverKind kind = SolverKind::BiCGSTAB;
    double rtol = 1e-10;
    int max_iterations = 20000;
};

struct PicardConfig {
    double omega = 0.7;
    double ptol = 1e-8;
    int max_iterations = 200;
    SolverConfig linear;
};

struct AuditRecord {
    bool passed = false;
    /// max over interior nodes of violation_margin(u(x))
    double max_margin = 0.0;
    std::size_t worst_node = 0;
    Vector worst_point;
    /// max over interior nodes and sampled normals of (u, nu) - max over boundary nodes of (u, nu)
    double dmp_margin = 0.0;
    double boundary_margin = 0.0;
    double audit_tol = 0.0;
    double h = 0.0;
};

struct SolveReport {
    int iterations = 0;
    double linear_residual = 0.0;
    /// Max-norm of the last Picard update (quasilinear only).
    double picard_residual = 0.0;
    std::vector<double> picard_history;
    std::optional<AuditRecord> audit;
};

struct SolveResult {
    GridField field;
    SolveReport report;
};

[[nodiscard]] SolveResult solve_linear(const LinearProblem& problem, const SolverConfig& config = {});

/// Picard iteration on frozen gradients, starting from the solve with eta = 0.
[[nodiscard]] SolveResult solve_quasilinear(const SystemCoefficients& coeffs, const BoxGrid& grid,
                                            const GridField& boundary, const PicardConfig& config = {});

/// Central-difference gradient at an interior node, eta[s*n + j] = d u_s / d x_j.
[[nodiscard]] Vector discrete_gradient(const GridField& field, std::size_t node);

struct AuditOptions {
    /// audit_tol = tol_factor * ||u||_inf * h^2
    double tol_factor = 10.0;
    std::size_t normal_budget = 64;
    double boundary_tol = kGeomTol;
};

/// Throws InvalidArgument when boundary data leaves the body by more than boundary_tol.
[[nodiscard]] AuditRecord audit_invariance(const GridField& solution, const ConvexBody& body,
                                           const AuditOptions& options = {});

/// Direct solver for one operator and many boundary fields: the matrix is factorized once.
class BoxSolver {
public:
    BoxSolver(const SystemCoefficients& coeffs, const BoxGrid& grid);
    ~BoxSolver();
    BoxSolver(const BoxSolver&) = delete;
    BoxSolver& operator=(const BoxSolver&) = delete;

    [[nodiscard]] GridField solve(const GridField& boundary) const;
    /// Blocks K(x, y) of the discrete solution operator, u(x) = sum over boundary y of K(x, y) f(y);
    /// indexed by node y (zero at interior nodes). `node` must be interior.
    [[nodiscard]] std::vector<Matrix> kernel_row(std::size_t node) const;
    [[nodiscard]] const BoxGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int m() const noexcept { return m_; }

private:
    struct Factor;
    BoxGrid grid_;
    int m_;
    std::unique_ptr<Factor> factor_;
};

struct BoxSearchConfig {
    std::uint64_t seed = 1;
    /// Interior nodes used for residual seeds (the center node first).
    int seed_nodes = 4;
    int candidates = 40;
    int modes = 2;
    /// Total solve budget including the random candidates.
    int max_solves = 600;
    AuditOptions audit;
};

struct BoxSearchResult {
    AuditRecord audit;
    GridField boundary;
    int solves = 0;
    bool exceeds_tolerance = false;
};

/// Residual seeds from the discrete solution kernel, then random trigonometric boundary data
/// greedily amplified until the audit fails or the budget is spent.
[[nodiscard]] BoxSearchResult search_box_counterexample(const SystemCoefficients& coeffs, const BoxGrid& grid,
                                                        const ConvexBody& body, const BoxSearchConfig& config);

/// Random body-valued boundary field (trigonometric in each coordinate, radially pushed into the body).
[[nodiscard]] GridField random_box_boundary(const BoxGrid& grid, const ConvexBody& body, std::mt19937_64& rng,
                                            int modes = 3);

}  // namespace invset
