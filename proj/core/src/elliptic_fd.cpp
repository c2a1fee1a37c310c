#include "invset/elliptic_fd.hpp"

#include "invset/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace invset {

BoxGrid::BoxGrid(Vector lower, Vector upper, std::vector<int> nodes)
    : lower_(std::move(lower)), upper_(std::move(upper)), nodes_(std::move(nodes)) {
    const auto n = nodes_.size();
    if (n != 2 && n != 3) throw InvalidArgument("box grids support n = 2 or n = 3");
    if (static_cast<std::size_t>(lower_.size()) != n || static_cast<std::size_t>(upper_.size()) != n) {
        throw InvalidArgument("box extents must have one entry per axis");
    }
    spacing_.resize(static_cast<Eigen::Index>(n));
    size_ = 1;
    for (std::size_t a = 0; a < n; ++a) {
        const auto i = static_cast<Eigen::Index>(a);
        if (nodes_[a] < 3) throw InvalidArgument("a box grid needs at least 3 nodes per axis");
        if (!(upper_(i) > lower_(i))) throw InvalidArgument("box extents must satisfy lower < upper");
        spacing_(i) = (upper_(i) - lower_(i)) / (nodes_[a] - 1);
        size_ *= static_cast<std::size_t>(nodes_[a]);
    }
}

BoxGrid BoxGrid::cube(int n, double lo, double hi, int nodes) {
    return {Vector::Constant(n, lo), Vector::Constant(n, hi), std::vector<int>(static_cast<std::size_t>(n), nodes)};
}

std::vector<int> BoxGrid::multi_index(std::size_t node) const {
    std::vector<int> idx(nodes_.size());
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
        idx[a] = static_cast<int>(node % static_cast<std::size_t>(nodes_[a]));
        node /= static_cast<std::size_t>(nodes_[a]);
    }
    return idx;
}

std::size_t BoxGrid::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = nodes_.size(); a-- > 0;) flat = flat * static_cast<std::size_t>(nodes_[a]) + static_cast<std::size_t>(idx[a]);
    return flat;
}

Vector BoxGrid::coordinate(std::size_t node) const {
    const auto idx = multi_index(node);
    Vector x(n());
    for (int a = 0; a < n(); ++a) x(a) = lower_(a) + idx[static_cast<std::size_t>(a)] * spacing_(a);
    return x;
}

bool BoxGrid::is_boundary(std::size_t node) const {
    const auto idx = multi_index(node);
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
        if (idx[a] == 0 || idx[a] == nodes_[a] - 1) return true;
    }
    return false;
}

std::size_t BoxGrid::shifted(std::size_t node, int axis, int step) const {
    std::size_t stride = 1;
    for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(nodes_[static_cast<std::size_t>(a)]);
    return step >= 0 ? node + stride * static_cast<std::size_t>(step) : node - stride * static_cast<std::size_t>(-step);
}

GridField::GridField(BoxGrid grid, int m) : grid_(std::move(grid)), m_(m) {
    values_ = Vector::Zero(static_cast<Eigen::Index>(grid_.size()) * m_);
}

GridField::GridField(BoxGrid grid, int m, Vector values) : grid_(std::move(grid)), m_(m), values_(std::move(values)) {
    if (values_.size() != static_cast<Eigen::Index>(grid_.size()) * m_) {
        throw InvalidArgument("grid field has the wrong number of values");
    }
}

GridField GridField::from_function(const BoxGrid& grid, int m, const std::function<Vector(const Vector&)>& f) {
    GridField out(grid, m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vector v = f(grid.coordinate(i));
        if (v.size() != m) throw SamplerFailure("grid function returned a vector of the wrong size");
        out.set(i, v);
    }
    return out;
}

namespace {

using MatrixList = SystemCoefficients::MatrixList;
using CoefficientsAt = std::function<std::pair<MatrixList, MatrixList>(std::size_t node, const Vector& x)>;

std::string node_location(const BoxGrid& grid, std::size_t node) {
    std::ostringstream os;
    os << "node " << node << " (x = " << grid.coordinate(node).transpose() << ")";
    return os.str();
}

SparseMatrix assemble_matrix(const BoxGrid& grid, int m, const CoefficientsAt& coeffs_at) {
    const int n = grid.n();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(grid.size() * static_cast<std::size_t>(m * m) * static_cast<std::size_t>(1 + 2 * n + 2 * n * n));
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const int base = static_cast<int>(node) * m;
        if (grid.is_boundary(node)) {
            for (int p = 0; p < m; ++p) triplets.emplace_back(base + p, base + p, 1.0);
            continue;
        }
        MatrixList second;
        MatrixList first;
        try {
            std::tie(second, first) = coeffs_at(node, grid.coordinate(node));
        } catch (const SamplerFailure& e) {
            throw SamplerFailure(std::string(e.what()) + " at " + node_location(grid, node));
        }
        const auto add = [&](std::size_t col_node, const Matrix& block, double w) {
            const int col = static_cast<int>(col_node) * m;
            for (int p = 0; p < m; ++p) {
                for (int s = 0; s < m; ++s) {
                    if (block(p, s) != 0.0) triplets.emplace_back(base + p, col + s, w * block(p, s));
                }
            }
        };
        for (int j = 0; j < n; ++j) {
            for (int k = j; k < n; ++k) {
                const Matrix& A = second[static_cast<std::size_t>(SystemCoefficients::pair_index(n, j, k))];
                if (j == k) {
                    const double w = 1.0 / (grid.spacing(j) * grid.spacing(j));
                    add(grid.shifted(node, j, 1), A, w);
                    add(grid.shifted(node, j, -1), A, w);
                    add(node, A, -2.0 * w);
                } else {
                    // both orderings (j,k) and (k,j) of the symmetric pair
                    const double w = 2.0 / (4.0 * grid.spacing(j) * grid.spacing(k));
                    add(grid.shifted(grid.shifted(node, j, 1), k, 1), A, w);
                    add(grid.shifted(grid.shifted(node, j, 1), k, -1), A, -w);
                    add(grid.shifted(grid.shifted(node, j, -1), k, 1), A, -w);
                    add(grid.shifted(grid.shifted(node, j, -1), k, -1), A, w);
                }
            }
        }
        for (std::size_t j = 0; j < first.size(); ++j) {
            const int axis = static_cast<int>(j);
            const double w = 1.0 / (2.0 * grid.spacing(axis));
            add(grid.shifted(node, axis, 1), first[j], w);
            add(grid.shifted(node, axis, -1), first[j], -w);
        }
    }
    const auto dofs = static_cast<Eigen::Index>(grid.size()) * m;
    SparseMatrix A(dofs, dofs);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    return A;
}

Vector assemble_rhs(const BoxGrid& grid, int m, const GridField& boundary, const GridField* forcing) {
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(grid.size()) * m);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto seg = static_cast<Eigen::Index>(node) * m;
        if (grid.is_boundary(node)) {
            rhs.segment(seg, m) = boundary.at(node);
        } else if (forcing != nullptr) {
            rhs.segment(seg, m) = forcing->at(node);
        }
    }
    return rhs;
}

void check_field(const GridField& field, const BoxGrid& grid, int m, const char* what) {
    if (field.m() != m || field.grid().size() != grid.size() || field.grid().n() != grid.n()) {
        throw InvalidArgument(std::string(what) + " does not match the grid and system size");
    }
}

CoefficientsAt linear_coefficients(const SystemCoefficients& coeffs) {
    if (coeffs.is_quasilinear()) throw InvalidArgument("quasilinear coefficients need solve_quasilinear");
    if (coeffs.is_constant()) {
        const MatrixList second = coeffs.constant_second_order();
        const MatrixList first = coeffs.has_first_order() ? coeffs.constant_first_order() : MatrixList{};
        return [second, first](std::size_t, const Vector&) { return std::make_pair(second, first); };
    }
    return [&coeffs](std::size_t, const Vector& x) {
        return std::make_pair(coeffs.second_order_at(x),
                              coeffs.has_first_order() ? coeffs.first_order_at(x) : MatrixList{});
    };
}

double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
    const double bn = b.norm();
    return (A * x - b).norm() / (bn > 0.0 ? bn : 1.0);
}

// Trigonometric boundary data: per component, tensor products of {1, cos(k pi t), sin(k pi t)}
// over the coordinates normalized to [0, 1].
struct TrigData {
    int m = 1;
    int n = 2;
    int modes = 3;
    std::vector<double> c;

    [[nodiscard]] int per_axis() const { return 2 * modes + 1; }
    [[nodiscard]] std::size_t per_component() const {
        std::size_t count = 1;
        for (int a = 0; a < n; ++a) count *= static_cast<std::size_t>(per_axis());
        return count;
    }
    // basis function f of one axis: 0 -> 1, 2k-1 -> cos(k pi t), 2k -> sin(k pi t)
    static double axis_function(int f, double t) {
        if (f == 0) return 1.0;
        const int k = (f + 1) / 2;
        return f % 2 == 1 ? std::cos(k * std::numbers::pi * t) : std::sin(k * std::numbers::pi * t);
    }
    [[nodiscard]] double order(std::size_t b) const {
        double total = 0.0;
        for (int a = 0; a < n; ++a) {
            total += static_cast<double>((b % static_cast<std::size_t>(per_axis()) + 1) / 2);
            b /= static_cast<std::size_t>(per_axis());
        }
        return total;
    }

    [[nodiscard]] Vector eval(const Vector& xhat) const {
        const std::size_t count = per_component();
        std::vector<double> phi(count);
        for (std::size_t b = 0; b < count; ++b) {
            double v = 1.0;
            std::size_t rest = b;
            for (int a = 0; a < n; ++a) {
                v *= axis_function(static_cast<int>(rest % static_cast<std::size_t>(per_axis())), xhat(a));
                rest /= static_cast<std::size_t>(per_axis());
            }
            phi[b] = v;
        }
        Vector g(m);
        for (int s = 0; s < m; ++s) {
            const double* p = c.data() + static_cast<std::size_t>(s) * count;
            double v = 0.0;
            for (std::size_t b = 0; b < count; ++b) v += p[b] * phi[b];
            g(s) = v;
        }
        return g;
    }
};

TrigData random_trig(int m, int n, int modes, std::mt19937_64& rng) {
    TrigData d{m, n, modes, {}};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t count = d.per_component();
    d.c.resize(static_cast<std::size_t>(m) * count);
    for (std::size_t i = 0; i < d.c.size(); ++i) d.c[i] = u(rng) / (1.0 + d.order(i % count));
    return d;
}

GridField trig_boundary(const BoxGrid& grid, const ConvexBody& body, const Vector& center, const TrigData& d) {
    GridField out(grid, body.dim());
    std::vector<std::size_t> nodes;
    std::vector<Vector> offsets;
    double t = 1.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (!grid.is_boundary(node)) continue;
        const Vector x = grid.coordinate(node);
        const Vector xhat = (x - grid.lower()).cwiseQuotient(grid.upper() - grid.lower());
        const Vector g = d.eval(xhat);
        t = std::min(t, radial_scale_into(body, center, center + g));
        nodes.push_back(node);
        offsets.push_back(g);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) out.set(nodes[i], center + t * offsets[i]);
    return out;
}

}  // namespace

LinearProblem assemble_linear(const SystemCoefficients& coeffs, const BoxGrid& grid, const GridField& boundary,
                              const GridField* forcing) {
    if (coeffs.n() != grid.n()) throw InvalidArgument("coefficient dimension n does not match the grid");
    check_field(boundary, grid, coeffs.m(), "boundary field");
    if (forcing != nullptr) check_field(*forcing, grid, coeffs.m(), "forcing field");
    return {grid, coeffs.m(), assemble_matrix(grid, coeffs.m(), linear_coefficients(coeffs)),
            assemble_rhs(grid, coeffs.m(), boundary, forcing)};
}

SolveResult solve_linear(const LinearProblem& problem, const SolverConfig& config) {
    SolveReport report;
    Vector x;
    if (config.kind == SolverKind::SparseLU) {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(problem.matrix);
        if (lu.info() != Eigen::Success) throw ConvergenceFailure("sparse LU factorization failed: " + lu.lastErrorMessage(),
                                                                  std::numeric_limits<double>::infinity());
        x = lu.solve(problem.rhs);
        report.iterations = 1;
    } else {
        Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(config.rtol);
        solver.setMaxIterations(config.max_iterations);
        solver.compute(problem.matrix);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceFailure("preconditioner setup failed", std::numeric_limits<double>::infinity());
        }
        x = solver.solve(problem.rhs);
        report.iterations = static_cast<int>(solver.iterations());
        if (solver.info() != Eigen::Success) {
            std::ostringstream os;
            os << "BiCGSTAB did not reach rtol " << config.rtol << " in " << solver.iterations()
               << " iterations (estimated error " << solver.error() << ")";
            throw ConvergenceFailure(os.str(), solver.error());
        }
    }
    // boundary rows are identity rows: copy the data so it is reproduced bit for bit
    for (std::size_t node = 0; node < problem.grid.size(); ++node) {
        if (!problem.grid.is_boundary(node)) continue;
        const auto at = static_cast<Eigen::Index>(node) * problem.m;
        x.segment(at, problem.m) = problem.rhs.segment(at, problem.m);
    }
    report.linear_residual = relative_residual(problem.matrix, x, problem.rhs);
    if (!std::isfinite(report.linear_residual)) throw ConvergenceFailure("linear solve produced non-finite values", report.linear_residual);
    return {GridField(problem.grid, problem.m, std::move(x)), report};
}

Vector discrete_gradient(const GridField& field, std::size_t node) {
    const BoxGrid& grid = field.grid();
    const int n = grid.n();
    const int m = field.m();
    const auto idx = grid.multi_index(node);
    Vector eta(m * n);
    for (int j = 0; j < n; ++j) {
        const int i = idx[static_cast<std::size_t>(j)];
        const int hi = std::min(i + 1, grid.nodes(j) - 1);
        const int lo = std::max(i - 1, 0);
        const Vector d = (field.at(grid.shifted(node, j, hi - i)) - field.at(grid.shifted(node, j, lo - i))) /
                         ((hi - lo) * grid.spacing(j));
        for (int s = 0; s < m; ++s) eta(s * n + j) = d(s);
    }
    return eta;
}

SolveResult solve_quasilinear(const SystemCoefficients& coeffs, const BoxGrid& grid, const GridField& boundary,
                              const PicardConfig& config) {
    if (!coeffs.is_quasilinear()) throw InvalidArgument("solve_quasilinear needs gradient-dependent coefficients");
    if (coeffs.n() != grid.n()) throw InvalidArgument("coefficient dimension n does not match the grid");
    if (!(config.omega > 0.0 && config.omega <= 1.0)) throw InvalidArgument("Picard damping must lie in (0, 1]");
    const int m = coeffs.m();
    check_field(boundary, grid, m, "boundary field");
    const Vector rhs = assemble_rhs(grid, m, boundary, nullptr);

    const auto frozen_solve = [&](const GridField* current) {
        const CoefficientsAt at = [&](std::size_t node, const Vector& x) {
            const Vector eta = current != nullptr ? discrete_gradient(*current, node)
                                                  : Vector::Zero(static_cast<Eigen::Index>(m) * grid.n());
            return std::make_pair(coeffs.quasilinear_at(x, eta), MatrixList{});
        };
        return solve_linear({grid, m, assemble_matrix(grid, m, at), rhs}, config.linear);
    };

    SolveResult result = frozen_solve(nullptr);
    std::vector<double> history;
    for (int it = 1; it <= config.max_iterations; ++it) {
        SolveResult next = frozen_solve(&result.field);
        Vector updated = (1.0 - config.omega) * result.field.values() + config.omega * next.field.values();
        const double change = (updated - result.field.values()).cwiseAbs().maxCoeff();
        history.push_back(change);
        result.field.values() = std::move(updated);
        result.report.linear_residual = next.report.linear_residual;
        if (!std::isfinite(change)) break;
        if (change <= config.ptol) {
            result.report.iterations = it;
            result.report.picard_residual = change;
            result.report.picard_history = std::move(history);
            return result;
        }
    }
    std::ostringstream os;
    os << "Picard iteration did not reach " << config.ptol << " in " << config.max_iterations
       << " iterations; update norms:";
    for (const double h : history) os << ' ' << h;
    throw ConvergenceFailure(os.str(), history.empty() ? std::numeric_limits<double>::infinity() : history.back());
}

AuditRecord audit_invariance(const GridField& solution, const ConvexBody& body, const AuditOptions& options) {
    if (solution.m() != body.dim()) throw InvalidArgument("solution and body dimensions differ");
    const BoxGrid& grid = solution.grid();
    AuditRecord rec;
    rec.boundary_margin = -std::numeric_limits<double>::infinity();
    rec.max_margin = -std::numeric_limits<double>::infinity();
    const auto normals = normal_samples(body, options.normal_budget);
    std::vector<double> boundary_support(normals.size(), -std::numeric_limits<double>::infinity());
    std::vector<double> interior_support(normals.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const Vector u = solution.at(node);
        const double margin = violation_margin(body, u);
        const bool edge = grid.is_boundary(node);
        auto& support = edge ? boundary_support : interior_support;
        for (std::size_t i = 0; i < normals.size(); ++i) support[i] = std::max(support[i], u.dot(normals[i].normal));
        if (edge) {
            if (margin > options.boundary_tol) {
                throw InvalidArgument("boundary value at " + node_location(grid, node) +
                                      " lies outside the body (margin " + std::to_string(margin) + ")");
            }
            rec.boundary_margin = std::max(rec.boundary_margin, margin);
        } else if (margin > rec.max_margin) {
            rec.max_margin = margin;
            rec.worst_node = node;
        }
    }
    rec.dmp_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < normals.size(); ++i) {
        rec.dmp_margin = std::max(rec.dmp_margin, interior_support[i] - boundary_support[i]);
    }
    rec.worst_point = grid.coordinate(rec.worst_node);
    rec.h = grid.max_spacing();
    rec.audit_tol = options.tol_factor * solution.max_abs() * rec.h * rec.h;
    rec.passed = rec.max_margin <= rec.audit_tol;
    return rec;
}

struct BoxSolver::Factor {
    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::SparseLU<SparseMatrix> lu_transpose;
};

BoxSolver::BoxSolver(const SystemCoefficients& coeffs, const BoxGrid& grid)
    : grid_(grid), m_(coeffs.m()), factor_(std::make_unique<Factor>()) {
    if (coeffs.n() != grid.n()) throw InvalidArgument("coefficient dimension n does not match the grid");
    const SparseMatrix A = assemble_matrix(grid, m_, linear_coefficients(coeffs));
    factor_->lu.compute(A);
    const SparseMatrix At = A.transpose();
    factor_->lu_transpose.compute(At);
    if (factor_->lu.info() != Eigen::Success || factor_->lu_transpose.info() != Eigen::Success) {
        throw ConvergenceFailure("sparse LU factorization failed: " + factor_->lu.lastErrorMessage(),
                                 std::numeric_limits<double>::infinity());
    }
}

BoxSolver::~BoxSolver() = default;

std::vector<Matrix> BoxSolver::kernel_row(std::size_t node) const {
    if (node >= grid_.size() || grid_.is_boundary(node)) throw InvalidArgument("kernel rows exist at interior nodes only");
    const auto dofs = static_cast<Eigen::Index>(grid_.size()) * m_;
    std::vector<Matrix> row(grid_.size(), Matrix::Zero(m_, m_));
    for (int p = 0; p < m_; ++p) {
        Vector e = Vector::Zero(dofs);
        e(static_cast<Eigen::Index>(node) * m_ + p) = 1.0;
        const Vector z = factor_->lu_transpose.solve(e);
        for (std::size_t y = 0; y < grid_.size(); ++y) {
            if (grid_.is_boundary(y)) row[y].row(p) = z.segment(static_cast<Eigen::Index>(y) * m_, m_).transpose();
        }
    }
    return row;
}

GridField BoxSolver::solve(const GridField& boundary) const {
    check_field(boundary, grid_, m_, "boundary field");
    Vector x = factor_->lu.solve(assemble_rhs(grid_, m_, boundary, nullptr));
    return {grid_, m_, std::move(x)};
}

GridField random_box_boundary(const BoxGrid& grid, const ConvexBody& body, std::mt19937_64& rng, int modes) {
    const Vector center = interior_point(body);
    TrigData d = random_trig(body.dim(), grid.n(), modes, rng);
    // random overall amplitude so that some fields touch the boundary of the body
    const double amp = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    for (double& c : d.c) c *= amp;
    return trig_boundary(grid, body, center, d);
}

BoxSearchResult search_box_counterexample(const SystemCoefficients& coeffs, const BoxGrid& grid, const ConvexBody& body,
                                          const BoxSearchConfig& config) {
    if (coeffs.m() != body.dim()) throw InvalidArgument("system size and body dimension differ");
    std::mt19937_64 rng(config.seed);
    const BoxSolver solver(coeffs, grid);
    const Vector center = interior_point(body);
    const auto normals = normal_samples(body, config.audit.normal_budget);
    int solves = 0;

    std::optional<AuditRecord> best_audit;
    GridField best_boundary(grid, body.dim());
    const auto keep_best = [&](const AuditRecord& audit, const GridField& boundary) {
        if (!best_audit || audit.max_margin > best_audit->max_margin) {
            best_audit = audit;
            best_boundary = boundary;
            return true;
        }
        return false;
    };

    // Solves, then slides the data along the active outward normal until it touches the body:
    // constants solve the system, so this raises the interior margin by the same amount.
    const auto evaluate = [&](GridField boundary, const BoundaryNormal* direction) {
        GridField u = solver.solve(boundary);
        ++solves;
        AuditRecord audit = audit_invariance(u, body, config.audit);
        const Vector worst = u.at(audit.worst_node);
        const auto active = direction != nullptr
                                ? direction
                                : &*std::max_element(normals.begin(), normals.end(), [&](const auto& a, const auto& b) {
                                      return (worst - a.point).dot(a.normal) < (worst - b.point).dot(b.normal);
                                  });
        const auto shift_fits = [&](double s) {
            for (std::size_t node = 0; node < grid.size(); ++node) {
                if (grid.is_boundary(node) && violation_margin(body, boundary.at(node) + s * active->normal) > 0.0) {
                    return false;
                }
            }
            return true;
        };
        double lo = 0.0;
        double hi = 1.0;
        while (shift_fits(hi) && hi < 1e6) {
            lo = hi;
            hi *= 2.0;
        }
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            (shift_fits(mid) ? lo : hi) = mid;
        }
        if (lo > 0.0) {
            for (std::size_t node = 0; node < grid.size(); ++node) {
                if (grid.is_boundary(node)) boundary.set(node, boundary.at(node) + lo * active->normal);
            }
            u = solver.solve(boundary);
            ++solves;
            audit = audit_invariance(u, body, config.audit);
        }
        return std::make_pair(audit, std::move(boundary));
    };

    // Residual seeds: with K(x, y) the discrete solution kernel, data center + alpha f(y) where
    // f(y) is the part of K(x, y)^T nu orthogonal to nu pushes (u(x), nu) past the boundary values.
    std::vector<std::size_t> interior;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (!grid.is_boundary(node)) interior.push_back(node);
    }
    std::vector<int> mid(static_cast<std::size_t>(grid.n()));
    for (int a = 0; a < grid.n(); ++a) mid[static_cast<std::size_t>(a)] = grid.nodes(a) / 2;
    std::vector<std::size_t> seeds{grid.flat_index(mid)};
    std::uniform_int_distribution<std::size_t> pick_node(0, interior.size() - 1);
    for (int i = 0; i < config.seed_nodes - 1; ++i) seeds.push_back(interior[pick_node(rng)]);
    for (const std::size_t x : seeds) {
        if (solves >= config.max_solves) break;
        const auto row = solver.kernel_row(x);
        for (const auto& bn : normals) {
            if (solves >= config.max_solves) break;
            const Vector& nu = bn.normal;
            GridField data(grid, body.dim());
            double scale = 0.0;
            for (std::size_t y = 0; y < grid.size(); ++y) {
                if (!grid.is_boundary(y)) continue;
                const Vector kt = row[y].transpose() * nu;
                const Vector f = kt - kt.dot(nu) * nu;
                data.set(y, f);
                scale = std::max(scale, f.norm());
            }
            if (!(scale > 0.0)) continue;
            double t = 1.0 / scale;
            for (std::size_t y = 0; y < grid.size(); ++y) {
                if (grid.is_boundary(y)) t = std::min(t, radial_scale_into(body, center, center + data.at(y) / scale) / scale);
            }
            for (std::size_t y = 0; y < grid.size(); ++y) {
                if (grid.is_boundary(y)) data.set(y, center + t * data.at(y));
            }
            auto [a, b] = evaluate(std::move(data), &bn);
            keep_best(a, b);
        }
    }

    TrigData best = random_trig(body.dim(), grid.n(), config.modes, rng);
    double best_trig = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < config.candidates && solves < config.max_solves; ++c) {
        TrigData d = c == 0 ? best : random_trig(body.dim(), grid.n(), config.modes, rng);
        auto [a, b] = evaluate(trig_boundary(grid, body, center, d), nullptr);
        keep_best(a, b);
        if (a.max_margin > best_trig) {
            best_trig = a.max_margin;
            best = std::move(d);
        }
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, best.c.size() - 1);
    double step = 0.3;
    int move = 0;
    while (solves < config.max_solves && best_audit->passed) {
        TrigData trial = best;
        switch (move++ % 3) {
            case 0:
                for (double& c : trial.c) c += step * gauss(rng);
                break;
            case 1:
                trial.c[pick(rng)] += 4.0 * step * gauss(rng);
                break;
            default:
                for (double& c : trial.c) c *= 1.25;
                break;
        }
        auto [a, b] = evaluate(trig_boundary(grid, body, center, trial), nullptr);
        keep_best(a, b);
        if (a.max_margin > best_trig) {
            best_trig = a.max_margin;
            best = std::move(trial);
            step = std::min(1.0, step * 1.2);
        } else {
            step = std::max(0.01, step * 0.97);
        }
    }
    return {*best_audit, std::move(best_boundary), solves, !best_audit->passed};
}

}  // namespace invset
