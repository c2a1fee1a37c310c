#pragma once

#include "invset/convex_body.hpp"
#include "invset/linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invset {

/// One quadrature node of the measure mu_x: weight mu_i >= 0 and matrix K_i.
struct KernelNode {
    double weight = 0.0;
    Matrix K;
};

/// Nodes of the discrete transform (T u)(x) = sum_i K_i u(y_i) mu_i at one evaluation point.
struct KernelPoint {
    std::string label;
    std::vector<KernelNode> nodes;
};

/// Discrete normalized matrix-valued kernel: sum_i K_i mu_i = I at every point.
class DiscreteKernel {
public:
    /// Validates sizes, non-negative finite weights and the normalization (within `normalization_tol`).
    DiscreteKernel(int m, std::vector<KernelPoint> points, double normalization_tol = 1e-10);

    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] const std::vector<KernelPoint>& points() const noexcept { return points_; }
    [[nodiscard]] const KernelPoint& point(std::size_t x) const { return points_.at(x); }
    /// max over points of || sum K_i mu_i - I ||_F
    [[nodiscard]] double normalization_defect() const;

private:
    int m_;
    std::vector<KernelPoint> points_;
};

/// sum_i K_i u_i mu_i at point x; `values` holds one m-vector per node of x.
[[nodiscard]] Vector apply_transform(const DiscreteKernel& kernel, std::size_t x, const std::vector<Vector>& values);

struct KernelFailure {
    std::size_t x_index = 0;
    std::size_t node_index = 0;
    std::size_t normal_index = 0;
    Vector normal;
    /// Residual f = K^T nu - (K^T nu, nu) nu.
    Vector residual;
    double g = 0.0;
    bool negative_g = false;
};

struct KernelGEntry {
    std::size_t x_index = 0;
    std::size_t node_index = 0;
    std::size_t normal_index = 0;
    double g = 0.0;
};

struct KernelReport {
    bool passed = false;
    std::vector<KernelGEntry> g_table;
    std::vector<KernelFailure> failures;
    std::vector<BoundaryNormal> normals;
};

/// Checks K_i^T nu = g nu with g >= 0 for all nodes with positive weight and all sampled normals.
[[nodiscard]] KernelReport check_kernel_invariance(const DiscreteKernel& kernel, const ConvexBody& body,
                                                   std::size_t normal_budget = 64, double tol = kEigenTol);

struct WitnessOptions {
    double alpha = 1.0;
    int max_halvings = 40;
    double tol = kEigenTol;
};

/// Body-valued data whose transform at x leaves the body.
struct Witness {
    std::vector<Vector> values;
    double alpha = 0.0;
    double beta = 0.0;
    /// alpha * (sum over violating nodes of |f|^2 mu - beta / alpha), or the analogous
    /// negative-weight expression; equals (T u - a, nu).
    double predicted_excess = 0.0;
    Vector image;
    double image_margin = 0.0;
    bool from_negative_g = false;
};

/// Builds u(y_i) = a + alpha f_i - beta nu from the residuals at (x, nu), with beta
/// making every value a member, halving alpha until (T u - a, nu) > 0.
/// If all residuals vanish but some g_i < 0, uses the negative-weight construction.
/// Throws InvalidArgument when the kernel has no violation at (x, nu).
[[nodiscard]] Witness build_witness(const DiscreteKernel& kernel, const ConvexBody& body, std::size_t x,
                                    const Vector& a, const Vector& nu, const WitnessOptions& options = {});

struct Polygon {
    /// Vertices in counter-clockwise order.
    std::vector<Eigen::Vector2d> vertices;
};

/// Double layer potential of a convex polygon as a scalar kernel.
///
/// Each edge is split into 2^refinement equal segments; the node of a segment is
/// its midpoint and its weight is the angle subtended at x divided by 2 pi.
[[nodiscard]] DiscreteKernel double_layer_kernel(const Polygon& polygon, const std::vector<Eigen::Vector2d>& x_points,
                                                 int refinement = 0);

/// Midpoints of the boundary segments used by double_layer_kernel, in node order.
[[nodiscard]] std::vector<Eigen::Vector2d> double_layer_nodes(const Polygon& polygon, int refinement = 0);

/// Scalar averaging kernel (S u)(x) = int s(x, y) u(y) dy / int s(x, y) dy on [a, b],
/// discretized by the midpoint rule with `nodes` cells.
[[nodiscard]] DiscreteKernel averaged_kernel(const std::function<double(double, double)>& s, double a, double b,
                                             std::size_t nodes, const std::vector<double>& x_points);

}  // namespace invset
