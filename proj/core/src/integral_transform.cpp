#include "invset/integral_transform.hpp"

#include "invset/errors.hpp"
#include "invset/system_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace invset {

DiscreteKernel::DiscreteKernel(int m, std::vector<KernelPoint> points, double normalization_tol)
    : m_(m), points_(std::move(points)) {
    if (m < 1) throw InvalidArgument("kernel needs m >= 1");
    for (std::size_t x = 0; x < points_.size(); ++x) {
        const auto& p = points_[x];
        if (p.nodes.empty()) throw InvalidArgument("kernel point '" + p.label + "' has no nodes");
        for (const auto& node : p.nodes) {
            if (!std::isfinite(node.weight) || node.weight < 0.0) {
                throw InvalidArgument("kernel point '" + p.label + "' has a negative or non-finite weight");
            }
            if (node.K.rows() != m || node.K.cols() != m || !node.K.allFinite()) {
                throw InvalidArgument("kernel point '" + p.label + "' has a malformed matrix");
            }
        }
    }
    const double defect = normalization_defect();
    if (defect > normalization_tol) {
        std::ostringstream os;
        os << "kernel is not normalized: max ||sum K_i mu_i - I|| = " << defect;
        throw InvalidArgument(os.str());
    }
}

double DiscreteKernel::normalization_defect() const {
    double worst = 0.0;
    for (const auto& p : points_) {
        Matrix S = Matrix::Zero(m_, m_);
        for (const auto& node : p.nodes) S += node.weight * node.K;
        worst = std::max(worst, (S - Matrix::Identity(m_, m_)).norm());
    }
    return worst;
}

Vector apply_transform(const DiscreteKernel& kernel, std::size_t x, const std::vector<Vector>& values) {
    const auto& p = kernel.point(x);
    if (values.size() != p.nodes.size()) {
        throw InvalidArgument("transform input must give a value at every node of '" + p.label + "'");
    }
    Vector out = Vector::Zero(kernel.m());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].size() != kernel.m()) throw InvalidArgument("transform input has the wrong dimension");
        out += p.nodes[i].weight * (p.nodes[i].K * values[i]);
    }
    return out;
}

KernelReport check_kernel_invariance(const DiscreteKernel& kernel, const ConvexBody& body, std::size_t normal_budget,
                                     double tol) {
    if (body.dim() != kernel.m()) throw InvalidArgument("body dimension must equal kernel size");
    KernelReport report;
    report.normals = normal_samples(body, normal_budget);
    for (std::size_t x = 0; x < kernel.points().size(); ++x) {
        const auto& nodes = kernel.point(x).nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].weight <= 0.0) continue;
            for (std::size_t ni = 0; ni < report.normals.size(); ++ni) {
                const Vector& nu = report.normals[ni].normal;
                auto split = residual_split(nodes[i].K, nu);
                const bool bad_f = split.f.norm() > tol;
                const bool bad_g = split.g < -tol;
                if (bad_f || bad_g) {
                    report.failures.push_back({x, i, ni, nu, split.f, split.g, bad_g && !bad_f});
                } else {
                    report.g_table.push_back({x, i, ni, split.g});
                }
            }
        }
    }
    report.passed = report.failures.empty();
    return report;
}

namespace {

bool all_members(const ConvexBody& body, const std::vector<Vector>& values, double tol) {
    return std::all_of(values.begin(), values.end(), [&](const Vector& v) { return contains(body, v, tol); });
}

// Smallest beta in [0, hi] (found by bisection) making every a + offset_i - beta nu a member.
std::optional<double> bisect_beta(const ConvexBody& body, const Vector& a, const Vector& nu,
                                  const std::vector<Vector>& offsets) {
    const auto values_at = [&](double beta) {
        std::vector<Vector> v;
        v.reserve(offsets.size());
        for (const auto& o : offsets) v.push_back(a + o - beta * nu);
        return v;
    };
    if (all_members(body, values_at(0.0), 0.0)) return 0.0;
    double hi = 1e-6;
    const double limit = 1e6 * (1.0 + a.norm());
    while (!all_members(body, values_at(hi), 0.0)) {
        hi *= 2.0;
        if (hi > limit) return std::nullopt;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (all_members(body, values_at(mid), 0.0) ? hi : lo) = mid;
    }
    return hi;
}

Witness residual_witness(const DiscreteKernel& kernel, const ConvexBody& body, std::size_t x, const Vector& a,
                         const Vector& nu, const std::vector<ResidualSplit>& splits, double lambda,
                         double violating_mass, const WitnessOptions& options) {
    double alpha = options.alpha;
    for (int halving = 0; halving <= options.max_halvings; ++halving, alpha *= 0.5) {
        std::vector<Vector> offsets;
        offsets.reserve(splits.size());
        for (const auto& s : splits) offsets.push_back(alpha * s.f);

        std::optional<double> beta;
        if (auto closed = boundary_graph_height(body, a, nu, alpha * lambda)) {
            std::vector<Vector> values;
            for (const auto& o : offsets) values.push_back(a + o - *closed * nu);
            if (all_members(body, values, 1e-12)) beta = *closed;
        }
        if (!beta) beta = bisect_beta(body, a, nu, offsets);
        if (!beta) continue;

        Witness w;
        w.alpha = alpha;
        w.beta = *beta;
        for (const auto& o : offsets) w.values.push_back(a + o - *beta * nu);
        w.predicted_excess = alpha * (violating_mass - *beta / alpha);
        w.image = apply_transform(kernel, x, w.values);
        w.image_margin = violation_margin(body, w.image);
        if (w.predicted_excess > 0.0 && w.image_margin > 0.0) return w;
    }
    std::ostringstream os;
    os << "no witness found after " << options.max_halvings << " halvings of alpha; retry with alpha <= "
       << alpha;
    throw ConvergenceFailure(os.str(), alpha);
}

Witness negative_weight_witness(const DiscreteKernel& kernel, const ConvexBody& body, std::size_t x, const Vector& a,
                                const Vector& nu, const std::vector<ResidualSplit>& splits,
                                const std::vector<bool>& negative) {
    const auto& nodes = kernel.point(x).nodes;
    double depth = 1.0;
    for (int it = 0; it < 60 && !contains(body, a - depth * nu); ++it) depth *= 0.5;
    if (!contains(body, a - depth * nu)) throw InvalidArgument("no interior point below the chosen boundary point");

    double neg_mass = 0.0;
    double rest_mass = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        (negative[i] ? neg_mass : rest_mass) += splits[i].g * nodes[i].weight;
    }
    double eps = depth;
    for (int it = 0; it < 200; ++it, eps *= 0.5) {
        const double excess = -depth * neg_mass - eps * rest_mass;
        if (excess <= 0.0) continue;
        Witness w;
        w.from_negative_g = true;
        w.alpha = 0.0;
        w.beta = eps;
        for (std::size_t i = 0; i < nodes.size(); ++i) w.values.push_back(a - (negative[i] ? depth : eps) * nu);
        w.predicted_excess = excess;
        w.image = apply_transform(kernel, x, w.values);
        w.image_margin = violation_margin(body, w.image);
        if (w.image_margin > 0.0) return w;
    }
    throw ConvergenceFailure("negative-weight witness did not leave the body", eps);
}

}  // namespace

Witness build_witness(const DiscreteKernel& kernel, const ConvexBody& body, std::size_t x, const Vector& a,
                      const Vector& nu, const WitnessOptions& options) {
    if (body.dim() != kernel.m() || a.size() != kernel.m()) throw InvalidArgument("dimension mismatch");
    if (!(options.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    const auto& nodes = kernel.point(x).nodes;

    std::vector<ResidualSplit> splits;
    double lambda = 0.0;
    double violating_mass = 0.0;
    std::vector<bool> negative(nodes.size(), false);
    bool any_negative = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        splits.push_back(residual_split(nodes[i].K, nu));
        const double fn = splits.back().f.norm();
        if (nodes[i].weight > 0.0 && fn > options.tol) {
            lambda = std::max(lambda, fn);
            violating_mass += fn * fn * nodes[i].weight;
        }
        if (nodes[i].weight > 0.0 && splits.back().g < -options.tol) negative[i] = any_negative = true;
    }
    if (violating_mass > 0.0) {
        // nodes outside the violating set carry f = 0 exactly
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].weight <= 0.0 || splits[i].f.norm() <= options.tol) splits[i].f.setZero();
        }
        return residual_witness(kernel, body, x, a, nu, splits, lambda, violating_mass, options);
    }
    if (any_negative) return negative_weight_witness(kernel, body, x, a, nu, splits, negative);
    throw InvalidArgument("kernel satisfies the invariance condition at this point and normal; no witness exists");
}

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

void validate_polygon(const Polygon& polygon) {
    const auto& v = polygon.vertices;
    if (v.size() < 3) throw InvalidArgument("polygon needs at least three vertices");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p0 = v[i];
        const auto& p1 = v[(i + 1) % v.size()];
        const auto& p2 = v[(i + 2) % v.size()];
        if (cross(p1 - p0, p2 - p1) <= 0.0) throw InvalidArgument("polygon must be strictly convex and counter-clockwise");
    }
}

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> segments(const Polygon& polygon, int refinement) {
    if (refinement < 0 || refinement > 20) throw InvalidArgument("refinement level must be in [0, 20]");
    const std::size_t pieces = std::size_t{1} << refinement;
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> out;
    const auto& v = polygon.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Eigen::Vector2d p0 = v[i];
        const Eigen::Vector2d p1 = v[(i + 1) % v.size()];
        for (std::size_t s = 0; s < pieces; ++s) {
            const double t0 = static_cast<double>(s) / static_cast<double>(pieces);
            const double t1 = static_cast<double>(s + 1) / static_cast<double>(pieces);
            out.emplace_back(p0 + t0 * (p1 - p0), p0 + t1 * (p1 - p0));
        }
    }
    return out;
}

}  // namespace

std::vector<Eigen::Vector2d> double_layer_nodes(const Polygon& polygon, int refinement) {
    validate_polygon(polygon);
    std::vector<Eigen::Vector2d> out;
    for (const auto& [p0, p1] : segments(polygon, refinement)) out.emplace_back(0.5 * (p0 + p1));
    return out;
}

DiscreteKernel double_layer_kernel(const Polygon& polygon, const std::vector<Eigen::Vector2d>& x_points,
                                   int refinement) {
    validate_polygon(polygon);
    const auto segs = segments(polygon, refinement);
    std::vector<KernelPoint> points;
    const Matrix one = Matrix::Ones(1, 1);
    for (std::size_t xi = 0; xi < x_points.size(); ++xi) {
        const Eigen::Vector2d& x = x_points[xi];
        const auto& v = polygon.vertices;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Eigen::Vector2d e = v[(i + 1) % v.size()] - v[i];
            if (cross(e, x - v[i]) <= 1e-12 * e.norm()) {
                std::ostringstream os;
                os << "point " << xi << " is not strictly inside the polygon";
                throw InvalidArgument(os.str());
            }
        }
        KernelPoint kp;
        kp.label = "x" + std::to_string(xi);
        for (const auto& [p0, p1] : segs) {
            const Eigen::Vector2d r0 = p0 - x;
            const Eigen::Vector2d r1 = p1 - x;
            const double angle = std::atan2(cross(r0, r1), r0.dot(r1));
            kp.nodes.push_back({angle / (2.0 * std::numbers::pi), one});
        }
        points.push_back(std::move(kp));
    }
    return DiscreteKernel(1, std::move(points), 1e-12);
}

DiscreteKernel averaged_kernel(const std::function<double(double, double)>& s, double a, double b, std::size_t nodes,
                               const std::vector<double>& x_points) {
    if (!(a < b) || nodes < 1) throw InvalidArgument("averaged kernel needs a < b and at least one node");
    const double w = (b - a) / static_cast<double>(nodes);
    std::vector<KernelPoint> points;
    for (std::size_t xi = 0; xi < x_points.size(); ++xi) {
        const double x = x_points[xi];
        std::vector<double> vals(nodes);
        double total = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double y = a + (static_cast<double>(i) + 0.5) * w;
            vals[i] = s(x, y);
            if (!(vals[i] > 0.0) || !std::isfinite(vals[i])) throw InvalidArgument("averaging density must be positive");
            total += vals[i] * w;
        }
        KernelPoint kp;
        kp.label = "x" + std::to_string(xi);
        for (std::size_t i = 0; i < nodes; ++i) kp.nodes.push_back({w, Matrix::Constant(1, 1, vals[i] / total)});
        points.push_back(std::move(kp));
    }
    return DiscreteKernel(1, std::move(points));
}

}  // namespace invset
