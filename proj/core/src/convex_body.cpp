#include "invset/convex_body.hpp"

#include "invset/errors.hpp"
#include "invset/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace invset {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_unit(const Vector& v, const char* what) {
    if (!is_unit(v)) {
        std::ostringstream os;
        os << what << " must have unit length (|v| = " << v.norm() << ")";
        throw InvalidArgument(os.str());
    }
}

void require_indices(int dim, const std::vector<int>& indices) {
    if (indices.empty()) throw InvalidArgument("at least one constrained coordinate is required");
    std::vector<int> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("constrained coordinates must be distinct");
    }
    for (const int i : indices) {
        if (i < 0 || i >= dim) throw InvalidArgument("constrained coordinate index out of range");
    }
}

// Point with every constrained coordinate at its lower bound, others zero.
Vector angle_vertex(int dim, const std::vector<int>& indices, const std::vector<double>& lower) {
    Vector v = Vector::Zero(dim);
    for (std::size_t t = 0; t < indices.size(); ++t) v(indices[t]) = lower[t];
    return v;
}

std::vector<BoundaryNormal> finite_constraints(const ConvexBody& body) {
    return std::visit(
        Overloaded{
            [](const HalfSpace& h) { return std::vector<BoundaryNormal>{{h.anchor, h.normal}}; },
            [](const PolyhedralAngle& p) {
                std::vector<BoundaryNormal> out;
                const Vector v = angle_vertex(p.dim, p.indices, p.lower);
                for (const int i : p.indices) out.push_back({v, -unit_vector(p.dim, i)});
                return out;
            },
            [](const PolyhedralCylinder& c) {
                std::vector<BoundaryNormal> out;
                const Vector v = angle_vertex(c.dim, c.indices, c.lower);
                for (std::size_t t = 0; t < c.indices.size(); ++t) {
                    const int i = c.indices[t];
                    out.push_back({v, -unit_vector(c.dim, i)});
                    Vector top = v;
                    top(i) = c.upper[t];
                    out.push_back({top, unit_vector(c.dim, i)});
                }
                return out;
            },
            [](const PolyhedralCone& k) {
                std::vector<BoundaryNormal> out;
                for (const auto& nu : k.normals) out.push_back({k.vertex, nu});
                return out;
            },
            [](const Polytope& p) { return p.constraints; },
            [](const auto&) -> std::vector<BoundaryNormal> {
                throw InvalidArgument("body has no finite constraint set");
            },
        },
        body.data());
}

}  // namespace

std::string to_string(BodyKind kind) {
    switch (kind) {
        case BodyKind::HalfSpace: return "HalfSpace";
        case BodyKind::PolyhedralAngle: return "PolyhedralAngle";
        case BodyKind::PolyhedralCylinder: return "PolyhedralCylinder";
        case BodyKind::SphericalCylinder: return "SphericalCylinder";
        case BodyKind::PolyhedralCone: return "PolyhedralCone";
        case BodyKind::Polytope: return "Polytope";
        case BodyKind::Ball: return "Ball";
        case BodyKind::SampledSmooth: return "SampledSmooth";
    }
    return "Unknown";
}

std::optional<std::vector<int>> first_dependent_subset(const std::vector<Vector>& normals, double threshold) {
    if (normals.empty()) return std::nullopt;
    const int m = static_cast<int>(normals.front().size());
    const int p = static_cast<int>(normals.size());
    if (p < m) return std::nullopt;
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        Matrix N(m, m);
        for (int c = 0; c < m; ++c) N.col(c) = normals[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
        if (std::abs(N.determinant()) <= threshold) return idx;
        // next combination in lexicographic order
        int i = m - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - m + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return std::nullopt;
}

ConvexBody ConvexBody::half_space(Vector normal, Vector anchor) {
    if (normal.size() != anchor.size() || normal.size() == 0) {
        throw InvalidArgument("half-space normal and anchor must have equal positive dimension");
    }
    require_unit(normal, "half-space normal");
    const int dim = static_cast<int>(normal.size());
    return {HalfSpace{std::move(normal), std::move(anchor)}, dim};
}

ConvexBody ConvexBody::orthant(const Vector& lower) {
    const int dim = static_cast<int>(lower.size());
    std::vector<int> idx(static_cast<std::size_t>(dim));
    std::iota(idx.begin(), idx.end(), 0);
    return polyhedral_angle(dim, std::move(idx), std::vector<double>(lower.data(), lower.data() + dim));
}

ConvexBody ConvexBody::polyhedral_angle(int dim, std::vector<int> indices, std::vector<double> lower) {
    require_indices(dim, indices);
    if (lower.size() != indices.size()) throw InvalidArgument("one lower bound per constrained coordinate");
    return {PolyhedralAngle{dim, std::move(indices), std::move(lower)}, dim};
}

ConvexBody ConvexBody::polyhedral_cylinder(int dim, std::vector<int> indices, std::vector<double> lower,
                                           std::vector<double> upper) {
    require_indices(dim, indices);
    if (lower.size() != indices.size() || upper.size() != indices.size()) {
        throw InvalidArgument("one lower and one upper bound per constrained coordinate");
    }
    for (std::size_t t = 0; t < lower.size(); ++t) {
        if (!(lower[t] < upper[t])) {
            throw DegenerateBody("polyhedral cylinder needs lower < upper on coordinate " +
                                 std::to_string(indices[t]));
        }
    }
    return {PolyhedralCylinder{dim, std::move(indices), std::move(lower), std::move(upper)}, dim};
}

ConvexBody ConvexBody::spherical_cylinder(int dim, int trailing, double radius) {
    if (trailing < 1 || trailing > dim) throw InvalidArgument("spherical cylinder needs 1 <= k <= m");
    if (!(radius > 0.0)) throw DegenerateBody("spherical cylinder radius must be positive");
    return {SphericalCylinder{dim, trailing, radius}, dim};
}

ConvexBody ConvexBody::polyhedral_cone(Vector vertex, std::vector<Vector> normals) {
    if (normals.empty()) throw InvalidArgument("cone needs at least one facet normal");
    const auto m = vertex.size();
    for (const auto& nu : normals) {
        if (nu.size() != m) throw InvalidArgument("cone normal dimension mismatch");
        require_unit(nu, "cone facet normal");
    }
    if (const auto bad = first_dependent_subset(normals)) {
        std::ostringstream os;
        os << "cone normals {";
        for (std::size_t i = 0; i < bad->size(); ++i) os << (i ? "," : "") << (*bad)[i];
        os << "} are linearly dependent (|det| <= 1e-10)";
        throw DegenerateBody(os.str());
    }
    const int dim = static_cast<int>(m);
    return {PolyhedralCone{std::move(vertex), std::move(normals)}, dim};
}

ConvexBody ConvexBody::polytope(std::vector<BoundaryNormal> constraints) {
    if (constraints.empty()) throw InvalidArgument("polytope needs at least one constraint");
    const auto m = constraints.front().normal.size();
    for (const auto& c : constraints) {
        if (c.normal.size() != m || c.point.size() != m) throw InvalidArgument("polytope dimension mismatch");
        require_unit(c.normal, "polytope constraint normal");
    }
    const int dim = static_cast<int>(m);
    return {Polytope{std::move(constraints)}, dim};
}

ConvexBody ConvexBody::ball(Vector center, double radius) {
    if (!(radius > 0.0)) throw DegenerateBody("ball radius must be positive");
    if (center.size() == 0) throw InvalidArgument("ball center must be non-empty");
    const int dim = static_cast<int>(center.size());
    return {Ball{std::move(center), radius}, dim};
}

ConvexBody ConvexBody::sampled_smooth(SampledSmooth data) {
    if (!data.sampler) throw InvalidArgument("sampled body needs a boundary sampler");
    if (data.dim < 1) throw InvalidArgument("sampled body needs a positive dimension");
    const int dim = data.dim;
    return {std::move(data), dim};
}

BodyKind ConvexBody::kind() const noexcept { return static_cast<BodyKind>(data_.index()); }

bool ConvexBody::has_finite_normals() const noexcept {
    switch (kind()) {
        case BodyKind::HalfSpace:
        case BodyKind::PolyhedralAngle:
        case BodyKind::PolyhedralCylinder:
        case BodyKind::PolyhedralCone:
        case BodyKind::Polytope: return true;
        default: return false;
    }
}

std::string ConvexBody::describe() const {
    std::ostringstream os;
    os << to_string(kind()) << " in R^" << dim_;
    std::visit(Overloaded{
                   [&](const PolyhedralAngle& p) { os << " with " << p.indices.size() << " constrained coordinates"; },
                   [&](const PolyhedralCylinder& c) { os << " with " << c.indices.size() << " constrained coordinates"; },
                   [&](const SphericalCylinder& s) { os << " (k=" << s.trailing << ", R=" << s.radius << ")"; },
                   [&](const PolyhedralCone& k) { os << " with " << k.normals.size() << " facets"; },
                   [&](const Polytope& p) { os << " with " << p.constraints.size() << " constraints"; },
                   [&](const Ball& b) { os << " (R=" << b.radius << ")"; },
                   [&](const SampledSmooth& s) { os << " (" << s.label << ")"; },
                   [](const HalfSpace&) {},
               },
               data_);
    return os.str();
}

std::vector<BoundaryNormal> normal_samples(const ConvexBody& body, std::size_t budget) {
    if (budget < 1) throw InvalidArgument("normal sample budget must be at least 1");
    if (body.has_finite_normals()) return finite_constraints(body);
    return std::visit(
        Overloaded{
            [&](const SphericalCylinder& s) {
                std::vector<BoundaryNormal> out;
                for (const auto& g : sphere_points(s.trailing, budget)) {
                    Vector nu = Vector::Zero(s.dim);
                    nu.tail(s.trailing) = g;
                    out.push_back({s.radius * nu, nu});
                }
                return out;
            },
            [&](const Ball& b) {
                std::vector<BoundaryNormal> out;
                for (const auto& nu : sphere_points(body.dim(), budget)) out.push_back({b.center + b.radius * nu, nu});
                return out;
            },
            [&](const SampledSmooth& s) {
                auto out = s.sampler(budget);
                for (std::size_t i = 0; i < out.size(); ++i) {
                    if (out[i].normal.size() != s.dim || out[i].point.size() != s.dim || !is_unit(out[i].normal)) {
                        throw DegenerateBody("boundary sampler returned an invalid normal at sample " +
                                             std::to_string(i));
                    }
                }
                return out;
            },
            [](const auto&) -> std::vector<BoundaryNormal> { return {}; },
        },
        body.data());
}

double violation_margin(const ConvexBody& body, const Vector& u) {
    if (u.size() != body.dim()) throw InvalidArgument("point dimension does not match body dimension");
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) { return (u - h.anchor).dot(h.normal); },
            [&](const PolyhedralAngle& p) {
                double worst = -std::numeric_limits<double>::infinity();
                for (std::size_t t = 0; t < p.indices.size(); ++t) worst = std::max(worst, p.lower[t] - u(p.indices[t]));
                return worst;
            },
            [&](const PolyhedralCylinder& c) {
                double worst = -std::numeric_limits<double>::infinity();
                for (std::size_t t = 0; t < c.indices.size(); ++t) {
                    const double ui = u(c.indices[t]);
                    worst = std::max({worst, c.lower[t] - ui, ui - c.upper[t]});
                }
                return worst;
            },
            [&](const SphericalCylinder& s) { return u.tail(s.trailing).norm() - s.radius; },
            [&](const PolyhedralCone& k) {
                double worst = -std::numeric_limits<double>::infinity();
                for (const auto& nu : k.normals) worst = std::max(worst, (u - k.vertex).dot(nu));
                return worst;
            },
            [&](const Polytope& p) {
                double worst = -std::numeric_limits<double>::infinity();
                for (const auto& c : p.constraints) worst = std::max(worst, (u - c.point).dot(c.normal));
                return worst;
            },
            [&](const Ball& b) { return (u - b.center).norm() - b.radius; },
            [&](const SampledSmooth& s) {
                if (s.margin) return s.margin(u);
                double worst = -std::numeric_limits<double>::infinity();
                for (const auto& c : s.sampler(s.membership_budget)) worst = std::max(worst, (u - c.point).dot(c.normal));
                return worst;
            },
        },
        body.data());
}

bool contains(const ConvexBody& body, const Vector& u, double tol) {
    if (tol < 0.0) throw InvalidArgument("membership tolerance must be non-negative");
    return violation_margin(body, u) <= tol;
}

namespace {

bool same_direction(const Vector& a, const Vector& b) { return (a - b).norm() <= 1e-10; }

// Facet interior point for a polyhedral body given by explicit constraints:
// the anchor itself if it is strictly inside every other constraint.
std::optional<Vector> facet_point_from_constraints(const std::vector<BoundaryNormal>& cons, const Vector& normal) {
    for (std::size_t i = 0; i < cons.size(); ++i) {
        if (!same_direction(cons[i].normal, normal)) continue;
        bool interior = true;
        for (std::size_t j = 0; j < cons.size(); ++j) {
            if (j == i) continue;
            if ((cons[i].point - cons[j].point).dot(cons[j].normal) >= -kGeomTol) interior = false;
        }
        if (interior) return cons[i].point;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Vector> smooth_boundary_point(const ConvexBody& body, const Vector& normal) {
    if (normal.size() != body.dim() || !is_unit(normal, 1e-10)) return std::nullopt;
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) -> std::optional<Vector> {
                if (same_direction(h.normal, normal)) return h.anchor;
                return std::nullopt;
            },
            [&](const PolyhedralAngle& p) -> std::optional<Vector> {
                for (const int i : p.indices) {
                    if (!same_direction(-unit_vector(p.dim, i), normal)) continue;
                    Vector a = angle_vertex(p.dim, p.indices, p.lower);
                    for (const int j : p.indices)
                        if (j != i) a(j) += 1.0;
                    return a;
                }
                return std::nullopt;
            },
            [&](const PolyhedralCylinder& c) -> std::optional<Vector> {
                for (std::size_t t = 0; t < c.indices.size(); ++t) {
                    const int i = c.indices[t];
                    const bool low = same_direction(-unit_vector(c.dim, i), normal);
                    const bool high = same_direction(unit_vector(c.dim, i), normal);
                    if (!low && !high) continue;
                    Vector a = Vector::Zero(c.dim);
                    for (std::size_t s = 0; s < c.indices.size(); ++s) a(c.indices[s]) = 0.5 * (c.lower[s] + c.upper[s]);
                    a(i) = low ? c.lower[t] : c.upper[t];
                    return a;
                }
                return std::nullopt;
            },
            [&](const SphericalCylinder& s) -> std::optional<Vector> {
                const int head = s.dim - s.trailing;
                if (head > 0 && normal.head(head).norm() > 1e-10) return std::nullopt;
                return Vector(s.radius * normal);
            },
            [&](const PolyhedralCone& k) -> std::optional<Vector> {
                const int m = body.dim();
                const auto p = k.normals.size();
                for (std::size_t i = 0; i < p; ++i) {
                    if (!same_direction(k.normals[i], normal)) continue;
                    if (p == static_cast<std::size_t>(m)) {
                        // (d, nu_i) = 0 and (d, nu_j) = -1 for j != i
                        Matrix Nt(m, m);
                        Vector rhs = Vector::Constant(m, -1.0);
                        for (int r = 0; r < m; ++r) Nt.row(r) = k.normals[static_cast<std::size_t>(r)].transpose();
                        rhs(static_cast<Eigen::Index>(i)) = 0.0;
                        return Vector(k.vertex + Nt.fullPivLu().solve(rhs));
                    }
                    // project the mean inward direction onto the facet plane and test it
                    Vector d = Vector::Zero(m);
                    for (std::size_t j = 0; j < p; ++j)
                        if (j != i) d -= k.normals[j];
                    d -= d.dot(normal) * normal;
                    if (d.norm() < 1e-12) return std::nullopt;
                    d.normalize();
                    for (std::size_t j = 0; j < p; ++j) {
                        if (j != i && d.dot(k.normals[j]) >= -1e-12) return std::nullopt;
                    }
                    return Vector(k.vertex + d);
                }
                return std::nullopt;
            },
            [&](const Polytope& p) { return facet_point_from_constraints(p.constraints, normal); },
            [&](const Ball& b) -> std::optional<Vector> { return Vector(b.center + b.radius * normal); },
            [](const SampledSmooth&) -> std::optional<Vector> { return std::nullopt; },
        },
        body.data());
}

std::optional<double> boundary_graph_height(const ConvexBody& body, const Vector& a, const Vector& normal,
                                            double r) {
    if (r < 0.0) throw InvalidArgument("tangent radius must be non-negative");
    const auto curved = [&](double R) -> std::optional<double> {
        if (r > R) return std::nullopt;
        return R - std::sqrt(R * R - r * r);
    };
    const auto flat = [&](const std::vector<BoundaryNormal>& cons) -> std::optional<double> {
        // the tangent disk of radius r around a must stay inside every other constraint
        for (const auto& c : cons) {
            if (same_direction(c.normal, normal)) continue;
            const Vector tangential = c.normal - c.normal.dot(normal) * normal;
            if ((a - c.point).dot(c.normal) + r * tangential.norm() > 0.0) return std::nullopt;
        }
        return 0.0;
    };
    switch (body.kind()) {
        case BodyKind::HalfSpace: return 0.0;
        case BodyKind::Ball: return curved(std::get<Ball>(body.data()).radius);
        case BodyKind::SphericalCylinder: return curved(std::get<SphericalCylinder>(body.data()).radius);
        case BodyKind::PolyhedralAngle:
        case BodyKind::PolyhedralCylinder:
        case BodyKind::PolyhedralCone:
        case BodyKind::Polytope: return flat(finite_constraints(body));
        case BodyKind::SampledSmooth: return std::nullopt;
    }
    return std::nullopt;
}

Vector interior_point(const ConvexBody& body) {
    const int m = body.dim();
    Vector c = std::visit(
        Overloaded{
            [&](const HalfSpace& h) -> Vector { return h.anchor - h.normal; },
            [&](const PolyhedralAngle& p) -> Vector {
                Vector v = angle_vertex(p.dim, p.indices, p.lower);
                for (const int i : p.indices) v(i) += 1.0;
                return v;
            },
            [&](const PolyhedralCylinder& c) -> Vector {
                Vector v = Vector::Zero(c.dim);
                for (std::size_t t = 0; t < c.indices.size(); ++t) v(c.indices[t]) = 0.5 * (c.lower[t] + c.upper[t]);
                return v;
            },
            [&](const SphericalCylinder& s) -> Vector { return Vector::Zero(s.dim); },
            [&](const PolyhedralCone& k) -> Vector {
                if (k.normals.size() == static_cast<std::size_t>(m)) {
                    Matrix Nt(m, m);
                    for (int r = 0; r < m; ++r) Nt.row(r) = k.normals[static_cast<std::size_t>(r)].transpose();
                    return k.vertex + Nt.fullPivLu().solve(Vector::Constant(m, -1.0));
                }
                Vector d = Vector::Zero(m);
                for (const auto& nu : k.normals) d -= nu;
                return k.vertex + d;
            },
            [&](const Polytope& p) -> Vector {
                Vector v = Vector::Zero(m);
                for (const auto& c : p.constraints) v += c.point;
                return v / static_cast<double>(p.constraints.size());
            },
            [&](const Ball& b) -> Vector { return b.center; },
            [&](const SampledSmooth& s) -> Vector {
                Vector v = Vector::Zero(m);
                const auto samples = s.sampler(s.membership_budget);
                for (const auto& c : samples) v += c.point;
                return v / static_cast<double>(std::max<std::size_t>(samples.size(), 1));
            },
        },
        body.data());
    if (!(violation_margin(body, c) < 0.0)) {
        throw DegenerateBody("could not find an interior point of " + body.describe());
    }
    return c;
}

double radial_scale_into(const ConvexBody& body, const Vector& center, const Vector& u) {
    const auto member = [&](double t) { return violation_margin(body, center + t * (u - center)) <= 0.0; };
    if (member(1.0)) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (member(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace invset
