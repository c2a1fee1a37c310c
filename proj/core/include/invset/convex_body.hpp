#pragma once

#include "invset/linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace invset {

/// A boundary point of a convex body together with its unit outward normal.
struct BoundaryNormal {
    Vector point;
    Vector normal;
};

/// {u : (u - anchor, normal) <= 0}
struct HalfSpace {
    Vector normal;
    Vector anchor;
};

/// {u : u_i >= lower_i for i in indices}. Indices are zero based.
struct PolyhedralAngle {
    int dim = 0;
    std::vector<int> indices;
    std::vector<double> lower;
};

/// {u : lower_i <= u_i <= upper_i for i in indices}.
struct PolyhedralCylinder {
    int dim = 0;
    std::vector<int> indices;
    std::vector<double> lower;
    std::vector<double> upper;
};

/// {u : u_{m-k+1}^2 + ... + u_m^2 <= R^2}, the trailing k coordinates constrained.
struct SphericalCylinder {
    int dim = 0;
    int trailing = 0;
    double radius = 1.0;
};

/// {u : (u - vertex, normal_i) <= 0 for every facet normal}.
struct PolyhedralCone {
    Vector vertex;
    std::vector<Vector> normals;
};

/// Intersection of finitely many half-spaces given as (anchor point, outward normal).
struct Polytope {
    std::vector<BoundaryNormal> constraints;
};

struct Ball {
    Vector center;
    double radius = 1.0;
};

/// Smooth body known only through a boundary sampler.
///
/// `sampler(budget)` returns `budget` boundary points with their outward
/// normals. `margin`, when set, is an exact signed violation margin; without it
/// membership uses the supporting half-spaces of `membership_budget` samples.
struct SampledSmooth {
    int dim = 0;
    std::function<std::vector<BoundaryNormal>(std::size_t)> sampler;
    std::function<double(const Vector&)> margin;
    std::size_t membership_budget = 512;
    std::string label = "sampled";
};

enum class BodyKind {
    HalfSpace,
    PolyhedralAngle,
    PolyhedralCylinder,
    SphericalCylinder,
    PolyhedralCone,
    Polytope,
    Ball,
    SampledSmooth,
};

[[nodiscard]] std::string to_string(BodyKind kind);

/// Convex body in R^m described by its supporting half-spaces.
///
/// Bodies are immutable; the factories validate the invariants (unit normals,
/// lower < upper, independent cone normals) and throw on violation.
class ConvexBody {
public:
    using Data = std::variant<HalfSpace, PolyhedralAngle, PolyhedralCylinder, SphericalCylinder,
                              PolyhedralCone, Polytope, Ball, SampledSmooth>;

    static ConvexBody half_space(Vector normal, Vector anchor);
    /// The orthant {u >= lower} (all coordinates constrained).
    static ConvexBody orthant(const Vector& lower);
    static ConvexBody polyhedral_angle(int dim, std::vector<int> indices, std::vector<double> lower);
    static ConvexBody polyhedral_cylinder(int dim, std::vector<int> indices, std::vector<double> lower,
                                          std::vector<double> upper);
    static ConvexBody spherical_cylinder(int dim, int trailing, double radius);
    static ConvexBody polyhedral_cone(Vector vertex, std::vector<Vector> normals);
    static ConvexBody polytope(std::vector<BoundaryNormal> constraints);
    static ConvexBody ball(Vector center, double radius);
    static ConvexBody sampled_smooth(SampledSmooth data);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] BodyKind kind() const noexcept;
    [[nodiscard]] const Data& data() const noexcept { return data_; }
    [[nodiscard]] std::string describe() const;

    /// True when the normal set is finite (all polyhedral variants).
    [[nodiscard]] bool has_finite_normals() const noexcept;

private:
    ConvexBody(Data data, int dim) : data_(std::move(data)), dim_(dim) {}

    Data data_;
    int dim_;
};

/// Boundary points with outward normals.
///
/// Polyhedral variants return their facet normals (budget ignored); Ball,
/// SphericalCylinder and SampledSmooth return `budget` quasi-uniform samples.
[[nodiscard]] std::vector<BoundaryNormal> normal_samples(const ConvexBody& body, std::size_t budget);

/// max over supporting constraints of (u - a, nu); <= 0 iff u is a member.
[[nodiscard]] double violation_margin(const ConvexBody& body, const Vector& u);

[[nodiscard]] bool contains(const ConvexBody& body, const Vector& u, double tol = 0.0);

/// A boundary point where `normal` is the unique outward normal and the body is
/// locally flat or smooth (relative interior of a facet for polyhedral bodies).
/// Returns nothing if `normal` is not one of the body's normals.
[[nodiscard]] std::optional<Vector> smooth_boundary_point(const ConvexBody& body, const Vector& normal);

/// Largest inward depth of the boundary over the tangent sphere of radius r at a.
///
/// In coordinates where the tangent plane at `a` is horizontal and the inner
/// normal points up, the boundary is a convex graph F; this returns
/// max{F(xi') : |xi'| = r}. Available in closed form for half-spaces, balls,
/// spherical cylinders and facet interiors of polyhedral bodies; returns nothing
/// when the body has no closed form or r leaves the region where it applies.
[[nodiscard]] std::optional<double> boundary_graph_height(const ConvexBody& body, const Vector& a,
                                                          const Vector& normal, double r);

/// A point strictly inside the body (used as the center for radial projections).
[[nodiscard]] Vector interior_point(const ConvexBody& body);

/// Shrinks `u` towards `center` just enough to make it a member:
/// returns center + t (u - center) with the largest t in [0, 1] found by bisection.
[[nodiscard]] double radial_scale_into(const ConvexBody& body, const Vector& center, const Vector& u);

/// Every m-subset of `normals` has |det| > threshold; otherwise returns the first failing subset.
[[nodiscard]] std::optional<std::vector<int>> first_dependent_subset(const std::vector<Vector>& normals,
                                                                     double threshold = 1e-10);

}  // namespace invset
