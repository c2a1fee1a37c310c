#pragma once

#include "invset/coefficients.hpp"
#include "invset/convex_body.hpp"
#include "invset/linalg.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace invset {

/// Orthogonal split  M^T nu = g nu + f  with g = (M^T nu, nu) and (f, nu) = 0.
struct ResidualSplit {
    double g = 0.0;
    Vector f;
};

/// Throws InvalidArgument unless |nu| = 1 within 1e-12.
[[nodiscard]] ResidualSplit residual_split(const Matrix& M, const Vector& nu);

/// The scalar a with M^T nu = a nu, if ||M^T nu - a nu|| <= tol (1 + ||M||).
[[nodiscard]] std::optional<double> left_eigen_scalar(const Matrix& M, const Vector& nu, double tol = kEigenTol);

struct EllipticityScan {
    /// Quasi-uniform directions sigma on the (half) unit sphere of R^n; must be >= n.
    std::size_t sphere_budget = 64;
    /// Points per tangent axis of the local refinement around the running minimizer (at least 4);
    /// the window is recentred and shrunk by 2 / refinement_points until it is below 1e-9.
    int refinement_points = 16;
    /// Gradient samples for quasilinear coefficients.
    std::vector<Vector> eta_samples;
    /// If non-empty, zeta ranges over these unit vectors only (relaxed condition).
    std::vector<Vector> zeta_restriction;
};

/// Sample-based estimate of the ellipticity constant:
/// min over x, eta, sigma of the smallest eigenvalue of the symmetric part of
/// sum A_jk sigma_j sigma_k (or of (M zeta, zeta) over the restricted zeta set).
/// Never below the true constant on the sampled set.
[[nodiscard]] double ellipticity_constant(const SystemCoefficients& coeffs, const std::vector<Vector>& x_samples,
                                          const EllipticityScan& scan);
[[nodiscard]] double ellipticity_constant(const SystemCoefficients& coeffs, const std::vector<Vector>& x_samples,
                                          std::size_t sphere_budget);

enum class FailureKind {
    EigenResidual,       ///< A^T nu is not parallel to nu
    NotElliptic,         ///< the sampled ellipticity estimate is not positive
    ReducedEllipticity,  ///< the recovered scalar form is below the estimate
};

[[nodiscard]] std::string to_string(FailureKind kind);

/// Which matrix a failure or recovered scalar refers to:
/// second order (j, k) with j <= k, or first order j with k = -1.
struct CoefficientSlot {
    int j = 0;
    int k = 0;
    [[nodiscard]] bool first_order() const noexcept { return k < 0; }
};

struct ConditionFailure {
    FailureKind kind = FailureKind::EigenResidual;
    std::size_t x_index = 0;
    std::optional<std::size_t> eta_index;
    std::size_t normal_index = 0;
    Vector normal;
    CoefficientSlot slot;
    double residual = 0.0;
};

/// Recovered a_jk(x; nu), a_j(x; nu) or b_jk(x, eta; nu).
struct ScalarFieldEntry {
    std::size_t x_index = 0;
    std::optional<std::size_t> eta_index;
    std::size_t normal_index = 0;
    CoefficientSlot slot;
    double value = 0.0;
};

struct ConditionReport {
    bool passed = false;
    double delta_estimate = 0.0;
    /// min over (x, eta, nu) and sampled sigma of sum a_jk sigma_j sigma_k
    double reduced_delta = 0.0;
    std::vector<ConditionFailure> failures;
    std::vector<ScalarFieldEntry> scalar_fields;
    std::vector<Vector> normals;
    /// True when the normal set or the x / eta quantifiers were sampled rather than exhaustive.
    bool sampled = true;
    std::vector<std::string> notes;
};

struct ConditionOptions {
    std::size_t normal_budget = 64;
    double tol = kEigenTol;
    std::size_t sphere_budget = 64;
    /// Check ellipticity with zeta restricted to the body's normals.
    bool relaxed_ellipticity = false;
};

/// Left-eigenvector conditions for every A_jk(x) and A_j(x) against every sampled normal.
[[nodiscard]] ConditionReport check_linear_conditions(const SystemCoefficients& coeffs, const ConvexBody& body,
                                                      const std::vector<Vector>& x_samples,
                                                      const ConditionOptions& options = {});

/// Same conditions for the quasilinear B_jk(x, eta) over the eta samples.
[[nodiscard]] ConditionReport check_quasilinear_conditions(const SystemCoefficients& coeffs, const ConvexBody& body,
                                                           const std::vector<Vector>& x_samples,
                                                           const std::vector<Vector>& eta_samples,
                                                           const ConditionOptions& options = {});

/// {0} together with +-s e_i for each magnitude s, in R^{m n}.
[[nodiscard]] std::vector<Vector> default_eta_samples(int m, int n, const std::vector<double>& magnitudes = {1.0});

struct Box {
    Vector lower;
    Vector upper;
};

struct ConeComplementResult {
    /// No domain point lies in K_h = {x_n^2 > h^2 |x'|^2, x_n < 0}.
    bool outside_cone = false;
    bool bounded = false;
    /// "bounded", "cone-complement" or "none": which domain hypothesis of the quasilinear result applies.
    std::string branch;
    std::optional<Vector> offending_point;
};

[[nodiscard]] bool in_cone(double h, const Vector& x);
[[nodiscard]] ConeComplementResult cone_complement_predicate(double h, const Box& box);
/// A point cloud is treated as a sample of a possibly unbounded domain.
[[nodiscard]] ConeComplementResult cone_complement_predicate(double h, const std::vector<Vector>& points);

}  // namespace invset
