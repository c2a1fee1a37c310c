#include "invset/system_conditions.hpp"

#include "invset/errors.hpp"
#include "invset/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace invset {

ResidualSplit residual_split(const Matrix& M, const Vector& nu) {
    if (M.rows() != M.cols() || M.rows() != nu.size()) throw InvalidArgument("matrix and normal dimensions differ");
    if (!is_unit(nu)) throw InvalidArgument("normal must have unit length within 1e-12");
    const Vector t = M.transpose() * nu;
    const double g = t.dot(nu);
    return {g, t - g * nu};
}

std::optional<double> left_eigen_scalar(const Matrix& M, const Vector& nu, double tol) {
    const auto split = residual_split(M, nu);
    const double scale = 1.0 + M.norm();
    if (split.f.norm() <= tol * scale) return split.g;
    return std::nullopt;
}

std::string to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::EigenResidual: return "eigen_residual";
        case FailureKind::NotElliptic: return "not_elliptic";
        case FailureKind::ReducedEllipticity: return "reduced_ellipticity";
    }
    return "unknown";
}

namespace {

using MatrixList = SystemCoefficients::MatrixList;

struct Sample {
    std::size_t x_index;
    std::optional<std::size_t> eta_index;
    MatrixList second;
    MatrixList first;
};

std::vector<Sample> gather_linear(const SystemCoefficients& c, const std::vector<Vector>& xs) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({i, std::nullopt, c.second_order_at(xs[i]), c.first_order_at(xs[i])});
    return out;
}

std::vector<Sample> gather_quasilinear(const SystemCoefficients& c, const std::vector<Vector>& xs,
                                       const std::vector<Vector>& etas) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t e = 0; e < etas.size(); ++e) out.push_back({i, e, c.quasilinear_at(xs[i], etas[e]), {}});
    return out;
}

// Smallest value of the ellipticity form at direction sigma over all samples.
double form_minimum(const std::vector<Sample>& samples, int n, const Vector& sigma,
                    const std::vector<Vector>& zetas) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        const Matrix M = symbol(s.second, n, sigma);
        if (zetas.empty()) {
            best = std::min(best, min_symmetric_eigenvalue(M));
        } else {
            for (const auto& z : zetas) best = std::min(best, z.dot(M * z));
        }
    }
    return best;
}

// Orthonormal basis of the complement of a unit vector.
Matrix tangent_basis(const Vector& v) {
    const auto n = v.size();
    Matrix Q = Eigen::HouseholderQR<Matrix>(v).householderQ() * Matrix::Identity(n, n);
    return Q.rightCols(n - 1);
}

double scan_sphere(const std::vector<Sample>& samples, int n, const EllipticityScan& scan) {
    if (n == 1) return form_minimum(samples, 1, Vector::Ones(1), scan.zeta_restriction);

    const auto dirs = half_sphere_points(n, scan.sphere_budget);
    double best = std::numeric_limits<double>::infinity();
    Vector arg = dirs.front();
    for (const auto& s : dirs) {
        const double v = form_minimum(samples, n, s, scan.zeta_restriction);
        if (v < best) {
            best = v;
            arg = s;
        }
    }

    // local refinement around the minimizer: a tangent grid, recentred and shrunk until the window is below kWindowTol
    constexpr double kWindowTol = 1e-9;
    const int r = std::max(4, scan.refinement_points);
    double spacing =
        n == 2 ? std::numbers::pi / static_cast<double>(scan.sphere_budget)
               : std::sqrt(2.0 * std::numbers::pi / static_cast<double>(scan.sphere_budget));
    const int axes = n - 1;
    const int per_axis = r + 1;
    long total = 1;
    for (int a = 0; a < axes; ++a) total *= per_axis;
    while (spacing > kWindowTol) {
        const Matrix T = tangent_basis(arg);
        Vector centre = arg;
        for (long idx = 0; idx < total; ++idx) {
            Vector offset = Vector::Zero(n);
            long rem = idx;
            for (int a = 0; a < axes; ++a) {
                const double t = -spacing + 2.0 * spacing * static_cast<double>(rem % per_axis) / r;
                rem /= per_axis;
                offset += t * T.col(a);
            }
            const Vector s = (centre + offset).normalized();
            const double v = form_minimum(samples, n, s, scan.zeta_restriction);
            if (v < best) {
                best = v;
                arg = s;
            }
        }
        spacing *= 2.0 / r;
    }
    return best;
}

}  // namespace

double ellipticity_constant(const SystemCoefficients& coeffs, const std::vector<Vector>& x_samples,
                            const EllipticityScan& scan) {
    if (x_samples.empty()) throw InvalidArgument("ellipticity scan needs at least one x sample");
    if (scan.sphere_budget < static_cast<std::size_t>(coeffs.n())) {
        throw InvalidArgument("sphere budget must be at least n");
    }
    std::vector<Sample> samples;
    if (coeffs.is_quasilinear()) {
        if (scan.eta_samples.empty()) throw InvalidArgument("quasilinear ellipticity scan needs eta samples");
        samples = gather_quasilinear(coeffs, x_samples, scan.eta_samples);
    } else {
        samples = gather_linear(coeffs, x_samples);
    }
    return scan_sphere(samples, coeffs.n(), scan);
}

double ellipticity_constant(const SystemCoefficients& coeffs, const std::vector<Vector>& x_samples,
                            std::size_t sphere_budget) {
    EllipticityScan scan;
    scan.sphere_budget = sphere_budget;
    if (coeffs.is_quasilinear()) scan.eta_samples = default_eta_samples(coeffs.m(), coeffs.n());
    return ellipticity_constant(coeffs, x_samples, scan);
}

namespace {

ConditionReport check_samples(const std::vector<Sample>& samples, const SystemCoefficients& coeffs,
                              const ConvexBody& body, const ConditionOptions& options, double delta) {
    if (body.dim() != coeffs.m()) throw InvalidArgument("body dimension must equal the system size m");
    const int n = coeffs.n();
    ConditionReport report;
    report.delta_estimate = delta;
    report.reduced_delta = std::numeric_limits<double>::infinity();
    for (const auto& bn : normal_samples(body, options.normal_budget)) report.normals.push_back(bn.normal);
    report.sampled = true;
    report.notes.push_back("verified on " + std::to_string(samples.size()) + " coefficient samples and " +
                           std::to_string(report.normals.size()) +
                           (body.has_finite_normals() ? " facet normals" : " sampled normals"));

    if (!(delta > 0.0)) {
        ConditionFailure f;
        f.kind = FailureKind::NotElliptic;
        f.residual = delta;
        report.failures.push_back(f);
    }

    const auto sigmas = half_sphere_points(n, options.sphere_budget);
    for (const auto& s : samples) {
        for (std::size_t ni = 0; ni < report.normals.size(); ++ni) {
            const Vector& nu = report.normals[ni];
            Matrix reduced = Matrix::Zero(n, n);
            bool complete = true;
            const auto record = [&](const Matrix& M, CoefficientSlot slot) {
                const auto split = residual_split(M, nu);
                if (split.f.norm() <= options.tol * (1.0 + M.norm())) {
                    report.scalar_fields.push_back({s.x_index, s.eta_index, ni, slot, split.g});
                    return std::optional<double>(split.g);
                }
                report.failures.push_back(
                    {FailureKind::EigenResidual, s.x_index, s.eta_index, ni, nu, slot, split.f.norm()});
                return std::optional<double>();
            };
            for (int j = 0; j < n; ++j) {
                for (int k = j; k < n; ++k) {
                    const auto a = record(s.second[static_cast<std::size_t>(coeffs.pair_index(j, k))], {j, k});
                    if (a) {
                        reduced(j, k) = *a;
                        reduced(k, j) = *a;
                    } else {
                        complete = false;
                    }
                }
            }
            for (int j = 0; j < static_cast<int>(s.first.size()); ++j) record(s.first[static_cast<std::size_t>(j)], {j, -1});

            if (!complete) continue;
            double form_min = std::numeric_limits<double>::infinity();
            for (const auto& sigma : sigmas) form_min = std::min(form_min, sigma.dot(reduced * sigma));
            report.reduced_delta = std::min(report.reduced_delta, form_min);
            if (delta > 0.0 && form_min < delta - options.tol * (1.0 + reduced.norm())) {
                report.failures.push_back({FailureKind::ReducedEllipticity, s.x_index, s.eta_index, ni, nu, {0, 0},
                                           delta - form_min});
            }
        }
    }
    report.passed = report.failures.empty();
    return report;
}

std::vector<Vector> restriction_for(const ConvexBody& body, const ConditionOptions& options) {
    std::vector<Vector> zetas;
    if (!options.relaxed_ellipticity) return zetas;
    for (const auto& bn : normal_samples(body, options.normal_budget)) zetas.push_back(bn.normal);
    return zetas;
}

}  // namespace

ConditionReport check_linear_conditions(const SystemCoefficients& coeffs, const ConvexBody& body,
                                        const std::vector<Vector>& x_samples, const ConditionOptions& options) {
    if (x_samples.empty()) throw InvalidArgument("condition check needs at least one x sample");
    const auto samples = gather_linear(coeffs, x_samples);
    EllipticityScan scan;
    scan.sphere_budget = options.sphere_budget;
    scan.zeta_restriction = restriction_for(body, options);
    const double delta = scan_sphere(samples, coeffs.n(), scan);
    auto report = check_samples(samples, coeffs, body, options, delta);
    if (options.relaxed_ellipticity) report.notes.push_back("ellipticity checked for zeta in the normal set only");
    return report;
}

ConditionReport check_quasilinear_conditions(const SystemCoefficients& coeffs, const ConvexBody& body,
                                             const std::vector<Vector>& x_samples,
                                             const std::vector<Vector>& eta_samples, const ConditionOptions& options) {
    if (!coeffs.is_quasilinear()) throw InvalidArgument("quasilinear check needs a quasilinear sampler");
    if (x_samples.empty() || eta_samples.empty()) throw InvalidArgument("condition check needs x and eta samples");
    const auto samples = gather_quasilinear(coeffs, x_samples, eta_samples);
    EllipticityScan scan;
    scan.sphere_budget = options.sphere_budget;
    scan.zeta_restriction = restriction_for(body, options);
    const double delta = scan_sphere(samples, coeffs.n(), scan);
    auto report = check_samples(samples, coeffs, body, options, delta);
    report.notes.push_back("sampled verification over " + std::to_string(eta_samples.size()) + " eta values");
    return report;
}

std::vector<Vector> default_eta_samples(int m, int n, const std::vector<double>& magnitudes) {
    const int d = m * n;
    std::vector<Vector> out{Vector::Zero(d)};
    for (const double s : magnitudes) {
        for (int i = 0; i < d; ++i) {
            out.push_back(s * unit_vector(d, i));
            out.push_back(-s * unit_vector(d, i));
        }
    }
    return out;
}

bool in_cone(double h, const Vector& x) {
    const auto n = x.size();
    const double xn = x(n - 1);
    const double tangential = x.head(n - 1).squaredNorm();
    return xn < 0.0 && xn * xn > h * h * tangential;
}

ConeComplementResult cone_complement_predicate(double h, const Box& box) {
    if (!(h > 1.0)) throw InvalidArgument("cone aperture parameter h must exceed 1");
    if (box.lower.size() != box.upper.size() || box.lower.size() < 1) throw InvalidArgument("invalid box");
    const auto n = box.lower.size();
    ConeComplementResult r;
    r.bounded = true;
    // deepest point below the origin, tangentially closest to the axis
    Vector p(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) p(i) = std::clamp(0.0, box.lower(i), box.upper(i));
    p(n - 1) = box.lower(n - 1);
    r.outside_cone = !in_cone(h, p);
    if (!r.outside_cone) r.offending_point = p;
    r.branch = "bounded";
    return r;
}

ConeComplementResult cone_complement_predicate(double h, const std::vector<Vector>& points) {
    if (!(h > 1.0)) throw InvalidArgument("cone aperture parameter h must exceed 1");
    ConeComplementResult r;
    r.bounded = false;
    r.outside_cone = true;
    for (const auto& x : points) {
        if (in_cone(h, x)) {
            r.outside_cone = false;
            r.offending_point = x;
            break;
        }
    }
    r.branch = r.outside_cone ? "cone-complement" : "none";
    return r;
}

}  // namespace invset
