#include "invset/matrix_structure.hpp"

#include "invset/errors.hpp"
#include "invset/system_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invset {

std::string to_string(StructureTag tag) {
    switch (tag) {
        case StructureTag::RowsZeroedDiagonal: return "RowsZeroedDiagonal";
        case StructureTag::RowsZeroedEqualDiagonal: return "RowsZeroedEqualDiagonal";
        case StructureTag::ConjugatedDiagonal: return "ConjugatedDiagonal";
        case StructureTag::Scalar: return "Scalar";
        case StructureTag::Diagonal: return "Diagonal";
        case StructureTag::Unconstrained: return "Unconstrained";
    }
    return "Unknown";
}

std::string to_string(FactorizationKind kind) {
    switch (kind) {
        case FactorizationKind::DiagonalFamily: return "DiagonalFamily";
        case FactorizationKind::ScalarOperator: return "ScalarOperator";
        case FactorizationKind::None: return "None";
    }
    return "Unknown";
}

std::optional<Classification> classify_matrix(const Matrix& M, const ConvexBody& body, double tol,
                                              std::size_t normal_budget) {
    if (M.rows() != body.dim() || M.cols() != body.dim()) throw InvalidArgument("matrix order must equal body dimension");
    Classification out;
    const auto normals = normal_samples(body, normal_budget);
    out.sampled = !body.has_finite_normals();
    out.sample_count = normals.size();
    for (const auto& bn : normals) {
        const auto a = left_eigen_scalar(M, bn.normal, tol);
        if (!a) return std::nullopt;
        out.scalars.push_back({bn.normal, *a});
    }
    return out;
}

namespace {

// Index of the axis if v = +-e_i, otherwise -1.
int axis_of(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(std::abs(v(i)) - 1.0) < 1e-12 && std::abs(v.norm() - 1.0) < 1e-12) return static_cast<int>(i);
    }
    return -1;
}

// Greedily collects m+1 normals whose every m-subset is independent.
std::optional<std::vector<Vector>> generic_subset(const std::vector<Vector>& normals, int m, double threshold = 1e-6) {
    std::vector<Vector> chosen;
    for (const auto& nu : normals) {
        auto trial = chosen;
        trial.push_back(nu);
        if (trial.size() < static_cast<std::size_t>(m)) {
            Matrix N(m, static_cast<Eigen::Index>(trial.size()));
            for (std::size_t c = 0; c < trial.size(); ++c) N.col(static_cast<Eigen::Index>(c)) = trial[c];
            Eigen::JacobiSVD<Matrix> svd(N);
            if (svd.singularValues().minCoeff() <= threshold) continue;
        } else if (first_dependent_subset(trial, threshold)) {
            continue;
        }
        chosen = std::move(trial);
        if (chosen.size() == static_cast<std::size_t>(m + 1)) return chosen;
    }
    return std::nullopt;
}

StructureClass rows_class(int m, std::vector<int> rows, std::string why) {
    std::sort(rows.begin(), rows.end());
    StructureClass c;
    c.dim = m;
    c.tag = rows.size() == static_cast<std::size_t>(m) ? StructureTag::Diagonal : StructureTag::RowsZeroedDiagonal;
    c.rows = std::move(rows);
    c.explanation = std::move(why);
    return c;
}

StructureClass from_normal_set(int m, const std::vector<Vector>& normals, const std::string& origin) {
    StructureClass c;
    c.dim = m;
    if (m == 1 || generic_subset(normals, m)) {
        c.tag = StructureTag::Scalar;
        c.explanation = origin + ": m+1 normals in general position force a scalar matrix";
        return c;
    }
    std::vector<int> rows;
    for (const auto& nu : normals) {
        const int ax = axis_of(nu);
        if (ax < 0) {
            c.tag = StructureTag::Unconstrained;
            c.explanation = origin + ": normal set is neither axis aligned nor in general position";
            return c;
        }
        if (std::find(rows.begin(), rows.end(), ax) == rows.end()) rows.push_back(ax);
    }
    return rows_class(m, rows, origin + ": axis-aligned normals constrain the matching rows");
}

}  // namespace

StructureClass admissible_family(const ConvexBody& body, std::size_t normal_budget) {
    const int m = body.dim();
    switch (body.kind()) {
        case BodyKind::HalfSpace: {
            const auto& h = std::get<HalfSpace>(body.data());
            const int ax = axis_of(h.normal);
            if (ax >= 0) return rows_class(m, {ax}, "coordinate half-space");
            StructureClass c;
            c.dim = m;
            c.explanation = "half-space with an oblique normal is not catalogued; only A^T nu = a nu is required";
            return c;
        }
        case BodyKind::PolyhedralAngle:
            return rows_class(m, std::get<PolyhedralAngle>(body.data()).indices, "polyhedral angle");
        case BodyKind::PolyhedralCylinder:
            return rows_class(m, std::get<PolyhedralCylinder>(body.data()).indices, "polyhedral cylinder");
        case BodyKind::SphericalCylinder: {
            const auto& s = std::get<SphericalCylinder>(body.data());
            StructureClass c;
            c.dim = m;
            if (s.trailing == m) {
                c.tag = StructureTag::Scalar;
                c.explanation = "ball-like spherical cylinder";
                return c;
            }
            for (int i = m - s.trailing; i < m; ++i) c.rows.push_back(i);
            c.tag = s.trailing == 1 ? StructureTag::RowsZeroedDiagonal : StructureTag::RowsZeroedEqualDiagonal;
            c.explanation = "spherical cylinder";
            return c;
        }
        case BodyKind::PolyhedralCone: {
            const auto& k = std::get<PolyhedralCone>(body.data());
            StructureClass c;
            c.dim = m;
            const auto p = static_cast<int>(k.normals.size());
            if (p == m) {
                c.tag = StructureTag::ConjugatedDiagonal;
                c.normals.resize(m, m);
                for (int i = 0; i < m; ++i) c.normals.col(i) = k.normals[static_cast<std::size_t>(i)];
                c.explanation = "polyhedral cone with m facets";
            } else if (p > m) {
                c.tag = StructureTag::Scalar;
                c.explanation = "polyhedral cone with more than m facets";
            } else {
                c.explanation = "polyhedral cone with fewer than m facets is not catalogued";
            }
            return c;
        }
        case BodyKind::Polytope: {
            std::vector<Vector> normals;
            for (const auto& bn : std::get<Polytope>(body.data()).constraints) normals.push_back(bn.normal);
            return from_normal_set(m, normals, "polytope");
        }
        case BodyKind::Ball: {
            StructureClass c;
            c.dim = m;
            c.tag = StructureTag::Scalar;
            c.explanation = "compact body with smooth boundary";
            return c;
        }
        case BodyKind::SampledSmooth: {
            std::vector<Vector> normals;
            for (const auto& bn : normal_samples(body, normal_budget)) normals.push_back(bn.normal);
            auto c = from_normal_set(m, normals, "sampled smooth body");
            c.explanation += " (sampled)";
            return c;
        }
    }
    return {};
}

Matrix random_member(const StructureClass& cls, std::mt19937_64& rng) {
    const int m = cls.dim;
    std::uniform_real_distribution<double> free(-1.0, 1.0);
    std::uniform_real_distribution<double> diag(0.5, 2.0);
    Matrix A(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = i == j ? diag(rng) : free(rng);
    switch (cls.tag) {
        case StructureTag::Unconstrained: return A;
        case StructureTag::Scalar: return diag(rng) * Matrix::Identity(m, m);
        case StructureTag::Diagonal: return Matrix(A.diagonal().asDiagonal());
        case StructureTag::RowsZeroedDiagonal:
        case StructureTag::RowsZeroedEqualDiagonal: {
            const double common = diag(rng);
            for (const int r : cls.rows) {
                for (int c = 0; c < m; ++c)
                    if (c != r) A(r, c) = 0.0;
                if (cls.tag == StructureTag::RowsZeroedEqualDiagonal) A(r, r) = common;
            }
            return A;
        }
        case StructureTag::ConjugatedDiagonal: {
            Vector d(m);
            for (int i = 0; i < m; ++i) d(i) = diag(rng);
            std::vector<Vector> normals;
            for (int i = 0; i < m; ++i) normals.push_back(cls.normals.col(i));
            return cone_conjugation(normals, d);
        }
    }
    return A;
}

Matrix perturb_constrained_entry(const StructureClass& cls, const Matrix& member, double size, std::mt19937_64& rng) {
    const int m = cls.dim;
    Matrix A = member;
    const auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const auto off_diagonal_column = [&](int row) {
        int c = pick(0, m - 2);
        if (c >= row) ++c;
        return c;
    };
    switch (cls.tag) {
        case StructureTag::Unconstrained: throw InvalidArgument("unconstrained class has no structural entries");
        case StructureTag::Scalar: {
            if (m == 1) throw InvalidArgument("every 1x1 matrix is scalar");
            const int r = pick(0, m - 1);
            A(r, pick(0, m - 1)) += size;
            return A;
        }
        case StructureTag::Diagonal: {
            if (m == 1) throw InvalidArgument("every 1x1 matrix is diagonal");
            const int r = pick(0, m - 1);
            A(r, off_diagonal_column(r)) += size;
            return A;
        }
        case StructureTag::RowsZeroedDiagonal:
        case StructureTag::RowsZeroedEqualDiagonal: {
            const bool diag_move = cls.tag == StructureTag::RowsZeroedEqualDiagonal && cls.rows.size() > 1 &&
                                   (m == 1 || pick(0, 1) == 0);
            const int r = cls.rows[static_cast<std::size_t>(pick(0, static_cast<int>(cls.rows.size()) - 1))];
            if (diag_move) {
                A(r, r) += size;
            } else {
                if (m == 1) throw InvalidArgument("no off-diagonal entries in a 1x1 matrix");
                A(r, off_diagonal_column(r)) += size;
            }
            return A;
        }
        case StructureTag::ConjugatedDiagonal: {
            if (m == 1) throw InvalidArgument("every 1x1 matrix is diagonal");
            const int r = pick(0, m - 1);
            Matrix E = Matrix::Zero(m, m);
            E(r, off_diagonal_column(r)) = size;
            const Matrix Nt = cls.normals.transpose();
            return A + Nt.inverse() * E * Nt;
        }
    }
    return A;
}

Matrix cone_conjugation(const std::vector<Vector>& normals, const Vector& diagonal) {
    const auto m = diagonal.size();
    if (normals.size() != static_cast<std::size_t>(m)) throw InvalidArgument("need exactly m normals");
    Matrix N(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector& nu = normals[static_cast<std::size_t>(i)];
        if (nu.size() != m || !is_unit(nu)) throw InvalidArgument("cone normals must be unit m-vectors");
        N.col(i) = nu;
    }
    const Matrix Nt = N.transpose();
    Eigen::FullPivLU<Matrix> lu(Nt);
    if (std::abs(Nt.determinant()) <= 1e-10 || !lu.isInvertible()) {
        throw DegenerateBody("normal matrix is singular (|det N| <= 1e-10)");
    }
    return lu.solve(Matrix(diagonal.asDiagonal()) * Nt);
}

ConstraintSpace left_eigen_constraint_space(const std::vector<Vector>& normals, double rank_tol) {
    if (normals.empty()) throw InvalidArgument("need at least one normal");
    const auto m = normals.front().size();
    const auto unknowns = m * m;
    // unknown vector: A(r, c) at index r * m + c; constraint (I - nu nu^T) A^T nu = 0
    Matrix C = Matrix::Zero(static_cast<Eigen::Index>(normals.size()) * m, unknowns);
    for (std::size_t t = 0; t < normals.size(); ++t) {
        const Vector& nu = normals[t];
        const Matrix P = Matrix::Identity(m, m) - nu * nu.transpose();
        // (A^T nu)_c = sum_r A(r, c) nu_r
        Matrix G = Matrix::Zero(m, unknowns);
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index r = 0; r < m; ++r) G(c, r * m + c) = nu(r);
        C.middleRows(static_cast<Eigen::Index>(t) * m, m) = P * G;
    }
    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double top = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rank_tol * std::max(1.0, top)) ++rank;
    ConstraintSpace out;
    out.dimension = static_cast<int>(unknowns - rank);
    for (Eigen::Index i = rank; i < unknowns; ++i) {
        Matrix B(m, m);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c) B(r, c) = svd.matrixV()(r * m + c, i);
        out.basis.push_back(B);
    }
    return out;
}

namespace {

Matrix form_from_packed(const Vector& v, int n) {
    Matrix F(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) F(j, k) = F(k, j) = v(SystemCoefficients::pair_index(n, j, k));
    return F;
}

struct RankOne {
    double ratio = 0.0;
    Vector left;   // sigma_1 u_1
    Vector right;  // v_1
};

RankOne rank_one(const Matrix& S) {
    Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    RankOne r;
    r.ratio = (s.size() > 1 && s(0) > 0.0) ? s(1) / s(0) : 0.0;
    r.left = s(0) * svd.matrixU().col(0);
    r.right = svd.matrixV().col(0);
    return r;
}

// Fixes the gauge so the (n, n) entry of the form is 1; false if that entry vanishes.
bool normalize_gauge(RankOne& r, int n) {
    const double nn = r.right(SystemCoefficients::pair_index(n, n - 1, n - 1));
    if (std::abs(nn) <= 1e-12 * r.right.norm()) return false;
    r.left *= nn;
    r.right /= nn;
    return true;
}

bool positive_definite(const Matrix& F) { return min_symmetric_eigenvalue(F) > 0.0; }

}  // namespace

SystemCoefficients::MatrixList compose_diagonal_family(const Matrix& b, const std::vector<Matrix>& forms) {
    const auto m = b.rows();
    if (b.cols() != m || forms.size() != static_cast<std::size_t>(m)) throw InvalidArgument("need m forms for an m x m b");
    const int n = static_cast<int>(forms.front().rows());
    SystemCoefficients::MatrixList out;
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            Matrix A(m, m);
            for (Eigen::Index s = 0; s < m; ++s) A.col(s) = b.col(s) * forms[static_cast<std::size_t>(s)](j, k);
            out.push_back(A);
        }
    }
    return out;
}

SystemCoefficients::MatrixList compose_scalar_operator(const Matrix& b, const Matrix& form) {
    const int n = static_cast<int>(form.rows());
    SystemCoefficients::MatrixList out;
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) out.push_back(form(j, k) * b);
    return out;
}

Factorization detect_factorization(const SystemCoefficients& coeffs, const FactorizationOptions& options) {
    const auto& A = coeffs.constant_second_order();
    const int n = coeffs.n();
    const int m = coeffs.m();
    const int P = coeffs.pair_count();

    Factorization out;
    double total = 0.0;
    for (const auto& M : A) total += M.squaredNorm();
    total = std::sqrt(total);
    if (total == 0.0) {
        out.diagnostic = "all second-order coefficients vanish";
        return out;
    }

    std::vector<RankOne> columns;
    for (int s = 0; s < m; ++s) {
        Matrix S(m, P);
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < P; ++q) S(p, q) = A[static_cast<std::size_t>(q)](p, s);
        columns.push_back(rank_one(S));
        out.column_rank_ratio = std::max(out.column_rank_ratio, columns.back().ratio);
    }
    Matrix T(m * m, P);
    for (int p = 0; p < m; ++p)
        for (int s = 0; s < m; ++s)
            for (int q = 0; q < P; ++q) T(p * m + s, q) = A[static_cast<std::size_t>(q)](p, s);
    RankOne whole = rank_one(T);
    out.tensor_rank_ratio = whole.ratio;

    if (out.column_rank_ratio > options.rank_tol) {
        std::ostringstream os;
        os << "a column of the coefficient tensor has numerical rank > 1 (sigma2/sigma1 = " << out.column_rank_ratio
           << ")";
        out.diagnostic = os.str();
        return out;
    }

    Factorization candidate;
    SystemCoefficients::MatrixList rebuilt;
    if (whole.ratio <= options.rank_tol) {
        if (!normalize_gauge(whole, n)) {
            out.diagnostic = "the d^2/dx_n^2 coefficient of the common form vanishes";
            return out;
        }
        candidate.kind = FactorizationKind::ScalarOperator;
        candidate.b.resize(m, m);
        for (int p = 0; p < m; ++p)
            for (int s = 0; s < m; ++s) candidate.b(p, s) = whole.left(p * m + s);
        candidate.forms.push_back(form_from_packed(whole.right, n));
        rebuilt = compose_scalar_operator(candidate.b, candidate.forms.front());
    } else {
        candidate.kind = FactorizationKind::DiagonalFamily;
        candidate.b.resize(m, m);
        for (int s = 0; s < m; ++s) {
            auto& col = columns[static_cast<std::size_t>(s)];
            if (!normalize_gauge(col, n)) {
                out.diagnostic = "the d^2/dx_n^2 coefficient of form " + std::to_string(s) + " vanishes";
                return out;
            }
            candidate.b.col(s) = col.left;
            candidate.forms.push_back(form_from_packed(col.right, n));
        }
        rebuilt = compose_diagonal_family(candidate.b, candidate.forms);
    }

    for (std::size_t s = 0; s < candidate.forms.size(); ++s) {
        if (!positive_definite(candidate.forms[s])) {
            out.diagnostic = "recovered form " + std::to_string(s) + " is not elliptic";
            return out;
        }
    }
    const double bscale = std::pow(std::max(candidate.b.norm(), 1e-300), m);
    if (std::abs(candidate.b.determinant()) <= options.degeneracy_tol * bscale) {
        out.diagnostic = "recovered matrix b is degenerate";
        return out;
    }
    double err = 0.0;
    for (int q = 0; q < P; ++q) err += (rebuilt[static_cast<std::size_t>(q)] - A[static_cast<std::size_t>(q)]).squaredNorm();
    candidate.residual = std::sqrt(err) / total;
    candidate.column_rank_ratio = out.column_rank_ratio;
    candidate.tensor_rank_ratio = out.tensor_rank_ratio;

    const Vector origin = Vector::Zero(n);
    candidate.delta_estimate = ellipticity_constant(coeffs, {origin}, options.sphere_budget);
    if (!(candidate.delta_estimate > 0.0)) {
        out.diagnostic = "factorized operator is not strongly elliptic";
        out.delta_estimate = candidate.delta_estimate;
        return out;
    }
    return candidate;
}

}  // namespace invset
