#pragma once

#include "invset/coefficients.hpp"
#include "invset/convex_body.hpp"
#include "invset/linalg.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace invset {

enum class StructureTag {
    RowsZeroedDiagonal,       ///< listed rows have zero off-diagonal entries
    RowsZeroedEqualDiagonal,  ///< as above, and the listed diagonal entries coincide
    ConjugatedDiagonal,       ///< A = (N^T)^{-1} D N^T for the facet normal matrix N
    Scalar,                   ///< A = c I
    Diagonal,                 ///< all off-diagonal entries zero
    Unconstrained,            ///< body outside the catalogue
};

[[nodiscard]] std::string to_string(StructureTag tag);

/// Exact description of the matrices A with A^T nu parallel to nu for every normal of a body.
struct StructureClass {
    StructureTag tag = StructureTag::Unconstrained;
    int dim = 0;
    /// Constrained rows (zero based) for the RowsZeroed* tags.
    std::vector<int> rows;
    /// Columns are the facet normals, for ConjugatedDiagonal.
    Matrix normals;
    std::string explanation;
};

/// One recovered scalar a(nu) per checked normal.
struct ClassifiedNormal {
    Vector normal;
    double scalar = 0.0;
};

struct Classification {
    std::vector<ClassifiedNormal> scalars;
    bool sampled = false;
    std::size_t sample_count = 0;
};

/// a(nu) for every normal of the body if M^T nu = a(nu) nu on all of them.
[[nodiscard]] std::optional<Classification> classify_matrix(const Matrix& M, const ConvexBody& body,
                                                            double tol = kEigenTol, std::size_t normal_budget = 64);

/// Structure class of the admissible matrices for a catalogued body.
[[nodiscard]] StructureClass admissible_family(const ConvexBody& body, std::size_t normal_budget = 64);

/// A random member of the class: free entries uniform in [-1, 1], diagonal entries in [0.5, 2].
[[nodiscard]] Matrix random_member(const StructureClass& cls, std::mt19937_64& rng);

/// Adds `size` to one structurally constrained entry (chosen at random) of a member.
/// For ConjugatedDiagonal the perturbation is an off-diagonal entry of D in the conjugated basis.
[[nodiscard]] Matrix perturb_constrained_entry(const StructureClass& cls, const Matrix& member, double size,
                                               std::mt19937_64& rng);

/// A = (N^T)^{-1} D N^T where N has the given normals as columns.
[[nodiscard]] Matrix cone_conjugation(const std::vector<Vector>& normals, const Vector& diagonal);

/// Dimension of the space of matrices satisfying the left-eigenvector condition on all
/// given normals, computed from the linear constraint system; with the basis found.
struct ConstraintSpace {
    int dimension = 0;
    std::vector<Matrix> basis;
};
[[nodiscard]] ConstraintSpace left_eigen_constraint_space(const std::vector<Vector>& normals, double rank_tol = 1e-10);

enum class FactorizationKind { DiagonalFamily, ScalarOperator, None };

[[nodiscard]] std::string to_string(FactorizationKind kind);

/// A_jk^{(ps)} = b_ps a^{(s)}_jk  (DiagonalFamily) or  A_jk = a_jk B  (ScalarOperator).
struct Factorization {
    FactorizationKind kind = FactorizationKind::None;
    /// The non-degenerate matrix ((b_ps)).
    Matrix b;
    /// Quadratic forms, n x n symmetric, normalized so the (n, n) entry is 1.
    /// One per column for DiagonalFamily, a single form for ScalarOperator.
    std::vector<Matrix> forms;
    /// Relative Frobenius reconstruction error.
    double residual = 0.0;
    /// Largest sigma_2 / sigma_1 over the per-column stacked coefficient matrices.
    double column_rank_ratio = 0.0;
    /// sigma_2 / sigma_1 of the whole stacked tensor.
    double tensor_rank_ratio = 0.0;
    double delta_estimate = 0.0;
    std::string diagnostic;
};

struct FactorizationOptions {
    double rank_tol = 1e-8;
    double degeneracy_tol = 1e-10;
    std::size_t sphere_budget = 128;
};

[[nodiscard]] Factorization detect_factorization(const SystemCoefficients& coeffs,
                                                 const FactorizationOptions& options = {});

/// Packed second-order tensors of A diag(L_1, ..., L_m): A_jk^{(ps)} = b_ps forms[s](j, k).
[[nodiscard]] SystemCoefficients::MatrixList compose_diagonal_family(const Matrix& b, const std::vector<Matrix>& forms);
/// Packed second-order tensors of B L: A_jk = form(j, k) B.
[[nodiscard]] SystemCoefficients::MatrixList compose_scalar_operator(const Matrix& b, const Matrix& form);

}  // namespace invset
