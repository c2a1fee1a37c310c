#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace invset {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Default tolerance for geometric predicates (membership, unit normals, ...).
inline constexpr double kGeomTol = 1e-9;

/// Tolerance on the Euclidean length of a stored normal.
inline constexpr double kUnitTol = 1e-12;

/// Default relative tolerance for left-eigenvector residuals.
inline constexpr double kEigenTol = 1e-8;

[[nodiscard]] inline bool is_unit(const Vector& v, double tol = kUnitTol) {
    return std::abs(v.norm() - 1.0) <= tol;
}

/// Unit coordinate vector e_i in R^m.
[[nodiscard]] inline Vector unit_vector(Eigen::Index m, Eigen::Index i) {
    Vector e = Vector::Zero(m);
    e(i) = 1.0;
    return e;
}

/// Smallest eigenvalue of the symmetric part (M + M^T)/2.
[[nodiscard]] inline double min_symmetric_eigenvalue(const Matrix& M) {
    const Matrix S = 0.5 * (M + M.transpose());
    if (S.rows() == 1) return S(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace invset
