#pragma once

#include "invset/linalg.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace invset {

/// Coefficients {A_jk}, {A_j} of sum A_jk d^2u/dx_j dx_k + sum A_j du/dx_j = 0,
/// or {B_jk(x, eta)} of the quasilinear system with eta = D_x u.
///
/// Second-order tensors are stored once per unordered pair j <= k (so A_jk = A_kj
/// holds by construction), in the order (0,0), (0,1), ..., (0,n-1), (1,1), ...
/// The gradient argument eta has m*n entries, eta[s*n + j] = d u_s / d x_j.
class SystemCoefficients {
public:
    using MatrixList = std::vector<Matrix>;
    using FieldSampler = std::function<MatrixList(const Vector& x)>;
    using QuasilinearSampler = std::function<MatrixList(const Vector& x, const Vector& eta)>;

    static SystemCoefficients constant(int n, int m, MatrixList second_order, MatrixList first_order = {});
    /// Builds from a full n x n array of matrices; throws unless A_jk == A_kj exactly.
    static SystemCoefficients from_full(int n, int m, const std::vector<MatrixList>& second_order,
                                        MatrixList first_order = {});
    static SystemCoefficients sampled(int n, int m, FieldSampler second_order, FieldSampler first_order = {});
    static SystemCoefficients quasilinear(int n, int m, QuasilinearSampler second_order);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] bool is_constant() const noexcept { return constant_second_.has_value(); }
    [[nodiscard]] bool is_quasilinear() const noexcept { return static_cast<bool>(quasilinear_); }
    [[nodiscard]] bool has_first_order() const noexcept;

    /// Number of stored second-order tensors, n(n+1)/2.
    [[nodiscard]] int pair_count() const noexcept { return n_ * (n_ + 1) / 2; }
    [[nodiscard]] static int pair_index(int n, int j, int k);
    [[nodiscard]] int pair_index(int j, int k) const { return pair_index(n_, j, k); }

    /// Declared bound on coefficient entries; sampled values beyond it are rejected.
    [[nodiscard]] double entry_bound() const noexcept { return entry_bound_; }
    void set_entry_bound(double bound) { entry_bound_ = bound; }

    [[nodiscard]] MatrixList second_order_at(const Vector& x) const;
    [[nodiscard]] MatrixList first_order_at(const Vector& x) const;
    [[nodiscard]] MatrixList quasilinear_at(const Vector& x, const Vector& eta) const;

    /// Constant tensors; throws for sampled coefficients.
    [[nodiscard]] const MatrixList& constant_second_order() const;
    [[nodiscard]] const MatrixList& constant_first_order() const;

    /// P * coefficients, for the equivalent left-multiplied system.
    [[nodiscard]] SystemCoefficients left_multiplied(const Matrix& P) const;

private:
    SystemCoefficients(int n, int m) : n_(n), m_(m) {}

    void validate(const MatrixList& list, std::size_t expected, const char* what) const;

    int n_;
    int m_;
    double entry_bound_ = 1e8;
    std::optional<MatrixList> constant_second_;
    std::optional<MatrixList> constant_first_;
    FieldSampler second_sampler_;
    FieldSampler first_sampler_;
    QuasilinearSampler quasilinear_;
};

/// Symbol sum_{j,k} A_jk sigma_j sigma_k from the packed pair list.
[[nodiscard]] Matrix symbol(const SystemCoefficients::MatrixList& second_order, int n, const Vector& sigma);

}  // namespace invset
