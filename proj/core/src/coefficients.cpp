#include "invset/coefficients.hpp"

#include "invset/errors.hpp"

#include <cmath>
#include <sstream>

namespace invset {

namespace {

void require_dims(int n, int m) {
    if (n < 1 || m < 1) throw InvalidArgument("system needs n >= 1 and m >= 1");
}

}  // namespace

int SystemCoefficients::pair_index(int n, int j, int k) {
    if (j > k) std::swap(j, k);
    if (j < 0 || k >= n) throw InvalidArgument("derivative index out of range");
    return j * n - j * (j - 1) / 2 + (k - j);
}

void SystemCoefficients::validate(const MatrixList& list, std::size_t expected, const char* what) const {
    if (list.size() != expected) {
        std::ostringstream os;
        os << what << ": expected " << expected << " matrices, got " << list.size();
        throw SamplerFailure(os.str());
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        const Matrix& M = list[i];
        if (M.rows() != m_ || M.cols() != m_) {
            std::ostringstream os;
            os << what << ": matrix " << i << " is " << M.rows() << "x" << M.cols() << ", expected " << m_ << "x"
               << m_;
            throw SamplerFailure(os.str());
        }
        if (!M.allFinite() || M.cwiseAbs().maxCoeff() > entry_bound_) {
            std::ostringstream os;
            os << what << ": matrix " << i << " has a non-finite entry or exceeds the bound " << entry_bound_;
            throw SamplerFailure(os.str());
        }
    }
}

SystemCoefficients SystemCoefficients::constant(int n, int m, MatrixList second_order, MatrixList first_order) {
    require_dims(n, m);
    SystemCoefficients c(n, m);
    c.validate(second_order, static_cast<std::size_t>(c.pair_count()), "second-order coefficients");
    if (!first_order.empty()) c.validate(first_order, static_cast<std::size_t>(n), "first-order coefficients");
    c.constant_second_ = std::move(second_order);
    c.constant_first_ = std::move(first_order);
    return c;
}

SystemCoefficients SystemCoefficients::from_full(int n, int m, const std::vector<MatrixList>& second_order,
                                                 MatrixList first_order) {
    require_dims(n, m);
    if (second_order.size() != static_cast<std::size_t>(n)) throw InvalidArgument("need an n x n array of matrices");
    MatrixList packed;
    for (int j = 0; j < n; ++j) {
        if (second_order[static_cast<std::size_t>(j)].size() != static_cast<std::size_t>(n)) {
            throw InvalidArgument("need an n x n array of matrices");
        }
        for (int k = j; k < n; ++k) {
            const Matrix& Ajk = second_order[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            const Matrix& Akj = second_order[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            if (Ajk.rows() != Akj.rows() || Ajk.cols() != Akj.cols() || Ajk != Akj) {
                throw InvalidArgument("second-order coefficients must satisfy A_jk = A_kj (j=" + std::to_string(j) +
                                      ", k=" + std::to_string(k) + ")");
            }
            packed.push_back(Ajk);
        }
    }
    return constant(n, m, std::move(packed), std::move(first_order));
}

SystemCoefficients SystemCoefficients::sampled(int n, int m, FieldSampler second_order, FieldSampler first_order) {
    require_dims(n, m);
    if (!second_order) throw InvalidArgument("second-order sampler is required");
    SystemCoefficients c(n, m);
    c.second_sampler_ = std::move(second_order);
    c.first_sampler_ = std::move(first_order);
    return c;
}

SystemCoefficients SystemCoefficients::quasilinear(int n, int m, QuasilinearSampler second_order) {
    require_dims(n, m);
    if (!second_order) throw InvalidArgument("quasilinear sampler is required");
    SystemCoefficients c(n, m);
    c.quasilinear_ = std::move(second_order);
    return c;
}

bool SystemCoefficients::has_first_order() const noexcept {
    if (constant_first_) return !constant_first_->empty();
    return static_cast<bool>(first_sampler_);
}

SystemCoefficients::MatrixList SystemCoefficients::second_order_at(const Vector& x) const {
    if (constant_second_) return *constant_second_;
    if (!second_sampler_) throw InvalidArgument("system has no linear second-order part (quasilinear only)");
    MatrixList out = second_sampler_(x);
    validate(out, static_cast<std::size_t>(pair_count()), "second-order sampler");
    return out;
}

SystemCoefficients::MatrixList SystemCoefficients::first_order_at(const Vector& x) const {
    if (constant_first_) return *constant_first_;
    if (!first_sampler_) return {};
    MatrixList out = first_sampler_(x);
    validate(out, static_cast<std::size_t>(n_), "first-order sampler");
    return out;
}

SystemCoefficients::MatrixList SystemCoefficients::quasilinear_at(const Vector& x, const Vector& eta) const {
    if (!quasilinear_) throw InvalidArgument("system has no quasilinear part");
    if (eta.size() != static_cast<Eigen::Index>(m_) * n_) throw InvalidArgument("eta must have m*n entries");
    MatrixList out = quasilinear_(x, eta);
    validate(out, static_cast<std::size_t>(pair_count()), "quasilinear sampler");
    return out;
}

const SystemCoefficients::MatrixList& SystemCoefficients::constant_second_order() const {
    if (!constant_second_) throw InvalidArgument("coefficients are not constant");
    return *constant_second_;
}

const SystemCoefficients::MatrixList& SystemCoefficients::constant_first_order() const {
    if (!constant_first_) throw InvalidArgument("coefficients are not constant");
    return *constant_first_;
}

SystemCoefficients SystemCoefficients::left_multiplied(const Matrix& P) const {
    if (P.rows() != m_ || P.cols() != m_) throw InvalidArgument("left multiplier must be m x m");
    const auto mul = [P](MatrixList list) {
        for (auto& M : list) M = P * M;
        return list;
    };
    SystemCoefficients c(n_, m_);
    c.entry_bound_ = entry_bound_;
    if (constant_second_) c.constant_second_ = mul(*constant_second_);
    if (constant_first_) c.constant_first_ = mul(*constant_first_);
    if (second_sampler_) c.second_sampler_ = [s = second_sampler_, mul](const Vector& x) { return mul(s(x)); };
    if (first_sampler_) c.first_sampler_ = [s = first_sampler_, mul](const Vector& x) { return mul(s(x)); };
    if (quasilinear_) {
        c.quasilinear_ = [s = quasilinear_, mul](const Vector& x, const Vector& eta) { return mul(s(x, eta)); };
    }
    return c;
}

Matrix symbol(const SystemCoefficients::MatrixList& second_order, int n, const Vector& sigma) {
    const auto m = second_order.front().rows();
    Matrix M = Matrix::Zero(m, m);
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            const double w = (j == k ? 1.0 : 2.0) * sigma(j) * sigma(k);
            M += w * second_order[static_cast<std::size_t>(SystemCoefficients::pair_index(n, j, k))];
        }
    }
    return M;
}

}  // namespace invset
