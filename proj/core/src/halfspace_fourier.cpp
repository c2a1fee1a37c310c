#include "invset/halfspace_fourier.hpp"

#include "invset/errors.hpp"
#include "invset/system_conditions.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace invset {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string describe_xi(const Vector& xi) {
    std::ostringstream os;
    os << "xi' = (";
    for (Eigen::Index i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi(i);
    os << ")";
    return os.str();
}

// Signed frequency index of FFT bin k.
int signed_index(int k, int N) { return k <= N / 2 ? k : k - N; }

// In-place multi-dimensional FFT over an N^d array with axis 0 fastest.
void transform(std::vector<Complex>& data, int d, int N, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(static_cast<std::size_t>(N));
    std::vector<Complex> out(static_cast<std::size_t>(N));
    const std::size_t n = static_cast<std::size_t>(N);
    const std::size_t lines = d == 1 ? 1 : n;
    for (int axis = 0; axis < d; ++axis) {
        const std::size_t stride = axis == 0 ? 1 : n;
        for (std::size_t line = 0; line < lines; ++line) {
            const std::size_t base = axis == 0 ? line * n : line;
            for (std::size_t i = 0; i < n; ++i) in[i] = data[base + i * stride];
            if (inverse) {
                fft.inv(out, in);
            } else {
                fft.fwd(out, in);
            }
            for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = out[i];
        }
    }
}

}  // namespace

TangentialGrid::TangentialGrid(int d_, double L_, int N_) : d(d_), L(L_), N(N_) {
    if (d != 1 && d != 2) throw InvalidArgument("tangential dimension must be 1 or 2 (n = 2 or 3)");
    if (!(L > 0.0)) throw InvalidArgument("cell size L must be positive");
    if (N < 2 || (N & (N - 1)) != 0) throw InvalidArgument("samples per axis N must be a power of two");
}

std::size_t TangentialGrid::size() const {
    return d == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
}

Vector TangentialGrid::coordinate(std::size_t node) const {
    Vector x(d);
    const double h = L / N;
    x(0) = static_cast<double>(node % static_cast<std::size_t>(N)) * h;
    if (d == 2) x(1) = static_cast<double>(node / static_cast<std::size_t>(N)) * h;
    return x;
}

PeriodicField::PeriodicField(TangentialGrid grid, int m) : grid_(grid), m_(m) {
    values_ = Vector::Zero(static_cast<Eigen::Index>(grid_.size()) * m_);
}

PeriodicField::PeriodicField(TangentialGrid grid, int m, Vector values)
    : grid_(grid), m_(m), values_(std::move(values)) {
    if (values_.size() != static_cast<Eigen::Index>(grid_.size()) * m_) {
        throw InvalidArgument("periodic field has the wrong number of values");
    }
}

CMatrix ModeSolution::response(double h) const {
    const CMatrix E = (Complex(h, 0.0) * generator).exp();
    return basis * E * basis.partialPivLu().inverse();
}

ModeSolution stable_modes(const SystemCoefficients::MatrixList& second, int n, const Vector& xi,
                          const HalfSpaceOptions& options) {
    if (n < 2) throw InvalidArgument("half-space problems need n >= 2");
    if (xi.size() != n - 1) throw InvalidArgument("tangential frequency must have n - 1 entries");
    if (static_cast<int>(second.size()) != n * (n + 1) / 2) throw InvalidArgument("wrong number of second-order tensors");
    const auto m = second.front().rows();
    const int last = n - 1;
    const auto A = [&](int j, int k) -> const Matrix& {
        return second[static_cast<std::size_t>(SystemCoefficients::pair_index(n, std::min(j, k), std::max(j, k)))];
    };
    const CMatrix Ann = A(last, last).cast<Complex>();
    CMatrix B = CMatrix::Zero(m, m);
    CMatrix C = CMatrix::Zero(m, m);
    for (int j = 0; j < last; ++j) {
        B += Complex(0.0, 2.0 * xi(j)) * A(j, last).cast<Complex>();
        for (int k = 0; k < last; ++k) C -= (xi(j) * xi(k)) * A(j, k).cast<Complex>();
    }
    const Eigen::PartialPivLU<CMatrix> lu(Ann);
    CMatrix L = CMatrix::Zero(2 * m, 2 * m);
    L.topRightCorner(m, m) = CMatrix::Identity(m, m);
    L.bottomLeftCorner(m, m) = -lu.solve(C);
    L.bottomRightCorner(m, m) = -lu.solve(B);

    ModeSolution mode;
    mode.xi = xi;
    const double eps = options.eps_scale * std::max(xi.norm(), 1.0);
    const Eigen::ComplexEigenSolver<CMatrix> es(L, false);
    if (es.info() != Eigen::Success) throw SpectralFailure("eigenvalue computation failed at " + describe_xi(xi));
    std::vector<Complex> stable;
    mode.min_abs_real = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex l = es.eigenvalues()(i);
        mode.min_abs_real = std::min(mode.min_abs_real, std::abs(l.real()));
        if (l.real() < -eps) stable.push_back(l);
    }
    if (mode.min_abs_real < eps || static_cast<Eigen::Index>(stable.size()) != m) {
        std::ostringstream os;
        os << "stable/unstable split is not " << m << "/" << m << " at " << describe_xi(xi) << " (min |Re l| = "
           << mode.min_abs_real << ", eps_spec = " << eps << ")";
        throw SpectralFailure(os.str());
    }
    // a defective root is only found to about sqrt(machine eps); the mean of its cluster is accurate
    std::vector<int> cluster(stable.size());
    for (std::size_t i = 0; i < stable.size(); ++i) cluster[i] = static_cast<int>(i);
    const double scale = std::max(1.0, std::abs(stable.front()));
    for (std::size_t i = 0; i < stable.size(); ++i) {
        for (std::size_t j = i + 1; j < stable.size(); ++j) {
            if (std::abs(stable[i] - stable[j]) <= 1e-6 * scale) cluster[j] = cluster[i];
        }
    }
    std::vector<Complex> polished(stable.size());
    for (std::size_t i = 0; i < stable.size(); ++i) {
        Complex sum = 0.0;
        int count = 0;
        for (std::size_t j = 0; j < stable.size(); ++j) {
            if (cluster[j] == cluster[i]) {
                sum += stable[j];
                ++count;
            }
        }
        polished[i] = sum / static_cast<double>(count);
    }
    stable = std::move(polished);
    std::sort(stable.begin(), stable.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    mode.exponents = Eigen::Map<const CVector>(stable.data(), m);

    // sign(L) by scaled Newton iteration; (I - sign(L)) / 2 projects onto the decaying subspace
    CMatrix S = L;
    for (int it = 0; it < 100; ++it) {
        const CMatrix Sinv = S.partialPivLu().inverse();
        const double mu = std::sqrt(Sinv.norm() / S.norm());
        CMatrix next = 0.5 * (mu * S + Sinv / mu);
        const double change = (next - S).norm();
        S = std::move(next);
        if (change <= 1e-14 * S.norm()) break;
    }
    const CMatrix P = 0.5 * (CMatrix::Identity(2 * m, 2 * m) - S);
    const Eigen::ColPivHouseholderQR<CMatrix> qr(P);
    const CMatrix W = qr.householderQ() * CMatrix::Identity(2 * m, m);
    mode.generator = W.adjoint() * L * W;
    mode.basis = W.topRows(m);

    const Eigen::JacobiSVD<CMatrix> svd(mode.basis);
    const auto& sv = svd.singularValues();
    const double rcond = sv(sv.size() - 1) / sv(0);
    if (!(rcond >= options.matching_rcond)) {
        std::ostringstream os;
        os << "singular matching system at " << describe_xi(xi) << " (rcond = " << rcond << ")";
        throw SpectralFailure(os.str());
    }
    return mode;
}

HalfSpaceSolver::HalfSpaceSolver(const SystemCoefficients& coeffs, TangentialGrid grid, std::vector<double> heights,
                                 HalfSpaceOptions options)
    : m_(coeffs.m()), grid_(grid), heights_(std::move(heights)) {
    if (!coeffs.is_constant() || coeffs.has_first_order()) {
        throw InvalidArgument("the half-space solver needs constant second-order coefficients only");
    }
    if (coeffs.n() != grid_.d + 1) throw InvalidArgument("tangential grid dimension must be n - 1");
    for (const double h : heights_) {
        if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidArgument("heights must be finite and non-negative");
    }
    delta_ = ellipticity_constant(coeffs, {Vector::Zero(coeffs.n())}, options.ellipticity_budget);
    if (!(delta_ > 0.0)) {
        std::ostringstream os;
        os << "coefficients are not strongly elliptic (estimate " << delta_ << ")";
        throw InvalidArgument(os.str());
    }
    const auto& second = coeffs.constant_second_order();
    const int N = grid_.N;
    const std::size_t modes = grid_.size();
    response_.assign(modes * heights_.size(), CMatrix());
    min_abs_real_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < modes; ++k) {
        std::vector<int> idx{static_cast<int>(k % static_cast<std::size_t>(N))};
        if (grid_.d == 2) idx.push_back(static_cast<int>(k / static_cast<std::size_t>(N)));
        const bool zero = std::all_of(idx.begin(), idx.end(), [](int i) { return i == 0; });
        if (zero) {
            for (std::size_t h = 0; h < heights_.size(); ++h) {
                response_[h * modes + k] = options.zero_mode_gain * CMatrix::Identity(m_, m_);
            }
            continue;
        }
        // Nyquist bins stand for both +xi and -xi; averaging keeps the output real.
        std::vector<Vector> variants{Vector(grid_.d)};
        for (int a = 0; a < grid_.d; ++a) {
            const double xi = kTwoPi * signed_index(idx[static_cast<std::size_t>(a)], N) / grid_.L;
            const bool nyquist = idx[static_cast<std::size_t>(a)] == N / 2;
            const std::size_t count = variants.size();
            for (std::size_t v = 0; v < count; ++v) {
                variants[v](a) = xi;
                if (nyquist) {
                    Vector flipped = variants[v];
                    flipped(a) = -xi;
                    variants.push_back(flipped);
                }
            }
        }
        for (std::size_t h = 0; h < heights_.size(); ++h) response_[h * modes + k] = CMatrix::Zero(m_, m_);
        for (const Vector& xi : variants) {
            const ModeSolution mode = stable_modes(second, coeffs.n(), xi, options);
            min_abs_real_ = std::min(min_abs_real_, mode.min_abs_real);
            for (std::size_t h = 0; h < heights_.size(); ++h) {
                response_[h * modes + k] += mode.response(heights_[h]) / static_cast<double>(variants.size());
            }
        }
    }
}

std::vector<PeriodicField> HalfSpaceSolver::solve(const PeriodicField& boundary, double* max_imaginary) const {
    if (boundary.m() != m_ || boundary.grid().d != grid_.d || boundary.grid().N != grid_.N) {
        throw InvalidArgument("boundary field does not match the solver grid");
    }
    const std::size_t modes = grid_.size();
    const auto m = static_cast<std::size_t>(m_);
    std::vector<std::vector<Complex>> spectrum(m, std::vector<Complex>(modes));
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t k = 0; k < modes; ++k) spectrum[s][k] = boundary.values()(static_cast<Eigen::Index>(k * m + s));
        transform(spectrum[s], grid_.d, grid_.N, false);
    }
    double imag = 0.0;
    std::vector<PeriodicField> out;
    out.reserve(heights_.size());
    std::vector<std::vector<Complex>> field(m, std::vector<Complex>(modes));
    CVector f(m_);
    for (std::size_t h = 0; h < heights_.size(); ++h) {
        for (std::size_t k = 0; k < modes; ++k) {
            for (std::size_t s = 0; s < m; ++s) f(static_cast<Eigen::Index>(s)) = spectrum[s][k];
            const CVector u = response_[h * modes + k] * f;
            for (std::size_t s = 0; s < m; ++s) field[s][k] = u(static_cast<Eigen::Index>(s));
        }
        PeriodicField result(grid_, m_);
        for (std::size_t s = 0; s < m; ++s) {
            transform(field[s], grid_.d, grid_.N, true);
            for (std::size_t k = 0; k < modes; ++k) {
                result.values()(static_cast<Eigen::Index>(k * m + s)) = field[s][k].real();
                imag = std::max(imag, std::abs(field[s][k].imag()));
            }
        }
        out.push_back(std::move(result));
    }
    if (max_imaginary != nullptr) *max_imaginary = imag;
    return out;
}

HalfSpaceSolution solve_halfspace(const HalfSpaceProblem& problem) {
    const HalfSpaceSolver solver(problem.coeffs, problem.boundary.grid(), problem.heights, problem.options);
    HalfSpaceSolution sol;
    sol.heights = problem.heights;
    sol.fields = solver.solve(problem.boundary, &sol.max_imaginary);
    sol.delta_estimate = solver.delta_estimate();
    return sol;
}

HalfSpaceAudit audit_halfspace_invariance(const HalfSpaceSolver& solver, const ConvexBody& body,
                                          const std::vector<PeriodicField>& data, double tol) {
    if (solver.m() != body.dim()) throw InvalidArgument("system size and body dimension differ");
    HalfSpaceAudit audit;
    audit.tol = tol;
    audit.max_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t inst = 0; inst < data.size(); ++inst) {
        const PeriodicField& f = data[inst];
        for (std::size_t node = 0; node < f.grid().size(); ++node) {
            const double margin = violation_margin(body, f.at(node));
            if (margin > kGeomTol) {
                throw InvalidArgument("boundary data instance " + std::to_string(inst) + " leaves the body at node " +
                                      std::to_string(node));
            }
        }
        double imag = 0.0;
        const auto fields = solver.solve(f, &imag);
        audit.max_imaginary = std::max(audit.max_imaginary, imag);
        for (std::size_t h = 0; h < fields.size(); ++h) {
            for (std::size_t node = 0; node < f.grid().size(); ++node) {
                const double margin = violation_margin(body, fields[h].at(node));
                if (margin > audit.max_margin) {
                    audit.max_margin = margin;
                    audit.worst_instance = inst;
                    audit.worst_height = h;
                    audit.worst_node = node;
                }
            }
        }
    }
    audit.passed = audit.max_margin <= tol;
    return audit;
}

double kernel_normalization_check(const SystemCoefficients& coeffs, int resolution, const HalfSpaceOptions& options) {
    const TangentialGrid grid(coeffs.n() - 1, kTwoPi, resolution);
    const HalfSpaceSolver solver(coeffs, grid, {0.01, 0.1, 1.0, 10.0}, options);
    const int m = coeffs.m();
    double defect = 0.0;
    for (int i = 0; i < m; ++i) {
        PeriodicField f(grid, m);
        const Vector e = unit_vector(m, i);
        for (std::size_t node = 0; node < grid.size(); ++node) f.set(node, e);
        for (const auto& u : solver.solve(f)) {
            for (std::size_t node = 0; node < grid.size(); ++node) {
                defect = std::max(defect, (u.at(node) - e).cwiseAbs().maxCoeff());
            }
        }
    }
    return defect;
}

namespace {

// Per component: a constant plus cos/sin pairs over a fixed set of integer wave vectors.
struct PeriodicTrig {
    int m = 1;
    std::vector<std::vector<int>> waves;
    std::vector<double> c;

    [[nodiscard]] std::size_t per_component() const { return 1 + 2 * waves.size(); }

    [[nodiscard]] Vector eval(const Vector& x, double L) const {
        Vector g(m);
        for (int s = 0; s < m; ++s) {
            const double* p = c.data() + static_cast<std::size_t>(s) * per_component();
            double v = p[0];
            for (std::size_t w = 0; w < waves.size(); ++w) {
                double phase = 0.0;
                for (std::size_t a = 0; a < waves[w].size(); ++a) phase += waves[w][a] * x(static_cast<Eigen::Index>(a));
                phase *= kTwoPi / L;
                v += p[1 + 2 * w] * std::cos(phase) + p[2 + 2 * w] * std::sin(phase);
            }
            g(s) = v;
        }
        return g;
    }
};

PeriodicTrig random_trig(int m, int d, int modes, std::mt19937_64& rng) {
    PeriodicTrig t;
    t.m = m;
    if (d == 1) {
        for (int k = 1; k <= modes; ++k) t.waves.push_back({k});
    } else {
        for (int k2 = 0; k2 <= modes; ++k2) {
            for (int k1 = -modes; k1 <= modes; ++k1) {
                if (k2 == 0 && k1 <= 0) continue;
                t.waves.push_back({k1, k2});
            }
        }
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    t.c.resize(static_cast<std::size_t>(m) * t.per_component());
    for (int s = 0; s < m; ++s) {
        double* p = t.c.data() + static_cast<std::size_t>(s) * t.per_component();
        p[0] = u(rng);
        for (std::size_t w = 0; w < t.waves.size(); ++w) {
            double k = 0.0;
            for (const int a : t.waves[w]) k += a * a;
            p[1 + 2 * w] = u(rng) / std::sqrt(k);
            p[2 + 2 * w] = u(rng) / std::sqrt(k);
        }
    }
    return t;
}

PeriodicField periodic_into_body(const TangentialGrid& grid, const ConvexBody& body, const Vector& center,
                                 const PeriodicTrig& trig) {
    // feasibility of the radial scale is checked on a 4x finer grid
    const TangentialGrid fine(grid.d, grid.L, grid.N * 4);
    double t = 1.0;
    for (std::size_t node = 0; node < fine.size(); ++node) {
        const Vector g = trig.eval(fine.coordinate(node), grid.L);
        if (violation_margin(body, center + t * g) > 0.0) t = radial_scale_into(body, center, center + t * g) * t;
    }
    t *= 0.98;
    PeriodicField out(grid, body.dim());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        out.set(node, center + t * trig.eval(grid.coordinate(node), grid.L));
    }
    return out;
}

}  // namespace

PeriodicField random_periodic_data(const TangentialGrid& grid, const ConvexBody& body, std::mt19937_64& rng,
                                   int modes) {
    const Vector center = interior_point(body);
    PeriodicTrig trig = random_trig(body.dim(), grid.d, modes, rng);
    const double amp = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    for (double& c : trig.c) c *= amp;
    return periodic_into_body(grid, body, center, trig);
}

HalfSpaceSearchResult search_halfspace_counterexample(const HalfSpaceSolver& solver, const ConvexBody& body,
                                                      const HalfSpaceSearchConfig& config) {
    if (solver.m() != body.dim()) throw InvalidArgument("system size and body dimension differ");
    std::mt19937_64 rng(config.seed);
    const Vector center = interior_point(body);
    const TangentialGrid& grid = solver.grid();

    struct Scored {
        double margin = -std::numeric_limits<double>::infinity();
        std::size_t height = 0;
        std::size_t node = 0;
    };
    int solves = 0;
    const auto score = [&](const PeriodicTrig& trig, PeriodicField& data) {
        data = periodic_into_body(grid, body, center, trig);
        const auto fields = solver.solve(data);
        ++solves;
        Scored s;
        for (std::size_t h = 0; h < fields.size(); ++h) {
            for (std::size_t node = 0; node < grid.size(); ++node) {
                const double margin = violation_margin(body, fields[h].at(node));
                if (margin > s.margin) s = {margin, h, node};
            }
        }
        return s;
    };

    PeriodicField data(grid, body.dim());
    PeriodicField best_data(grid, body.dim());
    PeriodicTrig best = random_trig(body.dim(), grid.d, config.modes, rng);
    Scored best_score = score(best, best_data);
    for (int c = 1; c < config.candidates && solves < config.max_solves; ++c) {
        PeriodicTrig trial = random_trig(body.dim(), grid.d, config.modes, rng);
        const Scored s = score(trial, data);
        if (s.margin > best_score.margin) {
            best = std::move(trial);
            best_score = s;
            best_data = data;
        }
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, best.c.size() - 1);
    double step = 0.3;
    int move = 0;
    while (solves < config.max_solves && best_score.margin <= config.target_margin) {
        PeriodicTrig trial = best;
        switch (move++ % 3) {
            case 0:
                for (double& c : trial.c) c += step * gauss(rng);
                break;
            case 1:
                trial.c[pick(rng)] += 4.0 * step * gauss(rng);
                break;
            default:
                // amplify the oscillating part relative to the constants
                for (int s = 0; s < trial.m; ++s) {
                    double* p = trial.c.data() + static_cast<std::size_t>(s) * trial.per_component();
                    for (std::size_t i = 1; i < trial.per_component(); ++i) p[i] *= 1.25;
                }
                break;
        }
        const Scored s = score(trial, data);
        if (s.margin > best_score.margin) {
            best = std::move(trial);
            best_score = s;
            best_data = data;
            step = std::min(1.0, step * 1.2);
        } else {
            step = std::max(0.01, step * 0.97);
        }
    }
    return {best_score.margin, best_score.height, best_score.node, solves, std::move(best_data)};
}

}  // namespace invset
