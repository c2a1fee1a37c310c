#include "invset/sphere.hpp"

#include "invset/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace invset {

namespace {

constexpr std::array<unsigned, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                              41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

Vector halton_gaussian_direction(int d, std::size_t index) {
    // Box-Muller on consecutive Halton coordinates; index + 1 keeps u1 > 0.
    Vector g(d);
    for (int i = 0; i < d; i += 2) {
        const double u1 = radical_inverse(index + 1, kPrimes[static_cast<std::size_t>(i)]);
        const double u2 = radical_inverse(index + 1, kPrimes[static_cast<std::size_t>(i + 1)]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        g(i) = r * std::cos(2.0 * std::numbers::pi * u2);
        if (i + 1 < d) g(i + 1) = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    return g.normalized();
}

void check_dimension(int d) {
    if (d < 1 || static_cast<std::size_t>(d) > kPrimes.size()) {
        throw InvalidArgument("sphere sampling supports dimensions 1.." +
                              std::to_string(kPrimes.size()));
    }
}

}  // namespace

double radical_inverse(std::size_t i, unsigned base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (i > 0) {
        result += f * static_cast<double>(i % base);
        i /= base;
        f /= base;
    }
    return result;
}

std::vector<Vector> sphere_points(int d, std::size_t count) {
    check_dimension(d);
    std::vector<Vector> pts;
    pts.reserve(count);
    if (d == 1) {
        for (std::size_t i = 0; i < count; ++i) pts.push_back(Vector::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
        return pts;
    }
    if (d == 2) {
        for (std::size_t i = 0; i < count; ++i) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
            Vector v(2);
            v << std::cos(t), std::sin(t);
            pts.push_back(v);
        }
        return pts;
    }
    if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * static_cast<double>(i);
            Vector v(3);
            v << r * std::cos(phi), r * std::sin(phi), z;
            pts.push_back(v);
        }
        return pts;
    }
    for (std::size_t i = 0; i < count; ++i) pts.push_back(halton_gaussian_direction(d, i));
    return pts;
}

std::vector<Vector> half_sphere_points(int d, std::size_t count) {
    check_dimension(d);
    std::vector<Vector> pts;
    pts.reserve(count);
    if (d == 1) {
        pts.push_back(Vector::Ones(1));
        return pts;
    }
    if (d == 2) {
        for (std::size_t i = 0; i < count; ++i) {
            const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
            Vector v(2);
            v << std::cos(t), std::sin(t);
            pts.push_back(v);
        }
        return pts;
    }
    if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < count; ++i) {
            const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * static_cast<double>(i);
            Vector v(3);
            v << r * std::cos(phi), r * std::sin(phi), z;
            pts.push_back(v);
        }
        return pts;
    }
    for (std::size_t i = 0; i < count; ++i) {
        Vector v = halton_gaussian_direction(d, i);
        if (v(d - 1) < 0.0) v = -v;
        pts.push_back(v);
    }
    return pts;
}

}  // namespace invset
