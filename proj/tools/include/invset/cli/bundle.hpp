#pragma once

#include "invset/cli/expression.hpp"
#include "invset/coefficients.hpp"
#include "invset/convex_body.hpp"
#include "invset/elliptic_fd.hpp"
#include "invset/errors.hpp"
#include "invset/integral_transform.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace invset::cli {

/// Malformed bundle; the message names the JSON field path (and line/column for syntax errors).
class BundleError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct HalfSpaceBlock {
    double L = 1.0;
    int N = 64;
    std::vector<double> heights;
    /// One expression per component in the tangential variables x1..x{n-1}.
    std::vector<Expression> boundary;
};

struct WitnessRequest {
    std::size_t x_index = 0;
    Vector normal;
};

/// Parsed problem bundle. Every block is optional; subcommands check for what they need.
struct Bundle {
    nlohmann::json raw;
    std::optional<ConvexBody> body;
    std::optional<SystemCoefficients> coefficients;
    std::optional<DiscreteKernel> kernel;
    std::optional<BoxGrid> grid;
    /// One expression per component in x1..x{n}.
    std::vector<Expression> boundary;
    std::optional<HalfSpaceBlock> halfspace;
    std::optional<Matrix> matrix;
    std::vector<Vector> x_samples;
    std::optional<WitnessRequest> witness;
    SolverConfig solver;
    PicardConfig picard;
    bool search = false;
};

[[nodiscard]] Bundle parse_bundle(const std::string& text);
[[nodiscard]] Bundle load_bundle(const std::string& path);

[[nodiscard]] ConvexBody parse_body(const nlohmann::json& j, const std::string& path = "body");
[[nodiscard]] SystemCoefficients parse_coefficients(const nlohmann::json& j, const std::string& path = "coefficients");
[[nodiscard]] DiscreteKernel parse_kernel(const nlohmann::json& j, const std::string& path = "kernel");

}  // namespace invset::cli
