#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace invset::cli {

enum class Subcommand {
    CheckConditions,
    Classify,
    DetectFactorization,
    CheckTransform,
    Witness,
    SolveBox,
    SolveHalfspace,
    Audit,
    NormalizationCheck,
};

[[nodiscard]] std::optional<Subcommand> parse_subcommand(std::string_view name);
[[nodiscard]] std::string to_string(Subcommand sub);
[[nodiscard]] std::vector<std::string> subcommand_names();

struct RunConfig {
    Subcommand subcommand = Subcommand::CheckConditions;
    std::string input;
    std::string out_dir = "invset-out";
    std::optional<double> tol;
    std::uint64_t seed = 1;
    std::optional<int> budget;
    std::optional<int> grid;
    std::optional<std::vector<double>> heights;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckedFailure = 1;
inline constexpr int kExitError = 2;

struct RunOutcome {
    int exit_code = kExitError;
    nlohmann::json verdict;
};

/// Runs one subcommand and writes verdict.json, report.txt, detail CSVs and run.log into out_dir.
/// Never throws: operational errors become exit code 2 with the message in the verdict.
RunOutcome run(const RunConfig& config);

}  // namespace invset::cli
