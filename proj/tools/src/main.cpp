#include "invset/cli/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace invset::cli;
    CLI::App app{"invset: invariant convex sets for elliptic systems and integral transforms"};
    app.require_subcommand(1, 1);

    RunConfig config;
    double tol = 0.0;
    int budget = 0;
    int grid = 0;
    std::vector<double> heights;

    for (const auto& name : subcommand_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--input,-i", config.input, "problem bundle (JSON)")->required();
        sub->add_option("--out,-o", config.out_dir, "output directory")->capture_default_str();
        sub->add_option("--tol", tol, "tolerance override");
        sub->add_option("--seed", config.seed, "random seed")->capture_default_str();
        sub->add_option("--budget", budget, "normal samples or solver budget")->check(CLI::PositiveNumber);
        sub->add_option("--grid", grid, "nodes per axis (box) or tangential resolution")->check(CLI::PositiveNumber);
        sub->add_option("--heights", heights, "evaluation heights for the half-space solver")->delimiter(',');
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    for (CLI::App* sub : app.get_subcommands()) {
        config.subcommand = *parse_subcommand(sub->get_name());
        if (sub->count("--tol")) config.tol = tol;
        if (sub->count("--budget")) config.budget = budget;
        if (sub->count("--grid")) config.grid = grid;
        if (sub->count("--heights")) config.heights = heights;
    }

    const RunOutcome outcome = run(config);
    std::cout << outcome.verdict.dump(2) << '\n';
    return outcome.exit_code;
}
