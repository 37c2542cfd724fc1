// Command-line front end: forward impedance synthesis, parameter recovery,
// factorization checks and the 1-D Laplace bridge check.

#include "elastodn/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

std::optional<std::string> opt_path(const std::string &s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

} // namespace

int main(int argc, char **argv) {
    using namespace elastodn;

    CLI::App app{"Boundary impedance tools for anisotropic elastic media"};
    app.require_subcommand(1);

    std::string params, samples, out, grid = "auto", medium;
    std::uint64_t seed = 1;
    int trials = -1;
    double tau = 2.0, tolerance = 1e-9;
    std::vector<double> T;
    int cells = 1000;

    auto *forward = app.add_subcommand("forward", "Synthesize impedance samples from a parameter file");
    forward->add_option("--params", params, "Parameter file (JSON)")->required();
    forward->add_option("--out", out, "Samples file to write (JSON)")->required();
    forward->add_option("--grid", grid, "Direction grid: auto, vti, ortho, homog, random");
    forward->add_option("--seed", seed, "Seed for random grids");
    forward->add_option("--trials", trials, "Random direction pairs (random and homog grids)");

    std::vector<CLI::App *> recovers;
    for (const char *name : {"recover-vti", "recover-ortho", "recover-homog"}) {
        auto *sub = app.add_subcommand(name, "Recover parameters from a samples file");
        sub->add_option("--samples", samples, "Samples file (JSON)")->required();
        sub->add_option("--out", out, "Parameter file to write (JSON)")->required();
        recovers.push_back(sub);
    }

    auto *factor = app.add_subcommand("factor-check", "Check the symbol factorization on random directions");
    factor->add_option("--params", params, "Parameter file (JSON)")->required();
    factor->add_option("--trials", trials, "Number of random direction pairs");
    factor->add_option("--seed", seed, "Seed for the direction pairs");
    factor->add_option("--tolerance", tolerance, "Residual tolerance");
    factor->add_option("--out", out, "Report file (JSON); stdout if omitted");

    auto *bridge = app.add_subcommand("bridge-check", "Laplace bridge check in a 1-D medium");
    bridge->add_option("--params", medium, "1-D medium file (JSON); homogeneous unit medium if omitted");
    bridge->add_option("--tau", tau, "Laplace parameter");
    bridge->add_option("--T", T, "Final times (at least 3)")->delimiter(',');
    bridge->add_option("--cells", cells, "Grid cells");
    bridge->add_option("--out", out, "Report file (JSON); stdout if omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "UsageError: " << e.what() << '\n';
        return exit_code(ErrorKind::Usage);
    }

    try {
        CommandResult res;
        bool print = false;
        if (forward->parsed()) {
            ForwardOptions o;
            o.grid = parse_grid(grid);
            o.seed = seed;
            if (trials >= 0) o.trials = trials;
            res = cmd_forward(params, out, o);
        } else if (recovers[0]->parsed()) {
            res = cmd_recover(RecoverMode::vti, samples, out);
        } else if (recovers[1]->parsed()) {
            res = cmd_recover(RecoverMode::ortho, samples, out);
        } else if (recovers[2]->parsed()) {
            res = cmd_recover(RecoverMode::homog, samples, out);
        } else if (factor->parsed()) {
            FactorCheckOptions o;
            if (trials >= 0) o.trials = trials;
            if (trials == 0) throw Error(ErrorKind::Usage, "--trials must be positive");
            o.seed = seed;
            o.tolerance = tolerance;
            res = cmd_factor_check(params, opt_path(out), o);
            print = out.empty();
        } else if (bridge->parsed()) {
            BridgeOptions o;
            o.tau = tau;
            o.T = T;
            o.cells = cells;
            res = cmd_bridge_check(opt_path(medium), opt_path(out), o);
            print = out.empty();
        }
        if (print) std::cout << res.report.dump(2) << '\n';
        if (res.exit_code != 0) std::cerr << "check failed; see report\n";
        return res.exit_code;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception &e) {
        std::cerr << "error: ParseError: " << e.what() << '\n';
        return exit_code(ErrorKind::Parse);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
