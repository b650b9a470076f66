// qlb: run, benchmark, convergence-study and self-check front end.
//
// Exit status: 0 success, 1 usage or configuration error, 2 numerical invariant violation.

#include "qlb/app.hpp"
#include "qlb/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

qlb::RunConfig load(const std::string &path, const std::vector<std::string> &overrides) {
    qlb::RunConfig cfg = qlb::load_config(path);
    for (const auto &o : overrides) qlb::apply_override(cfg, o);
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum lattice Boltzmann Dirac solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 42;
    int draws = 1000;

    auto *run = app.add_subcommand("run", "evolve a configured simulation and write observables");
    auto *bench = app.add_subcommand("bench", "measure throughput in MLUPS");
    auto *converge = app.add_subcommand("converge", "free plane-wave splitting-order study");
    auto *check = app.add_subcommand("check", "verify matrix algebra and lattice invariants");
    for (auto *sub : {run, bench, converge}) {
        sub->add_option("config", config_path, "key = value config file")->required();
        sub->add_option("--set", overrides, "override a config key (key=value), repeatable");
    }
    check->add_option("--seed", seed, "seed for the randomized draws");
    check->add_option("--draws", draws, "number of randomized parameter draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            qlb::cmd_run(load(config_path, overrides), std::cout);
        } else if (*bench) {
            qlb::cmd_bench(load(config_path, overrides), std::cout);
        } else if (*converge) {
            qlb::cmd_converge(load(config_path, overrides), std::cout);
        } else if (*check) {
            return qlb::cmd_check(std::cout, qlb::build_dirac_set(), seed, draws) ? 0 : 2;
        }
    } catch (const qlb::NumericalError &e) {
        std::cerr << "qlb: numerical invariant violated: " << e.what() << '\n';
        return 2;
    } catch (const qlb::ConfigError &e) {
        std::cerr << "qlb: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument &e) {
        std::cerr << "qlb: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "qlb: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
