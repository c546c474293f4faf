// mrgbsde_cli: solve / verify / game / regress on a key = value experiment file.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mrgbsde/errors.hpp"
#include "mrgbsde/runner.hpp"

int main(int argc, char** argv) {
    using namespace mrgbsde;
    CLI::App app{"Doubly mean-reflected G-BSDE solver suite"};
    app.require_subcommand(1);

    std::string config, suite, golden, work;
    bool bless = false;

    auto* solve = app.add_subcommand("solve", "Solve and write results.csv, iterations.csv, manifest.json");
    solve->add_option("config", config, "Experiment file")->required();

    auto* verify = app.add_subcommand("verify", "Run a property suite and write a pass/fail table");
    verify->add_option("config", config, "Experiment file")->required();
    verify->add_option("--suite", suite,
                       "skorokhod | gexp | classical-limit | kprocess | flatness | game | comparison | all")
        ->required();

    auto* game = app.add_subcommand("game", "Solve, then write the game matrices and reductions");
    game->add_option("config", config, "Experiment file")->required();

    auto* regress = app.add_subcommand("regress", "Regenerate outputs and compare them with goldens");
    regress->add_option("config", config, "Experiment file")->required();
    regress->add_option("--golden", golden, "Golden directory")->required();
    regress->add_option("--work", work, "Scratch directory (default: <output dir>/regress)");
    regress->add_flag("--bless", bless, "Overwrite the goldens with the regenerated files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        const ExperimentConfig cfg = load_config(config);
        const std::string out = output_dir(cfg);
        if (*solve) return run_solve(cfg, out, std::cout);
        if (*verify) return run_verify(cfg, suite, out, std::cout);
        if (*game) return run_game(cfg, out, std::cout);
        if (*regress) {
            if (work.empty()) work = (std::filesystem::path(out) / "regress").string();
            return run_regress(cfg, golden, work, bless, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 1;
}
