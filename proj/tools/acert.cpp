#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "acert/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"acert: Monte Carlo certificates of absolute continuity"};
    app.set_version_flag("--version", std::string(ACERT_VERSION));

    std::string config, builtin, show, out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool plotdata = false, list = false, quiet = false;
    auto* o_config = app.add_option("--config", config, "scenario INI file");
    auto* o_builtin = app.add_option("--builtin", builtin, "run a bundled scenario by name");
    o_config->excludes(o_builtin);
    auto* o_seed = app.add_option("--seed", seed, "master seed, overrides mc.seed");
    auto* o_workers = app.add_option("--workers", workers, "worker threads (default: available parallelism)")
                          ->check(CLI::PositiveNumber);
    auto* o_out = app.add_option("--out", out, "output directory, overrides output.dir");
    app.add_flag("--plotdata", plotdata, "also write (x, y, band) plot files");
    app.add_flag("--list", list, "print the bundled scenarios and measures");
    app.add_option("--show", show, "print the INI text of a bundled scenario");
    app.add_flag("-q,--quiet", quiet, "no progress summary on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : acert::kExitError;
    }

    if (list) {
        std::cout << "scenarios:\n";
        for (const auto& b : acert::builtin_scenarios())
            std::cout << "  " << b.name << " [" << b.tag << "] " << b.description << "\n";
        std::cout << "measures:\n";
        for (const auto& m : acert::builtin_measures())
            std::cout << "  " << m.name << " [" << m.tag << "] " << m.description << "\n";
        return 0;
    }
    if (!show.empty()) {
        try {
            std::cout << acert::find_builtin(show).text;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return acert::kExitError;
        }
        return 0;
    }

    acert::RunOptions opt;
    if (*o_seed)
        opt.seed = seed;
    if (*o_workers)
        opt.workers = workers;
    if (*o_out)
        opt.out_dir = out;
    opt.plotdata = plotdata;
    if (!quiet)
        opt.log = &std::cout;

    if (*o_config)
        return acert::run_config_file(config, opt, std::cerr);
    if (*o_builtin)
        return acert::run_builtin(builtin, opt, std::cerr);
    std::cerr << "nothing to do: pass --config PATH, --builtin NAME, --list or --show NAME\n";
    return acert::kExitError;
}
