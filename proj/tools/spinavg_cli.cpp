#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinavg/evolver.hpp"
#include "spinavg/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Disorder-averaged spin dynamics. Thread count follows OMP_NUM_THREADS."};
    app.require_subcommand(1);

    std::string config_positional;
    std::string config_flag;
    std::uint64_t seed_override = 0;
    long shots_override = 0;
    std::string out_override;
    bool dry_run = false;

    CLI::App* run = app.add_subcommand("run", "run every method in a config, one CSV each");
    run->add_option("config_file", config_positional, "experiment config (JSON)");
    run->add_option("--config", config_flag, "experiment config (JSON), same as the positional");
    CLI::Option* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
    CLI::Option* shots_opt =
        run->add_option("--shots", shots_override, "override every baseline shot count");
    run->add_option("--out", out_override, "override the output directory");
    run->add_flag("--dry-run", dry_run, "print the resolved plan and write nothing");

    std::string path_a;
    std::string path_b;
    double threshold = 1.0;
    CLI::App* compare = app.add_subcommand("compare", "compare two trajectory CSVs");
    compare->add_option("a", path_a, "trajectory CSV under test")->required();
    compare->add_option("b", path_b, "reference CSV (supplies the variance)")->required();
    compare->add_option("--threshold", threshold,
                        "variance multiple at which a deviation counts (default 1)");

    int sites = 0;
    double sigma = 0.0;
    CLI::App* tbound = app.add_subcommand("tbound", "print the short-time validity horizon");
    tbound->add_option("--N", sites, "system size")->required()->check(CLI::Range(2, 64));
    tbound->add_option("--sigma", sigma, "coupling standard deviation")
        ->required()
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;  // usage problems are config problems
    }

    return spinavg::run_guarded(
        [&]() -> int {
            if (run->parsed()) {
                const std::string config_path =
                    config_flag.empty() ? config_positional : config_flag;
                if (config_path.empty())
                    throw spinavg::config_error("run: missing config path (positional or --config)");
                std::string raw_text;
                spinavg::ExperimentConfig config = spinavg::load_config(config_path, &raw_text);
                if (seed_opt->count() > 0) config.seed = seed_override;
                if (shots_opt->count() > 0) {
                    if (shots_override < 1)
                        throw spinavg::config_error("--shots: must be at least 1");
                    for (spinavg::MethodSpec& method : config.methods)
                        if (method.kind == spinavg::MethodSpec::Kind::baseline)
                            method.shots = shots_override;
                }
                if (!out_override.empty()) config.output_dir = out_override;
                spinavg::run_experiment(config, raw_text, dry_run, std::cout);
                return 0;
            }
            if (compare->parsed()) {
                const spinavg::CompareReport report =
                    spinavg::compare_files(path_a, path_b, threshold, std::cout);
                return report.pass ? 0 : 1;
            }
            const spinavg::DisorderModel model{sites, 1.0, 0.0, sigma, true};
            std::cout << spinavg::format_double(spinavg::t_bound(model)) << "\n";
            return 0;
        },
        std::cerr);
}
