#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mvr/cli/config.hpp"
#include "mvr/cli/run.hpp"

int main(int argc, char** argv)
{
    using namespace mvr::cli;
    CLI::App app{"Metaverse rendering pipelines: pricing game, pre-rendering, preference diffusion, benchmark"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    RunOptions options;
    std::string out_dir;
    std::string trace;
    std::string model;
    std::vector<std::string> policies;

    const std::map<std::string, std::string> descriptions{
        {"game-solve", "Solve the cloud pricing game and write the equilibrium record"},
        {"prerender-sim", "Simulate an avatar walk with neighbor pre-rendering and I/P-frame coding"},
        {"diffusion-train", "Train the preference denoiser on planted users and write a checkpoint"},
        {"diffusion-infer", "Reconstruct held-out users with skip-step inference and score items"},
        {"bench-run", "Compare rendering policies on the synthetic scene workload"},
    };
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("--config", config_path, "YAML experiment config (defaults apply when omitted)");
        sub->add_option("--seed", seed, "Global seed, overrides the config");
        sub->add_option("--out-dir", out_dir, "Output directory, overrides the config");
        sub->add_flag("--plot-data", options.plot_data, "Also write plot-ready CSV series");
        if (name == "prerender-sim") {
            sub->add_option("--trace", trace, "Replay a mobility trace of `step x y` lines");
        }
        if (name == "diffusion-infer" || name == "bench-run") {
            sub->add_option("--model", model, "Checkpoint written by diffusion-train");
        }
        if (name == "bench-run") {
            sub->add_option("--policies", policies, "Comma-separated subset of proposed,mdp,random_opt,none")
                ->delimiter(',');
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    ExperimentConfig config;
    try {
        config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return kExitFailure;
    }
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (!trace.empty()) options.trace = trace;
    if (!model.empty()) options.model = model;
    if (!policies.empty()) options.policies = policies;
    return run_subcommand(command, config, options, std::cout, std::cerr);
}
