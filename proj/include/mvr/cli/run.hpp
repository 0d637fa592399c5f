#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvr/cli/config.hpp"

namespace mvr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

std::string_view version();

/// game-solve, prerender-sim, diffusion-train, diffusion-infer, bench-run.
const std::vector<std::string>& subcommands();

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  ///< overrides config.output_dir
    bool plot_data = false;
    std::optional<std::filesystem::path> trace;    ///< prerender-sim: replay this trace
    std::optional<std::filesystem::path> model;    ///< diffusion-infer, bench-run: checkpoint to load
    std::optional<std::vector<std::string>> policies;  ///< bench-run: overrides bench.policies
};

/// Every random stream of a run, derived from the global seed by name.
std::map<std::string, std::uint64_t> named_seeds(std::uint64_t seed);

struct RunManifest {
    std::string command;
    std::string version;
    std::string config_digest;
    std::map<std::string, std::uint64_t> seeds;
    std::string started_at;   ///< UTC, ISO 8601
    std::string finished_at;
    std::vector<std::string> outputs;  ///< file names relative to the output directory
};

void write_manifest(std::ostream& out, const RunManifest& manifest);

/// Runs one pipeline, writing its artifacts, the resolved config and
/// manifest.json into the output directory. Errors are reported on `err`
/// with the command as prefix and mapped to an exit code: 2 for invalid
/// input, 3 for numerical failure, 1 otherwise.
int run_subcommand(std::string_view command, const ExperimentConfig& config, const RunOptions& options,
                   std::ostream& log, std::ostream& err);

}  // namespace mvr::cli
