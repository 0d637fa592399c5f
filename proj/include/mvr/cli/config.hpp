#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvr/bench/policies.hpp"
#include "mvr/diffusion/planted.hpp"
#include "mvr/game/resource_game.hpp"
#include "mvr/prerender/walk.hpp"

namespace mvr::cli {

struct GameSection {
    game::CloudParams cloud;
    std::vector<game::EdgeNodeParams> nodes;
    game::SolverSettings solver;
};

struct PrerenderSection {
    prerender::GridWorld grid;
    prerender::TimingModel timing;
    prerender::CompressionModel compression;
    double work_units = 5.0;
    int horizon = 500;
    std::string mobility = "random_walk";  ///< random_walk or trace
    std::optional<prerender::GridPoint> start;
    std::string trace_file;  ///< used when mobility is trace and no --trace flag is given
};

struct DiffusionSection {
    int steps = 700;
    double beta_start = 1e-4;
    double beta_end = 0.04;
    diffusion::DenoiserConfig model;  ///< features and cond_dim follow the layout
    diffusion::TrainSettings training;
    int dataset_size = 256;
    diffusion::PlantedConfig planted;
    int stride = 35;
    int start_step = 140;
    int eval_users = 20;
    int eval_items = 40;
    double eval_interest_fraction = 0.3;

    diffusion::NoiseSchedule schedule() const { return diffusion::NoiseSchedule(steps, beta_start, beta_end); }
    diffusion::DenoiserConfig denoiser_config() const;
};

struct BenchSection {
    bench::WorkloadConfig workload;  ///< planted generator shared with the diffusion section
    bench::PolicySettings policy;    ///< stride and start_step shared with the diffusion section
    std::vector<std::string> policies{"proposed", "mdp", "random_opt", "none"};
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    GameSection game;
    PrerenderSection prerender;
    DiffusionSection diffusion;
    BenchSection bench;

    ExperimentConfig();

    bench::WorkloadConfig workload_config() const;
    bench::PolicySettings policy_settings() const;
};

/// Parses YAML text; empty text gives the defaults. Unknown keys and invalid
/// values raise ConfigError naming the key path.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical YAML listing every field, in a fixed order.
std::string serialize_config(const ExperimentConfig& config);
/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

/// Full validation; key paths match the YAML tree.
void validate_config(const ExperimentConfig& config);

/// Closest candidate by edit distance, if any is within distance 3.
std::optional<std::string> nearest_key(std::string_view key, const std::vector<std::string>& candidates);

}  // namespace mvr::cli
