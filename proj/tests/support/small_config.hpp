#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mvr/cli/config.hpp"
#include "mvr/cli/run.hpp"

namespace small {

// Shrunk diffusion and bench sections so every subcommand runs in about a second.
inline constexpr const char* kConfig = R"(seed: 3
prerender:
  horizon: 200
diffusion:
  d_model: 16
  heads: 2
  epochs: 2
  batch_size: 8
  dataset_size: 40
  eval_users: 4
  eval_items: 20
bench:
  workload:
    scenes: 2
    frames_per_scene: 240
    regions: 10
  policy:
    calibration_scenes: 2
)";

inline mvr::cli::ExperimentConfig config() { return mvr::cli::parse_config(kConfig); }

inline std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

/// File name -> contents for every file in `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        files[entry.path().filename().string()] = slurp(entry.path());
    }
    return files;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("mvr_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace small
