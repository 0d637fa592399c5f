#pragma once

// Synthetic scene workloads. Each scene has one planted user (the same
// generator the preference model trains on) and a set of regions whose item
// features decide, through the user's latent taste, which regions are of
// interest. Per frame, every region also emits a noisy attention
// observation: signal * interest + AR(1) noise with the given persistence.

#include <cstdint>
#include <string>
#include <vector>

#include "mvr/diffusion/planted.hpp"

namespace mvr::bench {

using diffusion::Matrix;
using diffusion::Vector;

struct WorkloadConfig {
    int scenes = 20;
    int frames_per_scene = 3600;
    int fps = 60;
    int regions = 40;
    double interest_fraction = 0.3;
    double work_min = 0.5;  ///< render work units per region per frame, uniform
    double work_max = 1.5;
    double observation_signal = 1.0;
    double observation_persistence = 0.95;
    diffusion::PlantedConfig planted;

    void validate() const;
};

struct Region {
    double work = 1.0;
    bool interest = false;
    Vector features;
};

struct Scene {
    int index = 0;
    Vector latent;
    diffusion::TrainingSample user;  ///< preference history and resource condition
    std::vector<Region> regions;
    Matrix observations;  ///< frames x regions

    std::vector<bool> interest_flags() const;
    double total_work() const;
};

struct SceneWorkload {
    WorkloadConfig config;
    std::uint64_t seed = 0;
    std::vector<Scene> scenes;

    /// FNV-1a over every generated value.
    std::string digest() const;
};

/// Users come from one planted stream of `seed`; regions and observations
/// from an independent stream per scene.
SceneWorkload generate_workload(const WorkloadConfig& config, std::uint64_t seed);

}  // namespace mvr::bench
