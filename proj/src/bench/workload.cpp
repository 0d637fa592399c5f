#include "mvr/bench/workload.hpp"

#include <cmath>
#include <stdexcept>

#include "mvr/common/digest.hpp"

namespace mvr::bench {

void WorkloadConfig::validate() const
{
    if (scenes < 1 || frames_per_scene < 1 || fps < 1 || regions < 2) {
        throw std::invalid_argument("workload: scenes, frames_per_scene and fps must be >= 1, regions >= 2");
    }
    if (!(interest_fraction > 0.0 && interest_fraction < 1.0)) {
        throw std::invalid_argument("workload: interest_fraction must be in (0, 1)");
    }
    const long flagged = std::lround(interest_fraction * regions);
    if (flagged < 1 || flagged >= regions) {
        throw std::invalid_argument("workload: interest flags must be a non-empty strict subset of regions");
    }
    if (!(work_min > 0.0 && work_min <= work_max)) {
        throw std::invalid_argument("workload: need 0 < work_min <= work_max");
    }
    if (!(observation_signal >= 0.0) || !(observation_persistence >= 0.0 && observation_persistence < 1.0)) {
        throw std::invalid_argument("workload: observation_signal >= 0 and persistence in [0, 1) required");
    }
    planted.validate();
}

std::vector<bool> Scene::interest_flags() const
{
    std::vector<bool> flags;
    flags.reserve(regions.size());
    for (const auto& r : regions) {
        flags.push_back(r.interest);
    }
    return flags;
}

double Scene::total_work() const
{
    double sum = 0.0;
    for (const auto& r : regions) {
        sum += r.work;
    }
    return sum;
}

SceneWorkload generate_workload(const WorkloadConfig& config, std::uint64_t seed)
{
    config.validate();
    SceneWorkload workload{config, seed, {}};
    const auto users = diffusion::planted_users(config.planted, config.scenes, mix_seed(seed));
    const double phi = config.observation_persistence;
    const double innovation = std::sqrt(1.0 - phi * phi);
    for (int s = 0; s < config.scenes; ++s) {
        Rng rng = Rng::derive(seed, 1000 + static_cast<std::uint64_t>(s));
        Scene scene;
        scene.index = s;
        scene.latent = users[static_cast<std::size_t>(s)].latent;
        scene.user = users[static_cast<std::size_t>(s)].sample;
        const auto items = diffusion::sample_items(scene.latent, config.regions, config.interest_fraction, rng);
        for (int j = 0; j < config.regions; ++j) {
            Region region;
            region.work = rng.uniform(config.work_min, config.work_max);
            region.interest = items.interest[static_cast<std::size_t>(j)];
            region.features = items.features.row(j).transpose();
            scene.regions.push_back(std::move(region));
        }
        scene.observations.resize(config.frames_per_scene, config.regions);
        Vector noise(config.regions);
        for (int j = 0; j < config.regions; ++j) {
            noise(j) = rng.normal();
        }
        for (int f = 0; f < config.frames_per_scene; ++f) {
            if (f > 0) {
                for (int j = 0; j < config.regions; ++j) {
                    noise(j) = phi * noise(j) + innovation * rng.normal();
                }
            }
            for (int j = 0; j < config.regions; ++j) {
                scene.observations(f, j) =
                    config.observation_signal * (scene.regions[static_cast<std::size_t>(j)].interest ? 1.0 : 0.0) +
                    noise(j);
            }
        }
        workload.scenes.push_back(std::move(scene));
    }
    return workload;
}

std::string SceneWorkload::digest() const
{
    Digest d;
    d.add(seed);
    d.add(config.scenes).add(config.frames_per_scene).add(config.fps).add(config.regions);
    for (const auto& scene : scenes) {
        d.add(scene.index);
        d.add(std::span<const double>(scene.latent.data(), static_cast<std::size_t>(scene.latent.size())));
        d.add(std::span<const double>(scene.user.sequence.data(), static_cast<std::size_t>(scene.user.sequence.size())));
        d.add(std::span<const double>(scene.user.condition.data(), static_cast<std::size_t>(scene.user.condition.size())));
        for (const auto& r : scene.regions) {
            d.add(r.work).add(r.interest);
            d.add(std::span<const double>(r.features.data(), static_cast<std::size_t>(r.features.size())));
        }
        d.add(std::span<const double>(scene.observations.data(), static_cast<std::size_t>(scene.observations.size())));
    }
    return d.hex();
}

}  // namespace mvr::bench
