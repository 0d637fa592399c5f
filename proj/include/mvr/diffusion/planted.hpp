#pragma once

// Synthetic users with a planted low-rank interest structure.
//
// Each user has a latent taste u ~ N(0, I_K) with K = layout.interaction.
// Interaction rows are u plus noise. A resource state S_l drifts as a random
// walk; latency and fluency columns are fixed linear mixes of S_l plus noise,
// and the condition is the window mean of S_l. Items carry features
// v ~ N(0, I_K) and the interest set is the top fraction by u.v.

#include <cstdint>
#include <vector>

#include "mvr/diffusion/training.hpp"

namespace mvr::diffusion {

struct PlantedConfig {
    int length = 16;
    ColumnLayout layout;
    double interaction_noise = 0.5;
    double signal_noise = 0.3;
    double resource_drift = 0.1;
    std::uint64_t mixing_seed = 7;  ///< shared resource-to-signal mixing across all users

    void validate() const;
};

struct PlantedUser {
    Vector latent;
    TrainingSample sample;
};

struct PlantedItems {
    Matrix features;  ///< items x K
    std::vector<bool> interest;
};

std::vector<PlantedUser> planted_users(const PlantedConfig& config, int count, std::uint64_t seed);

std::vector<TrainingSample> planted_dataset(const PlantedConfig& config, int count, std::uint64_t seed);

/// Exactly round(fraction * count) items are flagged, highest u.v first.
PlantedItems sample_items(const Vector& latent, int count, double interest_fraction, Rng& rng);

}  // namespace mvr::diffusion
