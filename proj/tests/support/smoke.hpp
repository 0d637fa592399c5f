#pragma once

// Smoke-training protocol shared by the unit and acceptance suites:
// 256 planted sequences (L = 16, F = 6), width 64/4, up to 20 epochs, then
// 20 held-out planted users scored on their interest items.

#include <cstdint>
#include <vector>

#include "mvr/diffusion/inference.hpp"
#include "mvr/diffusion/planted.hpp"
#include "mvr/diffusion/training.hpp"

namespace smoke {

using namespace mvr::diffusion;

inline constexpr int kSequences = 256;
inline constexpr int kHeldOutUsers = 20;
inline constexpr int kItems = 40;
inline constexpr double kInterestFraction = 0.3;
inline constexpr int kMaskedItems = 8;
inline constexpr int kStartStep = 140;
inline constexpr int kStride = 35;

struct UserScore {
    double interest_mean = 0.0;
    double other_mean = 0.0;
};

struct Outcome {
    TrainResult training;
    std::vector<UserScore> users;
    int users_ranked_correctly = 0;
};

inline TrainResult train_model(std::uint64_t seed)
{
    PlantedConfig planted;
    const auto data = planted_dataset(planted, kSequences, seed);
    DenoiserConfig config;
    TrainSettings settings;
    settings.seed = seed;
    return train(data, planted.layout, NoiseSchedule{}, config, settings);
}

inline std::vector<UserScore> score_users(const PreferenceModel& model, std::uint64_t seed)
{
    PlantedConfig planted;
    const auto users = planted_users(planted, kHeldOutUsers, seed ^ 0x5eed0ffULL);
    mvr::Rng item_rng = mvr::Rng::derive(seed, 99);
    std::vector<UserScore> scores;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto items = sample_items(users[u].latent, kItems, kInterestFraction, item_rng);
        std::vector<bool> masked(kItems, false);
        for (int m = 0; m < kMaskedItems;) {
            const auto j = item_rng.index(kItems);
            if (!masked[j]) {
                masked[j] = true;
                ++m;
            }
        }
        const auto rec = reconstruct(model, users[u].sample.sequence, users[u].sample.condition, kStride, kStartStep,
                                     seed * 1000 + u);
        const auto probs = interaction_probabilities(rec.sequence, model.layout, items.features, masked);
        UserScore score;
        int interest = 0;
        int other = 0;
        for (const auto& p : probs) {
            if (items.interest[static_cast<std::size_t>(p.item)]) {
                score.interest_mean += p.probability;
                ++interest;
            } else {
                score.other_mean += p.probability;
                ++other;
            }
        }
        score.interest_mean /= interest > 0 ? interest : 1;
        score.other_mean /= other > 0 ? other : 1;
        scores.push_back(score);
    }
    return scores;
}

inline Outcome run(std::uint64_t seed)
{
    Outcome out{train_model(seed), {}, 0};
    out.users = score_users(out.training.model, seed);
    for (const auto& s : out.users) {
        out.users_ranked_correctly += s.interest_mean > s.other_mean ? 1 : 0;
    }
    return out;
}

}  // namespace smoke
