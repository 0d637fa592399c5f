#include "mvr/diffusion/planted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvr::diffusion {

namespace {
constexpr int kResourceDim = 4;
}

void PlantedConfig::validate() const
{
    layout.validate();
    if (length < 1) {
        throw std::invalid_argument("planted: length must be >= 1");
    }
    if (!(interaction_noise >= 0.0 && signal_noise >= 0.0 && resource_drift >= 0.0)) {
        throw std::invalid_argument("planted: noise levels must be >= 0");
    }
}

std::vector<PlantedUser> planted_users(const PlantedConfig& config, int count, std::uint64_t seed)
{
    config.validate();
    if (count < 0) {
        throw std::invalid_argument("planted: count must be >= 0");
    }
    const auto& layout = config.layout;
    const int signals = layout.latency + layout.fluency;
    Rng mix_rng(config.mixing_seed);
    const Matrix mixing = gaussian_like(kResourceDim, signals, mix_rng) / std::sqrt(double(kResourceDim));

    Rng rng = Rng::derive(seed, 11);
    std::vector<PlantedUser> users;
    users.reserve(static_cast<std::size_t>(count));
    for (int u = 0; u < count; ++u) {
        PlantedUser user;
        user.latent = gaussian_like(layout.interaction, 1, rng);
        Matrix resources(config.length, kResourceDim);
        resources.row(0) = gaussian_like(1, kResourceDim, rng);
        for (int l = 1; l < config.length; ++l) {
            resources.row(l) = resources.row(l - 1) + config.resource_drift * gaussian_like(1, kResourceDim, rng);
        }
        Matrix seq(config.length, layout.total());
        seq.middleCols(layout.interaction_begin(), layout.interaction) =
            user.latent.transpose().replicate(config.length, 1) +
            config.interaction_noise * gaussian_like(config.length, layout.interaction, rng);
        seq.middleCols(layout.latency_begin(), signals) =
            resources * mixing + config.signal_noise * gaussian_like(config.length, signals, rng);
        user.sample.sequence = std::move(seq);
        user.sample.condition = resources.colwise().mean().transpose();
        users.push_back(std::move(user));
    }
    return users;
}

std::vector<TrainingSample> planted_dataset(const PlantedConfig& config, int count, std::uint64_t seed)
{
    std::vector<TrainingSample> out;
    for (auto& user : planted_users(config, count, seed)) {
        out.push_back(std::move(user.sample));
    }
    return out;
}

PlantedItems sample_items(const Vector& latent, int count, double interest_fraction, Rng& rng)
{
    if (count < 1) {
        throw std::invalid_argument("planted: item count must be >= 1");
    }
    if (!(interest_fraction > 0.0 && interest_fraction < 1.0)) {
        throw std::invalid_argument("planted: interest_fraction must be in (0, 1)");
    }
    PlantedItems items;
    items.features = gaussian_like(count, latent.size(), rng);
    const Vector affinity = items.features * latent;
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return affinity(a) > affinity(b); });
    const auto flagged = static_cast<std::size_t>(std::lround(interest_fraction * count));
    items.interest.assign(static_cast<std::size_t>(count), false);
    for (std::size_t i = 0; i < flagged && i < order.size(); ++i) {
        items.interest[static_cast<std::size_t>(order[i])] = true;
    }
    return items;
}

}  // namespace mvr::diffusion
