#include "mvr/diffusion/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mvr::diffusion {

Matrix reverse_update(const Matrix& x_t, const Matrix& predicted_noise, double alpha_bar_t, double alpha_bar_next)
{
    if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0 && alpha_bar_next > 0.0 && alpha_bar_next <= 1.0)) {
        throw std::invalid_argument("reverse_update: alpha_bar values must lie in (0, 1]");
    }
    const Matrix clean = (x_t - std::sqrt(1.0 - alpha_bar_t) * predicted_noise) / std::sqrt(alpha_bar_t);
    return std::sqrt(alpha_bar_next) * clean + std::sqrt(1.0 - alpha_bar_next) * predicted_noise;
}

namespace {

int resolve_start(const NoiseSchedule& schedule, int start_step)
{
    const int start = start_step == 0 ? schedule.steps() : start_step;
    if (start < 1 || start > schedule.steps()) {
        throw std::invalid_argument(fmt::format("inference: start step {} outside [1, {}]", start, schedule.steps()));
    }
    return start;
}

}  // namespace

Matrix skip_step_infer(const Denoiser& denoiser, const Matrix& x_start, const Vector& condition,
                       const NoiseSchedule& schedule, int stride, int start_step, int* calls)
{
    const int start = resolve_start(schedule, start_step);
    if (stride < 1 || start % stride != 0) {
        throw std::invalid_argument(
            fmt::format("inference: stride {} must be >= 1 and divide the start step {}", stride, start));
    }
    Matrix x = x_start;
    int evaluations = 0;
    for (int t = start; t > 0; t -= stride) {
        const Matrix eps = denoiser.predict(x, t, condition);
        ++evaluations;
        x = reverse_update(x, eps, schedule.alpha_bar(t), schedule.alpha_bar(t - stride));
    }
    if (calls != nullptr) {
        *calls = evaluations;
    }
    return x;
}

Matrix reverse_dense(const Denoiser& denoiser, const Matrix& x_start, const Vector& condition,
                     const NoiseSchedule& schedule, int start_step)
{
    const int start = resolve_start(schedule, start_step);
    Matrix x = x_start;
    for (int t = start; t > 0; --t) {
        x = reverse_update(x, denoiser.predict(x, t, condition), schedule.alpha_bar(t), schedule.alpha_bar(t - 1));
    }
    return x;
}

Reconstruction reconstruct(const PreferenceModel& model, const Matrix& history, const Vector& condition,
                           int stride, int start_step, std::uint64_t noise_seed)
{
    if (history.cols() != model.layout.total()) {
        throw std::invalid_argument(fmt::format("reconstruct: history has {} columns, layout expects {}",
                                                history.cols(), model.layout.total()));
    }
    if (!history.allFinite() || !condition.allFinite()) {
        throw std::invalid_argument("reconstruct: non-finite input");
    }
    const int start = resolve_start(model.schedule, start_step);
    Rng rng(noise_seed);
    const Matrix clean = model.sequence_scaler.apply(history);
    const Matrix noisy = forward_diffuse(clean, start, model.schedule, gaussian_like(clean.rows(), clean.cols(), rng));
    Reconstruction out;
    const Matrix denoised = skip_step_infer(model.denoiser, noisy, model.condition_scaler.apply(condition),
                                            model.schedule, stride, start, &out.denoiser_calls);
    out.sequence = model.sequence_scaler.invert(denoised);
    return out;
}

std::vector<ItemProbability> interaction_probabilities(const Matrix& reconstructed, const ColumnLayout& layout,
                                                       const Matrix& item_features,
                                                       const std::vector<bool>& interacted, double gain)
{
    if (reconstructed.cols() != layout.total() || reconstructed.rows() < 1) {
        throw std::invalid_argument("interaction_probabilities: sequence shape differs from the layout");
    }
    if (item_features.cols() != layout.interaction) {
        throw std::invalid_argument("interaction_probabilities: item feature width differs from the interaction block");
    }
    if (interacted.size() != static_cast<std::size_t>(item_features.rows())) {
        throw std::invalid_argument("interaction_probabilities: mask length differs from the item count");
    }
    const Vector preference =
        reconstructed.middleCols(layout.interaction_begin(), layout.interaction).colwise().mean().transpose();
    std::vector<ItemProbability> out;
    for (Eigen::Index j = 0; j < item_features.rows(); ++j) {
        if (interacted[static_cast<std::size_t>(j)]) {
            continue;
        }
        const double logit = std::clamp(gain * item_features.row(j).dot(preference), -30.0, 30.0);
        out.push_back({static_cast<int>(j), 1.0 / (1.0 + std::exp(-logit))});
    }
    return out;
}

}  // namespace mvr::diffusion
