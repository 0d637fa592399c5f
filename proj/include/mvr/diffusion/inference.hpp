#pragma once

#include <cstdint>
#include <vector>

#include "mvr/diffusion/model.hpp"

namespace mvr::diffusion {

/// Deterministic (zero-noise) reverse update from step t to an earlier step
/// through the predicted clean sequence.
Matrix reverse_update(const Matrix& x_t, const Matrix& predicted_noise, double alpha_bar_t, double alpha_bar_next);

/// Reverse process over start, start - stride, ..., stride, then to 0.
/// `start_step` defaults to the full schedule length and must be a multiple of
/// `stride`. `calls`, if given, receives the number of denoiser evaluations.
Matrix skip_step_infer(const Denoiser& denoiser, const Matrix& x_start, const Vector& condition,
                       const NoiseSchedule& schedule, int stride, int start_step = 0, int* calls = nullptr);

/// Reference loop visiting every step from start_step down to 1.
Matrix reverse_dense(const Denoiser& denoiser, const Matrix& x_start, const Vector& condition,
                     const NoiseSchedule& schedule, int start_step = 0);

struct Reconstruction {
    Matrix sequence;  ///< raw units
    int denoiser_calls = 0;
};

/// Online path for a new scene: standardize the history, diffuse it forward
/// to `start_step`, run skip-step reverse denoising under the condition, and
/// map the result back to raw units.
Reconstruction reconstruct(const PreferenceModel& model, const Matrix& history, const Vector& condition,
                           int stride, int start_step, std::uint64_t noise_seed);

struct ItemProbability {
    int item = 0;
    double probability = 0.5;
};

/// sigmoid(gain * <mean interaction row, item features>) for every item not
/// already interacted with. Logits are clipped to +-30 so every probability
/// stays strictly inside (0, 1).
std::vector<ItemProbability> interaction_probabilities(const Matrix& reconstructed, const ColumnLayout& layout,
                                                       const Matrix& item_features,
                                                       const std::vector<bool>& interacted, double gain = 1.0);

}  // namespace mvr::diffusion
