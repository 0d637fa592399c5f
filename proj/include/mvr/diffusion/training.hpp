#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mvr/diffusion/model.hpp"

namespace mvr::diffusion {

struct TrainSettings {
    double learning_rate = 1e-4;
    int batch_size = 32;  ///< 256 at full scale
    int epochs = 20;
    int patience = 3;
    double validation_fraction = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int loss_buckets = 10;  ///< diffusion-step buckets for the per-step error report
    std::uint64_t seed = 0;

    void validate() const;
};

/// One raw training example: a preference history and its resource condition.
struct TrainingSample {
    Matrix sequence;
    Vector condition;
};

/// A fully specified noise-prediction term: (x0, S, t, eps), all standardized.
struct Probe {
    Matrix clean;
    Vector condition;
    int step = 1;
    Matrix noise;
};

struct EpochStats {
    int epoch = 0;  ///< 0 is the untrained model
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    PreferenceModel model;
    std::vector<EpochStats> curve;
    int best_epoch = 0;
    bool early_stopped = false;
    /// Mean loss of the restored model per step bucket on the training probes.
    std::vector<double> bucket_losses;

    double initial_train_loss() const { return curve.front().train_loss; }
    double final_train_loss() const { return curve[best_epoch].train_loss; }
};

/// Mean squared error between injected and predicted noise, averaged over all
/// elements of all probes.
double noise_prediction_loss(const Denoiser& denoiser, const std::vector<Probe>& probes,
                             const NoiseSchedule& schedule);

/// Same loss; also accumulates its gradient into the denoiser's parameters.
double loss_and_gradient(Denoiser& denoiser, const std::vector<Probe>& probes, const NoiseSchedule& schedule);

/// Largest per-tensor relative error between backpropagated gradients and
/// central finite differences: max over tensors of
/// ||g_analytic - g_numeric||_inf / max(||g_analytic||_inf, ||g_numeric||_inf, 1e-6).
/// The floor keeps tensors whose true gradient is identically zero (a key
/// bias under softmax shift invariance) from scoring rounding noise as 100%.
double analytic_gradient_check(Denoiser& denoiser, const std::vector<Probe>& probes,
                               const NoiseSchedule& schedule, double step = 1e-4);

/// Adam update with bias correction; gradients are read from the parameter set.
void adam_step(ParameterSet& params, OptimizerState& state, const TrainSettings& settings);

/// Noise-prediction training with early stopping on a held-out split. The
/// best-validation weights are restored at the end.
TrainResult train(const std::vector<TrainingSample>& dataset, const ColumnLayout& layout,
                  const NoiseSchedule& schedule, const DenoiserConfig& config, const TrainSettings& settings);

/// epoch,train_loss,val_loss
void write_loss_curve(std::ostream& out, const std::vector<EpochStats>& curve);

}  // namespace mvr::diffusion
