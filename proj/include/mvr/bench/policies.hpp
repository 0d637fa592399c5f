#pragma once

// Rendering policies and their evaluation.
//
// Every policy decides, per region and frame, between high and low level of
// detail. Render time = sum over frames and regions of work * multiplier /
// throughput. A region counts as predicted focus when it is rendered high in
// at least half of the frames; focus is scored against the interest flags.
//
// Baselines see only the per-frame attention observations, discretized into
// equiprobable bins. A calibration workload (separate seed) supplies the bin
// edges, P(interest | bin) and the bin transition matrix. Both baselines
// maximize  mult * (P(interest | bin) - render_cost * work)  per region-frame.
//   mdp:        per-region MDP over (bin, current LOD), actions {low, high},
//               LOD switches cost switch_cost; value iteration, policy
//               followed frame by frame starting from low.
//   random_opt: ro_samples random (posterior threshold, low multiplier)
//               pairs, scored on the posterior averaged over the first second,
//               applied statically; the best score is kept.
//   proposed:   preference reconstruction of the scene's user, interaction
//               probabilities over the regions' item features, top-q high.
//   none:       every region high.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvr/bench/metrics.hpp"
#include "mvr/bench/workload.hpp"
#include "mvr/diffusion/model.hpp"

namespace mvr::bench {

enum class PolicyKind { Proposed, Mdp, RandomOpt, None };

std::string_view to_string(PolicyKind kind);
/// "proposed", "mdp", "random_opt" or "none".
PolicyKind parse_policy(std::string_view name);
std::vector<PolicyKind> all_policies();

struct PolicySettings {
    double lod_high = 1.0;
    double lod_low = 0.25;
    double throughput = 3600.0;  ///< work units per simulated second
    double render_cost = 0.3;    ///< per work unit, relative to one full-quality interest hit
    double switch_cost = 0.05;
    double discount = 0.95;
    int observation_bins = 5;
    int calibration_scenes = 5;
    int ro_samples = 21;
    double focus_quantile = 0.3;
    int stride = 35;
    int start_step = 140;
    double inference_ms_per_call = 2.0;

    void validate() const;
};

struct ObservationModel {
    std::vector<double> edges;              ///< bins - 1 ascending thresholds
    std::vector<double> interest_given_bin;
    std::vector<std::vector<double>> transition;

    int bins() const { return static_cast<int>(interest_given_bin.size()); }
    int bin_of(double observation) const;
};

/// Fits the observation model on a fresh workload drawn from `seed`.
ObservationModel calibrate(const WorkloadConfig& config, const PolicySettings& settings, std::uint64_t seed);

struct SceneResult {
    int scene = 0;
    double render_time_s = 0.0;
    double inference_time_s = 0.0;
    double high_fraction = 0.0;  ///< share of region-frames rendered high
    int denoiser_calls = 0;
    Confusion confusion;
    /// random_opt only: score of every sampled configuration and of the kept one.
    std::vector<double> candidate_scores;
    double chosen_score = 0.0;
};

struct PolicyReport {
    PolicyKind policy = PolicyKind::None;
    std::vector<SceneResult> scenes;
    Confusion pooled;

    double mean_render_time() const;
    double mean_inference_time() const;
};

/// Top round(q * n) entries by probability (lower index first on ties).
std::vector<bool> focus_top_quantile(const std::vector<double>& probabilities, double quantile);

/// `model` is required for the proposed policy and ignored otherwise.
PolicyReport run_policy(const SceneWorkload& workload, PolicyKind kind, const PolicySettings& settings,
                        const ObservationModel& observations, const diffusion::PreferenceModel* model,
                        std::uint64_t seed);

}  // namespace mvr::bench
