#include "mvr/bench/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "mvr/bench/mdp.hpp"
#include "mvr/common/errors.hpp"
#include "mvr/diffusion/inference.hpp"

namespace mvr::bench {

std::string_view to_string(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::Proposed: return "proposed";
    case PolicyKind::Mdp: return "mdp";
    case PolicyKind::RandomOpt: return "random_opt";
    case PolicyKind::None: return "none";
    }
    return "unknown";
}

PolicyKind parse_policy(std::string_view name)
{
    for (PolicyKind kind : all_policies()) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw std::invalid_argument(fmt::format("unknown policy '{}' (expected proposed, mdp, random_opt or none)", name));
}

std::vector<PolicyKind> all_policies()
{
    return {PolicyKind::Proposed, PolicyKind::Mdp, PolicyKind::RandomOpt, PolicyKind::None};
}

void PolicySettings::validate() const
{
    if (!(lod_low > 0.0 && lod_low < lod_high)) {
        throw std::invalid_argument("policy: need 0 < lod_low < lod_high");
    }
    if (!(throughput > 0.0) || !(render_cost >= 0.0) || !(switch_cost >= 0.0)) {
        throw std::invalid_argument("policy: throughput must be > 0, costs >= 0");
    }
    if (!(discount > 0.0 && discount < 1.0)) {
        throw std::invalid_argument("policy: discount must be in (0, 1)");
    }
    if (observation_bins < 2 || calibration_scenes < 1 || ro_samples < 1) {
        throw std::invalid_argument("policy: observation_bins >= 2, calibration_scenes >= 1, ro_samples >= 1");
    }
    if (!(focus_quantile > 0.0 && focus_quantile < 1.0)) {
        throw std::invalid_argument("policy: focus_quantile must be in (0, 1)");
    }
    if (stride < 1 || start_step < 0 || !(inference_ms_per_call >= 0.0)) {
        throw std::invalid_argument("policy: stride >= 1, start_step >= 0, inference_ms_per_call >= 0");
    }
}

int ObservationModel::bin_of(double observation) const
{
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), observation) - edges.begin());
}

ObservationModel calibrate(const WorkloadConfig& config, const PolicySettings& settings, std::uint64_t seed)
{
    settings.validate();
    WorkloadConfig cal_config = config;
    cal_config.scenes = settings.calibration_scenes;
    const SceneWorkload cal = generate_workload(cal_config, mix_seed(seed ^ 0xca11b7a7e0000000ULL));

    std::vector<double> all;
    for (const auto& scene : cal.scenes) {
        all.insert(all.end(), scene.observations.data(), scene.observations.data() + scene.observations.size());
    }
    const int bins = settings.observation_bins;
    ObservationModel model;
    for (int k = 1; k < bins; ++k) {
        const auto rank = static_cast<std::size_t>(std::floor(static_cast<double>(k) * all.size() / bins));
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rank), all.end());
        model.edges.push_back(all[rank]);
    }
    std::sort(model.edges.begin(), model.edges.end());

    std::vector<double> hits(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::vector<double>> moves(static_cast<std::size_t>(bins), std::vector<double>(bins, 0.0));
    for (const auto& scene : cal.scenes) {
        for (Eigen::Index j = 0; j < scene.observations.cols(); ++j) {
            const bool interest = scene.regions[static_cast<std::size_t>(j)].interest;
            int previous = -1;
            for (Eigen::Index f = 0; f < scene.observations.rows(); ++f) {
                const int b = model.bin_of(scene.observations(f, j));
                counts[static_cast<std::size_t>(b)] += 1.0;
                hits[static_cast<std::size_t>(b)] += interest ? 1.0 : 0.0;
                if (previous >= 0) {
                    moves[static_cast<std::size_t>(previous)][static_cast<std::size_t>(b)] += 1.0;
                }
                previous = b;
            }
        }
    }
    for (int b = 0; b < bins; ++b) {
        const auto i = static_cast<std::size_t>(b);
        model.interest_given_bin.push_back(counts[i] > 0.0 ? hits[i] / counts[i] : 0.0);
        const double row = std::accumulate(moves[i].begin(), moves[i].end(), 0.0);
        std::vector<double> probs(static_cast<std::size_t>(bins), 0.0);
        for (int c = 0; c < bins; ++c) {
            probs[static_cast<std::size_t>(c)] = row > 0.0 ? moves[i][static_cast<std::size_t>(c)] / row : (c == b ? 1.0 : 0.0);
        }
        model.transition.push_back(std::move(probs));
    }
    return model;
}

double PolicyReport::mean_render_time() const
{
    double sum = 0.0;
    for (const auto& s : scenes) sum += s.render_time_s;
    return scenes.empty() ? 0.0 : sum / static_cast<double>(scenes.size());
}

double PolicyReport::mean_inference_time() const
{
    double sum = 0.0;
    for (const auto& s : scenes) sum += s.inference_time_s;
    return scenes.empty() ? 0.0 : sum / static_cast<double>(scenes.size());
}

std::vector<bool> focus_top_quantile(const std::vector<double>& probabilities, double quantile)
{
    if (!(quantile > 0.0 && quantile < 1.0)) {
        throw std::invalid_argument("focus_top_quantile: quantile must be in (0, 1)");
    }
    std::vector<std::size_t> order(probabilities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
    const auto count = static_cast<std::size_t>(std::lround(quantile * static_cast<double>(probabilities.size())));
    std::vector<bool> focus(probabilities.size(), false);
    for (std::size_t i = 0; i < count && i < order.size(); ++i) {
        focus[order[i]] = true;
    }
    return focus;
}

namespace {

// Time and scoring for a decision that holds for the whole scene.
SceneResult static_result(const Scene& scene, const std::vector<double>& multipliers, const std::vector<bool>& high,
                          const PolicySettings& settings)
{
    SceneResult result;
    result.scene = scene.index;
    const auto frames = static_cast<double>(scene.observations.rows());
    double per_frame = 0.0;
    int high_count = 0;
    for (std::size_t j = 0; j < scene.regions.size(); ++j) {
        per_frame += scene.regions[j].work * multipliers[j];
        high_count += high[j] ? 1 : 0;
    }
    result.render_time_s = frames * per_frame / settings.throughput;
    result.high_fraction = static_cast<double>(high_count) / static_cast<double>(scene.regions.size());
    result.confusion = score_focus(high, scene.interest_flags());
    return result;
}

SceneResult run_none(const Scene& scene, const PolicySettings& settings)
{
    return static_result(scene, std::vector<double>(scene.regions.size(), settings.lod_high),
                         std::vector<bool>(scene.regions.size(), true), settings);
}

SceneResult run_proposed(const Scene& scene, const PolicySettings& settings, const diffusion::PreferenceModel& model,
                         std::uint64_t seed)
{
    const auto rec = diffusion::reconstruct(model, scene.user.sequence, scene.user.condition, settings.stride,
                                            settings.start_step, Rng::derive(seed, 7000 + scene.index).next_u64());
    Matrix features(static_cast<Eigen::Index>(scene.regions.size()), model.layout.interaction);
    for (std::size_t j = 0; j < scene.regions.size(); ++j) {
        features.row(static_cast<Eigen::Index>(j)) = scene.regions[j].features.transpose();
    }
    const auto probs = diffusion::interaction_probabilities(rec.sequence, model.layout, features,
                                                            std::vector<bool>(scene.regions.size(), false));
    std::vector<double> p(scene.regions.size(), 0.0);
    for (const auto& item : probs) {
        p[static_cast<std::size_t>(item.item)] = item.probability;
    }
    const auto high = focus_top_quantile(p, settings.focus_quantile);
    std::vector<double> mult(high.size());
    for (std::size_t j = 0; j < high.size(); ++j) {
        mult[j] = high[j] ? settings.lod_high : settings.lod_low;
    }
    SceneResult result = static_result(scene, mult, high, settings);
    result.denoiser_calls = rec.denoiser_calls;
    result.inference_time_s = rec.denoiser_calls * settings.inference_ms_per_call / 1000.0;
    return result;
}

SceneResult run_mdp(const Scene& scene, const PolicySettings& settings, const ObservationModel& obs)
{
    const int bins = obs.bins();
    const double mult[2] = {settings.lod_low, settings.lod_high};
    SceneResult result;
    result.scene = scene.index;
    std::vector<bool> focus(scene.regions.size(), false);
    double work_sum = 0.0;
    long high_frames = 0;
    const Eigen::Index frames = scene.observations.rows();
    for (std::size_t j = 0; j < scene.regions.size(); ++j) {
        const double work = scene.regions[j].work;
        // state = bin * 2 + current LOD (0 low, 1 high); action = next LOD
        Mdp mdp(2 * bins, 2);
        for (int b = 0; b < bins; ++b) {
            for (int lod = 0; lod < 2; ++lod) {
                const int s = 2 * b + lod;
                for (int a = 0; a < 2; ++a) {
                    mdp.reward[s][a] = mult[a] * (obs.interest_given_bin[b] - settings.render_cost * work) -
                                       (a != lod ? settings.switch_cost : 0.0);
                    for (int nb = 0; nb < bins; ++nb) {
                        mdp.transition[a][s][2 * nb + a] = obs.transition[b][nb];
                    }
                }
            }
        }
        const MdpSolution sol = value_iteration(mdp, settings.discount);
        if (!sol.converged) {
            throw NumericalError(fmt::format("mdp: value iteration did not converge for region {}", j));
        }
        int lod = 0;
        long high = 0;
        for (Eigen::Index f = 0; f < frames; ++f) {
            const int b = obs.bin_of(scene.observations(f, static_cast<Eigen::Index>(j)));
            lod = sol.policy[2 * b + lod];
            work_sum += work * mult[lod];
            high += lod;
        }
        high_frames += high;
        focus[j] = 2 * high >= frames;
    }
    result.render_time_s = work_sum / settings.throughput;
    result.high_fraction =
        static_cast<double>(high_frames) / static_cast<double>(frames * static_cast<Eigen::Index>(scene.regions.size()));
    result.confusion = score_focus(focus, scene.interest_flags());
    return result;
}

SceneResult run_random_opt(const Scene& scene, int fps, const PolicySettings& settings, const ObservationModel& obs,
                           std::uint64_t seed)
{
    // first second of observations
    const Eigen::Index window = std::min<Eigen::Index>(scene.observations.rows(), fps);
    std::vector<double> posterior(scene.regions.size(), 0.0);
    for (std::size_t j = 0; j < scene.regions.size(); ++j) {
        for (Eigen::Index f = 0; f < window; ++f) {
            posterior[j] += obs.interest_given_bin[obs.bin_of(scene.observations(f, static_cast<Eigen::Index>(j)))];
        }
        posterior[j] /= static_cast<double>(window);
    }
    const auto frames = static_cast<double>(scene.observations.rows());
    Rng rng = Rng::derive(seed, 9000 + scene.index);
    std::vector<double> scores;
    std::vector<bool> best_high;
    std::vector<double> best_mult;
    double best_score = 0.0;
    for (int k = 0; k < settings.ro_samples; ++k) {
        const double threshold = rng.uniform();
        const double low = rng.uniform(settings.lod_low, settings.lod_high);
        std::vector<bool> high(scene.regions.size());
        std::vector<double> mult(scene.regions.size());
        double score = 0.0;
        for (std::size_t j = 0; j < scene.regions.size(); ++j) {
            high[j] = posterior[j] > threshold;
            mult[j] = high[j] ? settings.lod_high : low;
            score += frames * mult[j] * (posterior[j] - settings.render_cost * scene.regions[j].work);
        }
        scores.push_back(score);
        if (k == 0 || score > best_score) {
            best_score = score;
            best_high = std::move(high);
            best_mult = std::move(mult);
        }
    }
    SceneResult result = static_result(scene, best_mult, best_high, settings);
    result.candidate_scores = std::move(scores);
    result.chosen_score = best_score;
    return result;
}

}  // namespace

PolicyReport run_policy(const SceneWorkload& workload, PolicyKind kind, const PolicySettings& settings,
                        const ObservationModel& observations, const diffusion::PreferenceModel* model,
                        std::uint64_t seed)
{
    settings.validate();
    if (kind == PolicyKind::Proposed && model == nullptr) {
        throw std::invalid_argument("bench: the proposed policy needs a trained preference model");
    }
    if ((kind == PolicyKind::Mdp || kind == PolicyKind::RandomOpt) && observations.bins() < 2) {
        throw std::invalid_argument("bench: baselines need a calibrated observation model");
    }
    PolicyReport report;
    report.policy = kind;
    for (const auto& scene : workload.scenes) {
        SceneResult r;
        switch (kind) {
        case PolicyKind::Proposed: r = run_proposed(scene, settings, *model, seed); break;
        case PolicyKind::Mdp: r = run_mdp(scene, settings, observations); break;
        case PolicyKind::RandomOpt: r = run_random_opt(scene, workload.config.fps, settings, observations, seed); break;
        case PolicyKind::None: r = run_none(scene, settings); break;
        }
        report.pooled += r.confusion;
        report.scenes.push_back(std::move(r));
    }
    return report;
}

}  // namespace mvr::bench
