#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mvr/bench/report.hpp"
#include "mvr/diffusion/denoiser.hpp"
#include "oracles/mdp_oracle.hpp"

using namespace mvr::bench;

namespace {

WorkloadConfig small_workload()
{
    WorkloadConfig cfg;
    cfg.scenes = 3;
    cfg.frames_per_scene = 600;
    return cfg;
}

mvr::diffusion::PreferenceModel untrained_model()
{
    mvr::diffusion::DenoiserConfig cfg;
    cfg.d_model = 8;
    cfg.heads = 2;
    return mvr::diffusion::PreferenceModel{mvr::diffusion::NoiseSchedule{},
                                           mvr::diffusion::ColumnLayout{},
                                           mvr::diffusion::Standardizer::identity(6),
                                           mvr::diffusion::Standardizer::identity(4),
                                           mvr::diffusion::Denoiser(cfg, 1),
                                           {}};
}

}  // namespace

TEST_CASE("value iteration on a hand-solved chain")
{
    // stay: rewards 0, 1, 2; move to the next state: 0.5, 0, 0 (state 2 moves to itself)
    Mdp mdp(3, 2);
    for (int s = 0; s < 3; ++s) {
        mdp.transition[0][s][s] = 1.0;
        mdp.transition[1][s][std::min(s + 1, 2)] = 1.0;
        mdp.reward[s][0] = s;
    }
    mdp.reward[0][1] = 0.5;
    const auto sol = value_iteration(mdp, 0.9);
    REQUIRE(sol.converged);
    // V2 = 2 / 0.1, V1 = 0.9 * V2, V0 = 0.5 + 0.9 * V1
    CHECK(std::abs(sol.values[2] - 20.0) < 1e-8);
    CHECK(std::abs(sol.values[1] - 18.0) < 1e-8);
    CHECK(std::abs(sol.values[0] - 16.7) < 1e-8);
    CHECK(sol.policy == std::vector<int>{1, 1, 0});
}

TEST_CASE("value iteration matches policy enumeration")
{
    mvr::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Mdp mdp(3, 2);
        for (int a = 0; a < 2; ++a) {
            for (int s = 0; s < 3; ++s) {
                double sum = 0.0;
                for (int t = 0; t < 3; ++t) {
                    mdp.transition[a][s][t] = rng.uniform(0.01, 1.0);
                    sum += mdp.transition[a][s][t];
                }
                for (int t = 0; t < 3; ++t) {
                    mdp.transition[a][s][t] /= sum;
                }
                mdp.reward[s][a] = rng.uniform(-1.0, 1.0);
            }
        }
        const auto sol = value_iteration(mdp, 0.95);
        const auto expected = oracle::enumerate_optimal_values(mdp, 0.95);
        for (int s = 0; s < 3; ++s) {
            CHECK(std::abs(sol.values[s] - expected[s]) < 1e-8);
        }
    }
    Mdp broken(2, 1);
    broken.transition[0][0][0] = 0.5;
    broken.transition[0][1][1] = 1.0;
    CHECK_THROWS_AS(value_iteration(broken, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(value_iteration(Mdp(1, 1), 1.0), std::invalid_argument);
}

TEST_CASE("confusion metric identities")
{
    mvr::Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        Confusion c;
        c.tp = static_cast<long>(rng.index(50));
        c.fp = static_cast<long>(rng.index(50));
        c.tn = static_cast<long>(rng.index(50));
        c.fn = static_cast<long>(rng.index(50));
        if (c.total() == 0) continue;
        CHECK(c.accuracy() == doctest::Approx(double(c.tp + c.tn) / double(c.total())));
        if (c.tp + c.fp > 0) CHECK(c.precision() == doctest::Approx(double(c.tp) / double(c.tp + c.fp)));
        if (c.tp + c.fn > 0) CHECK(c.recall() == doctest::Approx(double(c.tp) / double(c.tp + c.fn)));
        if (c.tp > 0) {
            CHECK(c.f1() == doctest::Approx(2.0 * c.tp / double(2 * c.tp + c.fp + c.fn)));
            const double harmonic = 2.0 / (1.0 / c.precision() + 1.0 / c.recall());
            CHECK(c.f1() == doctest::Approx(harmonic));
        } else {
            CHECK(c.f1() == 0.0);
        }
    }
    const auto perfect = score_focus({true, false, true, false}, {true, false, true, false});
    CHECK(perfect.accuracy() == 1.0);
    CHECK(perfect.recall() == 1.0);
    CHECK(perfect.f1() == 1.0);
    CHECK_THROWS_AS(score_focus({true}, {true, false}), std::invalid_argument);
}

TEST_CASE("relative reductions and comparison table")
{
    CHECK(std::round(relative_reduction(18.14, 39.54) * 100.0) / 100.0 == doctest::Approx(54.12));
    CHECK(relative_reduction(5.0, 5.0) == 0.0);
    CHECK_THROWS_AS(relative_reduction(1.0, 0.0), std::invalid_argument);

    const ComparisonRow row{"a", 10.0, 0.0, 0.8, 0.7, 0.6, 0.65};
    ComparisonRow twin = row;
    twin.policy = "b";
    const auto same = compare(std::vector<ComparisonRow>{row, twin});
    CHECK(same.rows.size() == 2);
    REQUIRE(same.deltas.size() == 2);
    for (const auto& d : same.deltas) {
        CHECK(d.time_reduction_pct == 0.0);
        CHECK(d.accuracy_delta == 0.0);
        CHECK(d.recall_delta == 0.0);
        CHECK(d.f1_delta == 0.0);
    }
    ComparisonRow fast = row;
    fast.policy = "proposed";
    fast.mean_render_time_s = 18.14;
    ComparisonRow slow = row;
    slow.policy = "none";
    slow.mean_render_time_s = 39.54;
    const auto table = compare(std::vector<ComparisonRow>{fast, slow, twin});
    CHECK(table.rows.size() == 3);
    CHECK(table.deltas.size() == 6);
    CHECK(table.deltas[0].candidate == "proposed");
    CHECK(table.deltas[0].baseline == "none");
    CHECK(table.deltas[0].time_reduction_pct == doctest::Approx(54.1224).epsilon(1e-5));
    CHECK_THROWS_AS(compare(std::vector<ComparisonRow>{row}), std::invalid_argument);
}

TEST_CASE("workload generation")
{
    const auto cfg = small_workload();
    const auto a = generate_workload(cfg, 1);
    const auto b = generate_workload(cfg, 1);
    CHECK(a.digest() == b.digest());
    std::set<std::string> digests;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        digests.insert(generate_workload(cfg, seed).digest());
    }
    CHECK(digests.size() == 10);

    for (const auto& scene : a.scenes) {
        int flagged = 0;
        double in_mean = 0.0;
        double out_mean = 0.0;
        for (std::size_t j = 0; j < scene.regions.size(); ++j) {
            const double m = scene.observations.col(static_cast<Eigen::Index>(j)).mean();
            if (scene.regions[j].interest) {
                ++flagged;
                in_mean += m;
            } else {
                out_mean += m;
            }
            CHECK(scene.regions[j].work >= cfg.work_min);
            CHECK(scene.regions[j].work <= cfg.work_max);
        }
        CHECK(flagged == 12);
        CHECK(in_mean / flagged > out_mean / (40 - flagged));
        CHECK(scene.observations.rows() == 600);
        CHECK(scene.user.sequence.rows() == 16);
    }
    WorkloadConfig bad = cfg;
    bad.interest_fraction = 0.01;
    CHECK_THROWS_AS(generate_workload(bad, 0), std::invalid_argument);
    bad = cfg;
    bad.observation_persistence = 1.0;
    CHECK_THROWS_AS(generate_workload(bad, 0), std::invalid_argument);

    const WorkloadConfig defaults;
    CHECK(defaults.scenes == 20);
    CHECK(defaults.frames_per_scene == 3600);
    CHECK(defaults.frames_per_scene == defaults.fps * 60);
}

TEST_CASE("observation calibration")
{
    const auto cfg = small_workload();
    const PolicySettings settings;
    const auto obs = calibrate(cfg, settings, 2);
    REQUIRE(obs.bins() == 5);
    CHECK(obs.edges.size() == 4);
    for (int b = 1; b < obs.bins(); ++b) {
        CHECK(obs.interest_given_bin[b] > obs.interest_given_bin[b - 1]);
    }
    for (const auto& row : obs.transition) {
        double sum = 0.0;
        for (double p : row) sum += p;
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(obs.bin_of(-1e9) == 0);
    CHECK(obs.bin_of(1e9) == 4);
}

TEST_CASE("policy semantics")
{
    const auto cfg = small_workload();
    const auto workload = generate_workload(cfg, 4);
    PolicySettings settings;
    const auto obs = calibrate(cfg, settings, 4);
    const auto model = untrained_model();

    const auto none = run_policy(workload, PolicyKind::None, settings, obs, nullptr, 4);
    CHECK(none.pooled.recall() == 1.0);
    CHECK(none.pooled.precision() == doctest::Approx(0.3));
    for (const auto& s : none.scenes) {
        CHECK(s.render_time_s ==
              doctest::Approx(600.0 * workload.scenes[static_cast<std::size_t>(s.scene)].total_work() / 3600.0));
    }

    std::vector<PolicyReport> reports;
    for (auto kind : all_policies()) {
        reports.push_back(run_policy(workload, kind, settings, obs, &model, 4));
        CHECK(reports.back().scenes.size() == 3);
    }
    for (const auto& report : reports) {
        for (std::size_t s = 0; s < report.scenes.size(); ++s) {
            CHECK(report.scenes[s].render_time_s <= none.scenes[s].render_time_s + 1e-9);
            CHECK(report.scenes[s].render_time_s > 0.0);
        }
    }
    for (const auto& s : reports[0].scenes) {
        CHECK(s.denoiser_calls == 4);
        CHECK(s.inference_time_s == doctest::Approx(0.008));
        CHECK(s.confusion.tp + s.confusion.fp == 12);
    }
    for (const auto& s : reports[2].scenes) {
        REQUIRE(s.candidate_scores.size() == 21);
        for (double score : s.candidate_scores) {
            CHECK(s.chosen_score >= score);
        }
    }
    CHECK_THROWS_AS(run_policy(workload, PolicyKind::Proposed, settings, obs, nullptr, 4), std::invalid_argument);

    // the run is a pure function of its inputs
    const auto again = run_policy(workload, PolicyKind::RandomOpt, settings, obs, nullptr, 4);
    std::ostringstream x;
    std::ostringstream y;
    write_scene_csv(x, {reports[2]});
    write_scene_csv(y, {again});
    CHECK(x.str() == y.str());

    // free rendering: the MDP keeps everything high; prohibitive rendering: everything low
    PolicySettings free_render = settings;
    free_render.render_cost = 0.0;
    const auto all_high = run_policy(workload, PolicyKind::Mdp, free_render, obs, nullptr, 4);
    for (std::size_t s = 0; s < all_high.scenes.size(); ++s) {
        CHECK(all_high.scenes[s].high_fraction == doctest::Approx(1.0));
        CHECK(all_high.scenes[s].render_time_s == doctest::Approx(none.scenes[s].render_time_s));
    }
    PolicySettings costly = settings;
    costly.render_cost = 100.0;
    const auto all_low = run_policy(workload, PolicyKind::Mdp, costly, obs, nullptr, 4);
    for (std::size_t s = 0; s < all_low.scenes.size(); ++s) {
        CHECK(all_low.scenes[s].high_fraction == 0.0);
        CHECK(all_low.scenes[s].render_time_s == doctest::Approx(0.25 * none.scenes[s].render_time_s));
    }

    CHECK(parse_policy("random_opt") == PolicyKind::RandomOpt);
    CHECK_THROWS_AS(parse_policy("greedy"), std::invalid_argument);
    PolicySettings bad = settings;
    bad.discount = 1.0;
    CHECK_THROWS_AS(run_policy(workload, PolicyKind::None, bad, obs, nullptr, 4), std::invalid_argument);
}

TEST_CASE("oracle probabilities give a perfect focus set")
{
    const auto workload = generate_workload(small_workload(), 6);
    for (const auto& scene : workload.scenes) {
        std::vector<double> probs;
        for (const auto& r : scene.regions) probs.push_back(r.interest ? 1.0 : 0.0);
        const auto c = score_focus(focus_top_quantile(probs, 0.3), scene.interest_flags());
        CHECK(c.accuracy() == 1.0);
        CHECK(c.recall() == 1.0);
        CHECK(c.f1() == 1.0);
    }
    CHECK(focus_top_quantile({0.1, 0.9, 0.5, 0.5}, 0.5) == std::vector<bool>{false, true, true, false});
}

TEST_CASE("report writers")
{
    const auto workload = generate_workload(small_workload(), 8);
    const PolicySettings settings;
    const ObservationModel obs = calibrate(small_workload(), settings, 8);
    const std::vector<PolicyReport> reports{run_policy(workload, PolicyKind::None, settings, obs, nullptr, 8),
                                            run_policy(workload, PolicyKind::Mdp, settings, obs, nullptr, 8)};
    std::ostringstream scenes;
    write_scene_csv(scenes, reports);
    const std::string scene_text = scenes.str();
    CHECK(scene_text.rfind("policy,scene,render_time_s,", 0) == 0);
    CHECK(std::count(scene_text.begin(), scene_text.end(), '\n') == 7);
    const auto cmp = compare(reports);
    std::ostringstream summary;
    write_summary_csv(summary, cmp);
    const std::string summary_text = summary.str();
    CHECK(std::count(summary_text.begin(), summary_text.end(), '\n') == 3);
    std::ostringstream json;
    write_summary_json(json, cmp, workload.digest(), 8);
    CHECK(json.str().find("\"time_reduction_pct\"") != std::string::npos);
    std::ostringstream series;
    write_time_series(series, reports[1]);
    CHECK(series.str().rfind("scene,render_time_s\n0,", 0) == 0);
}
