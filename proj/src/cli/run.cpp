#include "mvr/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mvr/bench/report.hpp"
#include "mvr/common/errors.hpp"
#include "mvr/common/format.hpp"
#include "mvr/common/rng.hpp"
#include "mvr/diffusion/checkpoint.hpp"
#include "mvr/diffusion/inference.hpp"

#ifndef MVR_VERSION
#define MVR_VERSION "0.0.0"
#endif

namespace mvr::cli {

std::string_view version() { return MVR_VERSION; }

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"game-solve", "prerender-sim", "diffusion-train", "diffusion-infer",
                                                "bench-run"};
    return names;
}

std::map<std::string, std::uint64_t> named_seeds(std::uint64_t seed)
{
    std::map<std::string, std::uint64_t> seeds;
    seeds["global"] = seed;
    const char* names[] = {"walk", "dataset", "training", "evaluation", "workload", "calibration", "policy"};
    std::uint64_t stream = 1;
    for (const char* name : names) {
        seeds[name] = Rng::derive(seed, stream++).next_u64();
    }
    return seeds;
}

void write_manifest(std::ostream& out, const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["config_digest"] = m.config_digest;
    j["seeds"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : m.seeds) {
        j["seeds"][name] = value;
    }
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = m.outputs;
    out << j.dump(2) << '\n';
}

namespace {

std::string utc_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

// Output directory that records every file written through it.
class Outputs {
public:
    explicit Outputs(std::filesystem::path root) : root_(std::move(root)) { std::filesystem::create_directories(root_); }

    void write(const std::string& name, const std::string& content, bool binary = false)
    {
        std::ofstream out(root_ / name, binary ? std::ios::binary : std::ios::out);
        out << content;
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write {}", (root_ / name).string()));
        }
        if (std::find(names_.begin(), names_.end(), name) == names_.end()) {
            names_.push_back(name);
        }
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::vector<std::string> names_;
};

template <typename Fn>
std::string capture(Fn&& fn)
{
    std::ostringstream out;
    fn(out);
    return out.str();
}

void game_solve(const ExperimentConfig& config, const RunOptions& options, Outputs& out, std::ostream& log)
{
    const auto& g = config.game;
    const auto result = game::solve_stackelberg(g.cloud, g.nodes, g.solver);
    out.write("equilibrium.txt", game::to_record(result));
    log << fmt::format("price {} cloud utility {} converged {}\n", format_double(result.price),
                       format_double(result.cloud_utility), result.converged);
    if (options.plot_data) {
        std::ostringstream sweep;
        sweep << "price,cloud_utility,equilibrium_converged\n";
        const int points = 200;
        for (int i = 0; i < points; ++i) {
            const double p = g.cloud.price_min + (g.cloud.price_max - g.cloud.price_min) * i / (points - 1);
            const auto u = game::cloud_utility(g.cloud, g.nodes, p, g.solver);
            sweep << format_double(p) << ',' << format_double(u.value) << ',' << (u.equilibrium_converged ? 1 : 0)
                  << '\n';
        }
        out.write("plot_price_sweep.csv", sweep.str());
    }
}

void prerender_sim(const ExperimentConfig& config, const RunOptions& options, Outputs& out, std::ostream& log,
                   const std::map<std::string, std::uint64_t>& seeds)
{
    const auto& p = config.prerender;
    prerender::MobilitySpec mobility;
    mobility.start = p.start;
    std::optional<std::filesystem::path> trace = options.trace;
    if (!trace && p.mobility == "trace") {
        if (p.trace_file.empty()) {
            throw ConfigError("prerender.trace_file", "trace mobility needs a trace file or --trace");
        }
        trace = p.trace_file;
    }
    if (trace) {
        std::ifstream in(*trace);
        if (!in) {
            throw ConfigError("", fmt::format("cannot read trace file {}", trace->string()));
        }
        mobility.kind = prerender::MobilitySpec::Kind::Trace;
        mobility.trace = prerender::read_trace(in);
    }
    const auto result = prerender::simulate_walk(p.grid, p.timing, prerender::WalkSettings{p.compression, p.work_units},
                                                 mobility, p.horizon, seeds.at("walk"));
    out.write("walk.csv", capture([&](std::ostream& s) { prerender::write_walk_csv(s, result); }));
    out.write("walk_summary.json", capture([&](std::ostream& s) { prerender::write_walk_summary(s, result); }));
    log << fmt::format("{} steps, {} deadline misses, compression ratio {}\n", result.steps, result.deadline_misses,
                       format_double(result.bytes_all_i_baseline > 0.0
                                         ? result.bytes_transmitted / result.bytes_all_i_baseline
                                         : 0.0));
    if (options.plot_data) {
        std::ostringstream series;
        series << "step,latency_ms,deadline_ms,transmitted\n";
        for (const auto& r : result.records) {
            series << r.step << ',' << format_double(r.latency_ms) << ',' << format_double(r.deadline_ms) << ','
                   << format_double(r.transmitted) << '\n';
        }
        out.write("plot_latency.csv", series.str());
    }
}

diffusion::TrainResult train_model(const ExperimentConfig& config, const std::map<std::string, std::uint64_t>& seeds)
{
    const auto& d = config.diffusion;
    const auto data = diffusion::planted_dataset(d.planted, d.dataset_size, seeds.at("dataset"));
    diffusion::TrainSettings settings = d.training;
    settings.seed = seeds.at("training");
    return diffusion::train(data, d.planted.layout, d.schedule(), d.denoiser_config(), settings);
}

void diffusion_train(const ExperimentConfig& config, const RunOptions& options, Outputs& out, std::ostream& log,
                     const std::map<std::string, std::uint64_t>& seeds)
{
    const auto result = train_model(config, seeds);
    out.write("model.ckpt",
              capture([&](std::ostream& s) { diffusion::write_checkpoint(s, result.model); }), true);
    out.write("loss_curve.csv", capture([&](std::ostream& s) { diffusion::write_loss_curve(s, result.curve); }));
    nlohmann::ordered_json j;
    j["epochs_run"] = static_cast<int>(result.curve.size()) - 1;
    j["best_epoch"] = result.best_epoch;
    j["early_stopped"] = result.early_stopped;
    j["initial_train_loss"] = result.initial_train_loss();
    j["final_train_loss"] = result.final_train_loss();
    j["loss_drop"] = 1.0 - result.final_train_loss() / result.initial_train_loss();
    j["parameters"] = result.model.denoiser.params().scalar_count();
    j["step_bucket_losses"] = result.bucket_losses;
    out.write("train_summary.json", j.dump(2) + "\n");
    log << fmt::format("trained {} epochs, train loss {} -> {}\n", result.curve.size() - 1,
                       format_double(result.initial_train_loss()), format_double(result.final_train_loss()));
    if (options.plot_data) {
        std::ostringstream buckets;
        buckets << "bucket,first_step,last_step,loss\n";
        const int steps = config.diffusion.steps;
        const int count = static_cast<int>(result.bucket_losses.size());
        for (int b = 0; b < count; ++b) {
            buckets << b << ',' << (b * steps) / count + 1 << ',' << ((b + 1) * steps) / count << ','
                    << format_double(result.bucket_losses[static_cast<std::size_t>(b)]) << '\n';
        }
        out.write("plot_step_buckets.csv", buckets.str());
    }
}

diffusion::PreferenceModel require_model(const RunOptions& options, const char* command)
{
    if (!options.model) {
        throw ConfigError("", fmt::format("--model <checkpoint> is required by {}", command));
    }
    try {
        return diffusion::load_checkpoint(*options.model);
    } catch (const std::runtime_error& e) {
        throw ConfigError("", e.what());
    }
}

void check_model_layout(const diffusion::PreferenceModel& model, const ExperimentConfig& config)
{
    const auto& layout = config.diffusion.planted.layout;
    if (model.layout.interaction != layout.interaction || model.layout.latency != layout.latency ||
        model.layout.fluency != layout.fluency) {
        throw ConfigError("diffusion.layout", "checkpoint column layout differs from the config");
    }
}

void diffusion_infer(const ExperimentConfig& config, const RunOptions& options, Outputs& out, std::ostream& log,
                     const std::map<std::string, std::uint64_t>& seeds)
{
    const auto model = require_model(options, "diffusion-infer");
    check_model_layout(model, config);
    const auto& d = config.diffusion;
    const auto users = diffusion::planted_users(d.planted, d.eval_users, seeds.at("evaluation"));
    Rng item_rng = Rng::derive(seeds.at("evaluation"), 1);
    const int masked_count = static_cast<int>(std::lround(0.2 * d.eval_items));

    std::ostringstream recon_csv;
    recon_csv << "user,row";
    for (int c = 0; c < model.layout.total(); ++c) recon_csv << ",c" << c;
    recon_csv << '\n';
    std::ostringstream prob_csv;
    prob_csv << "user,item,probability,interest\n";
    nlohmann::ordered_json per_user = nlohmann::ordered_json::array();
    int ranked = 0;
    double mse = 0.0;
    int calls = 0;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto& sample = users[u].sample;
        const auto items = diffusion::sample_items(users[u].latent, d.eval_items, d.eval_interest_fraction, item_rng);
        std::vector<bool> masked(static_cast<std::size_t>(d.eval_items), false);
        for (int m = 0; m < masked_count;) {
            const auto j = item_rng.index(static_cast<std::uint64_t>(d.eval_items));
            if (!masked[j]) {
                masked[j] = true;
                ++m;
            }
        }
        const auto rec = diffusion::reconstruct(model, sample.sequence, sample.condition, d.stride, d.start_step,
                                                Rng::derive(seeds.at("evaluation"), 100 + u).next_u64());
        calls = rec.denoiser_calls;
        mse += (rec.sequence - sample.sequence).squaredNorm() / static_cast<double>(sample.sequence.size());
        for (Eigen::Index r = 0; r < rec.sequence.rows(); ++r) {
            recon_csv << u << ',' << r;
            for (Eigen::Index c = 0; c < rec.sequence.cols(); ++c) recon_csv << ',' << format_double(rec.sequence(r, c));
            recon_csv << '\n';
        }
        const auto probs = diffusion::interaction_probabilities(rec.sequence, model.layout, items.features, masked);
        double in_sum = 0.0;
        double out_sum = 0.0;
        int in_count = 0;
        int out_count = 0;
        for (const auto& p : probs) {
            const bool interest = items.interest[static_cast<std::size_t>(p.item)];
            prob_csv << u << ',' << p.item << ',' << format_double(p.probability) << ',' << (interest ? 1 : 0) << '\n';
            (interest ? in_sum : out_sum) += p.probability;
            ++(interest ? in_count : out_count);
        }
        const double in_mean = in_count > 0 ? in_sum / in_count : 0.0;
        const double out_mean = out_count > 0 ? out_sum / out_count : 0.0;
        ranked += in_mean > out_mean ? 1 : 0;
        per_user.push_back({{"user", u}, {"interest_mean", in_mean}, {"other_mean", out_mean}});
    }
    out.write("reconstructions.csv", recon_csv.str());
    out.write("item_probabilities.csv", prob_csv.str());
    nlohmann::ordered_json j;
    j["users"] = d.eval_users;
    j["stride"] = d.stride;
    j["start_step"] = d.start_step == 0 ? d.steps : d.start_step;
    j["denoiser_calls_per_user"] = calls;
    j["reconstruction_mse"] = mse / static_cast<double>(users.size());
    j["users_ranked_correctly"] = ranked;
    j["per_user"] = per_user;
    out.write("infer_summary.json", j.dump(2) + "\n");
    log << fmt::format("{} of {} users rank interest items above the rest ({} denoiser calls each)\n", ranked,
                       d.eval_users, calls);
}

void bench_run(const ExperimentConfig& config, const RunOptions& options, Outputs& out, std::ostream& log,
               const std::map<std::string, std::uint64_t>& seeds)
{
    std::vector<bench::PolicyKind> kinds;
    for (const auto& name : options.policies ? *options.policies : config.bench.policies) {
        try {
            kinds.push_back(bench::parse_policy(name));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("--policies", e.what());
        }
    }
    if (kinds.empty()) {
        throw ConfigError("--policies", "at least one policy is required");
    }
    const auto has = [&](bench::PolicyKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };

    std::optional<diffusion::PreferenceModel> model;
    if (has(bench::PolicyKind::Proposed)) {
        if (options.model) {
            model = require_model(options, "bench-run");
            check_model_layout(*model, config);
        } else {
            model = train_model(config, seeds).model;
        }
    }
    const auto workload_cfg = config.workload_config();
    const auto policy = config.policy_settings();
    const auto workload = bench::generate_workload(workload_cfg, seeds.at("workload"));
    bench::ObservationModel observations;
    if (has(bench::PolicyKind::Mdp) || has(bench::PolicyKind::RandomOpt)) {
        observations = bench::calibrate(workload_cfg, policy, seeds.at("calibration"));
    }
    std::vector<bench::PolicyReport> reports;
    for (auto kind : kinds) {
        reports.push_back(
            bench::run_policy(workload, kind, policy, observations, model ? &*model : nullptr, seeds.at("policy")));
    }
    bench::Comparison comparison;
    if (reports.size() >= 2) {
        comparison = bench::compare(reports);
    } else {
        comparison.rows.push_back(bench::summarize(reports.front()));
    }
    out.write("bench_scenes.csv", capture([&](std::ostream& s) { bench::write_scene_csv(s, reports); }));
    out.write("bench_summary.csv", capture([&](std::ostream& s) { bench::write_summary_csv(s, comparison); }));
    out.write("bench_summary.json", capture([&](std::ostream& s) {
                  bench::write_summary_json(s, comparison, workload.digest(), config.seed);
              }));
    for (const auto& row : comparison.rows) {
        log << fmt::format("{:<11} time {:>8.3f} s  accuracy {:.3f}  recall {:.3f}  f1 {:.3f}\n", row.policy,
                           row.mean_render_time_s, row.accuracy, row.recall, row.f1);
    }
    if (options.plot_data) {
        for (const auto& report : reports) {
            out.write(fmt::format("plot_times_{}.csv", bench::to_string(report.policy)),
                      capture([&](std::ostream& s) { bench::write_time_series(s, report); }));
        }
        out.write("plot_metrics.csv", capture([&](std::ostream& s) { bench::write_summary_csv(s, comparison); }));
    }
}

}  // namespace

int run_subcommand(std::string_view command, const ExperimentConfig& config, const RunOptions& options,
                   std::ostream& log, std::ostream& err)
{
    const std::string name(command);
    try {
        if (std::find(subcommands().begin(), subcommands().end(), name) == subcommands().end()) {
            throw ConfigError("", fmt::format("unknown subcommand '{}'", name));
        }
        validate_config(config);
        RunManifest manifest;
        manifest.command = name;
        manifest.version = std::string(version());
        manifest.config_digest = config_digest(config);
        manifest.seeds = named_seeds(config.seed);
        manifest.started_at = utc_now();

        Outputs out(options.out_dir ? *options.out_dir : std::filesystem::path(config.output_dir));
        out.write("config.resolved.yaml", serialize_config(config));
        if (name == "game-solve") {
            game_solve(config, options, out, log);
        } else if (name == "prerender-sim") {
            prerender_sim(config, options, out, log, manifest.seeds);
        } else if (name == "diffusion-train") {
            diffusion_train(config, options, out, log, manifest.seeds);
        } else if (name == "diffusion-infer") {
            diffusion_infer(config, options, out, log, manifest.seeds);
        } else {
            bench_run(config, options, out, log, manifest.seeds);
        }
        manifest.finished_at = utc_now();
        manifest.outputs = out.names();
        manifest.outputs.push_back("manifest.json");
        std::ofstream manifest_file(out.root() / "manifest.json");
        write_manifest(manifest_file, manifest);
        log << fmt::format("wrote {} files to {}\n", manifest.outputs.size(), out.root().string());
        return kExitOk;
    } catch (const NumericalError& e) {
        err << name << ": numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << name << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::out_of_range& e) {
        err << name << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        err << name << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace mvr::cli
