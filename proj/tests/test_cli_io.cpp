#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include <json.hpp>

#include "mvr/common/errors.hpp"
#include "support/small_config.hpp"

using namespace mvr;
using namespace mvr::cli;

namespace {

ConfigError config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError("", "");
}

int run(const std::string& command, const ExperimentConfig& config, RunOptions options, std::string* err_text = nullptr)
{
    std::ostringstream log;
    std::ostringstream err;
    const int code = run_subcommand(command, config, options, log, err);
    if (err_text != nullptr) *err_text = err.str();
    return code;
}

RunOptions in(const std::filesystem::path& dir)
{
    RunOptions options;
    options.out_dir = dir;
    return options;
}

}  // namespace

TEST_CASE("empty config yields the documented defaults")
{
    const auto c = parse_config("");
    CHECK(c.prerender.grid.spacing == 0.02);
    CHECK(c.prerender.grid.width == 20);
    CHECK(c.prerender.grid.height == 20);
    CHECK(c.diffusion.steps == 700);
    CHECK(c.diffusion.beta_start == 1e-4);
    CHECK(c.diffusion.beta_end == 0.04);
    CHECK(c.diffusion.training.learning_rate == 1e-4);
    CHECK(c.diffusion.training.batch_size == 32);
    CHECK(c.bench.policy.discount == 0.95);
    CHECK(c.bench.policy.ro_samples == 21);
    CHECK(c.bench.workload.scenes == 20);
    CHECK(c.bench.workload.frames_per_scene == 3600);
    CHECK(c.game.nodes.size() == 2);
    CHECK(c.bench.policies.size() == 4);
    CHECK(c.workload_config().planted.length == c.diffusion.planted.length);
    CHECK(c.policy_settings().stride == c.diffusion.stride);
    CHECK(config_digest(c) == config_digest(ExperimentConfig{}));
}

TEST_CASE("shipped default config equals the built-in defaults")
{
    const auto shipped = load_config(std::filesystem::path(MVR_SOURCE_DIR) / "configs" / "default.yaml");
    CHECK(serialize_config(shipped) == serialize_config(ExperimentConfig{}));
    CHECK(config_digest(shipped) == config_digest(ExperimentConfig{}));
    CHECK_THROWS_AS(load_config(std::filesystem::path(MVR_SOURCE_DIR) / "configs" / "absent.yaml"), ConfigError);
}

TEST_CASE("validation errors cite the key path")
{
    const auto lr = config_error("diffusion:\n  learning_rate: -0.001\n");
    CHECK(lr.key_path() == "diffusion.learning_rate");
    CHECK(std::string(lr.what()).find("diffusion.learning_rate") != std::string::npos);

    const auto typo = config_error("diffusoin:\n  steps: 10\n");
    CHECK(std::string(typo.what()).find("did you mean 'diffusion'") != std::string::npos);

    const auto nested = config_error("bench:\n  workload:\n    scenez: 3\n");
    CHECK(nested.key_path() == "bench.workload.scenez");
    CHECK(std::string(nested.what()).find("'scenes'") != std::string::npos);

    CHECK(config_error("seed: -4\n").key_path() == "seed");
    CHECK(config_error("diffusion:\n  steps: ten\n").key_path() == "diffusion.steps");
    CHECK(config_error("game:\n  nodes:\n    - {alpha: 0}\n").key_path().rfind("game.nodes", 0) == 0);
    CHECK(config_error("prerender:\n  grid:\n    region_side: 4\n").key_path().rfind("prerender.grid", 0) == 0);
    CHECK(std::string(config_error("a: [1, 2\n").what()).find("line") != std::string::npos);

    CHECK(nearest_key("diffusoin", {"game", "prerender", "diffusion", "bench"}) == "diffusion");
    CHECK_FALSE(nearest_key("zzzzzzzzzz", {"game", "bench"}).has_value());
}

TEST_CASE("serialization round-trip is idempotent")
{
    const auto defaults = serialize_config(parse_config(""));
    CHECK(serialize_config(parse_config(defaults)) == defaults);

    const auto custom = small::config();
    const auto text = serialize_config(custom);
    const auto reloaded = parse_config(text);
    CHECK(serialize_config(reloaded) == text);
    CHECK(config_digest(reloaded) == config_digest(custom));
    CHECK(config_digest(custom) != config_digest(parse_config("")));
    CHECK(config_digest(custom).size() == 16);
}

TEST_CASE("named seeds are distinct and reproducible")
{
    const auto a = named_seeds(5);
    CHECK(a == named_seeds(5));
    CHECK(a != named_seeds(6));
    CHECK(a.at("global") == 5);
    std::set<std::uint64_t> values;
    for (const auto& [name, value] : a) values.insert(value);
    CHECK(values.size() == a.size());
}

TEST_CASE("game-solve on the default config converges and lists its outputs")
{
    const auto dir = small::scratch_dir("cli_game");
    REQUIRE(run("game-solve", ExperimentConfig{}, in(dir)) == kExitOk);
    const auto record = small::slurp(dir / "equilibrium.txt");
    CHECK(record.find("converged=true") != std::string::npos);

    const auto manifest = nlohmann::json::parse(small::slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "game-solve");
    CHECK(manifest["config_digest"] == config_digest(ExperimentConfig{}));
    std::set<std::string> listed(manifest["outputs"].begin(), manifest["outputs"].end());
    std::set<std::string> present;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) present.insert(entry.path().filename().string());
    CHECK(listed == present);
}

TEST_CASE("bench-run with a single policy reports exactly that policy")
{
    const auto dir = small::scratch_dir("cli_bench_none");
    auto options = in(dir);
    options.policies = std::vector<std::string>{"none"};
    REQUIRE(run("bench-run", small::config(), options) == kExitOk);
    const auto summary = nlohmann::json::parse(small::slurp(dir / "bench_summary.json"));
    REQUIRE(summary["policies"].size() == 1);
    CHECK(summary["policies"][0]["policy"] == "none");
    CHECK(summary["comparisons"].empty());
}

TEST_CASE("every subcommand reruns byte-identically")
{
    const auto config = small::config();
    const auto model_dir = small::scratch_dir("cli_model");
    REQUIRE(run("diffusion-train", config, in(model_dir)) == kExitOk);
    for (const auto& command : subcommands()) {
        CAPTURE(command);
        std::map<std::string, std::string> first;
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = small::scratch_dir("cli_rerun_" + std::to_string(rep));
            auto options = in(dir);
            options.plot_data = true;
            if (command != "diffusion-train") options.model = model_dir / "model.ckpt";
            REQUIRE(run(command, config, options) == kExitOk);
            auto files = small::snapshot(dir);
            files.erase("manifest.json");  // carries wall-clock timestamps
            if (rep == 0) {
                first = files;
                CHECK(first.size() >= 3);
            } else {
                CHECK(files == first);
            }
        }
    }
}

TEST_CASE("exit codes separate invalid input from numerical failure")
{
    const auto dir = small::scratch_dir("cli_codes");
    std::string err;
    CHECK(run("diffusion-infer", small::config(), in(dir), &err) == kExitValidation);
    CHECK(err.rfind("diffusion-infer: ", 0) == 0);
    CHECK(run("render-everything", small::config(), in(dir), &err) == kExitValidation);

    auto bad_policy = in(dir);
    bad_policy.policies = std::vector<std::string>{"bogus"};
    CHECK(run("bench-run", small::config(), bad_policy, &err) == kExitValidation);

    auto missing_trace = in(dir);
    missing_trace.trace = dir / "absent.trace";
    CHECK(run("prerender-sim", small::config(), missing_trace) == kExitValidation);

    auto diverging = small::config();
    diverging.diffusion.training.learning_rate = 1e9;
    CHECK(run("diffusion-train", diverging, in(dir), &err) == kExitNumerical);
    CHECK(err.find("numerical") != std::string::npos);
}

TEST_CASE("prerender-sim replays a trace file")
{
    const auto dir = small::scratch_dir("cli_trace");
    {
        std::ofstream trace(dir / "walk.trace");
        trace << "# step x y\n0 10 10\n1 11 10\n2 11 11\n3 10 11\n";
    }
    auto options = in(dir / "out");
    options.trace = dir / "walk.trace";
    REQUIRE(run("prerender-sim", small::config(), options) == kExitOk);
    const auto summary = nlohmann::json::parse(small::slurp(dir / "out" / "walk_summary.json"));
    CHECK(summary["steps"] == 3);
}
