#include "mvr/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "mvr/common/digest.hpp"
#include "mvr/common/errors.hpp"
#include "mvr/common/format.hpp"

namespace mvr::cli {

namespace {

std::string join_path(const std::string& parent, std::string_view key)
{
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

template <typename T>
constexpr std::string_view type_name()
{
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_same_v<T, std::uint64_t>) return "a non-negative integer";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else return "a number";
}

// A YAML mapping with a closed key set.
class Section {
public:
    Section(YAML::Node node, std::string path, std::vector<std::string> keys)
        : node_(std::move(node)), path_(std::move(path)), keys_(std::move(keys))
    {
        if (!node_ || node_.IsNull()) {
            return;
        }
        if (!node_.IsMap()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
        }
        for (const auto& entry : node_) {
            const auto key = entry.first.as<std::string>();
            if (std::find(keys_.begin(), keys_.end(), key) == keys_.end()) {
                std::string message = fmt::format("unknown key '{}'", key);
                if (const auto hint = nearest_key(key, keys_)) {
                    message += fmt::format("; did you mean '{}'?", *hint);
                }
                throw ConfigError(join_path(path_, key), message);
            }
        }
    }

    YAML::Node get(std::string_view key) const
    {
        if (!node_ || !node_.IsMap()) {
            return YAML::Node();
        }
        return node_[std::string(key)];
    }

    std::string path(std::string_view key) const { return join_path(path_, key); }

    template <typename T>
    void read(std::string_view key, T& out) const
    {
        const YAML::Node value = get(key);
        if (!value || value.IsNull()) {
            return;
        }
        if (!value.IsScalar()) {
            throw ConfigError(path(key), fmt::format("expected {}", type_name<T>()));
        }
        if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!value.Scalar().empty() && value.Scalar().front() == '-') {
                throw ConfigError(path(key), fmt::format("expected {}", type_name<T>()));
            }
        }
        try {
            out = value.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path(key), fmt::format("expected {}, got '{}'", type_name<T>(), value.Scalar()));
        }
    }

    Section child(std::string_view key, std::vector<std::string> keys) const
    {
        return Section(get(key), path(key), std::move(keys));
    }

private:
    YAML::Node node_;
    std::string path_;
    std::vector<std::string> keys_;
};

game::EdgeNodeParams default_node(std::string id, double alpha, double beta)
{
    game::EdgeNodeParams node;
    node.id = std::move(id);
    node.alpha = alpha;
    node.beta = beta;
    node.demand_max = 10.0;
    return node;
}

void read_game(const Section& root, GameSection& game)
{
    const Section section = root.child("game", {"cloud", "nodes", "solver"});
    const Section cloud = section.child("cloud", {"unit_cost", "price_min", "price_max", "capacity"});
    cloud.read("unit_cost", game.cloud.unit_cost);
    cloud.read("price_min", game.cloud.price_min);
    cloud.read("price_max", game.cloud.price_max);
    cloud.read("capacity", game.cloud.capacity);

    const YAML::Node nodes = section.get("nodes");
    if (nodes && !nodes.IsNull()) {
        if (!nodes.IsSequence()) {
            throw ConfigError(section.path("nodes"), "expected a list of edge nodes");
        }
        game.nodes.clear();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const Section entry(nodes[i], fmt::format("{}[{}]", section.path("nodes"), i),
                                {"id", "alpha", "beta", "demand_max"});
            game::EdgeNodeParams node = default_node(fmt::format("edge-{}", i), 1.0, 0.0);
            entry.read("id", node.id);
            entry.read("alpha", node.alpha);
            entry.read("beta", node.beta);
            entry.read("demand_max", node.demand_max);
            game.nodes.push_back(std::move(node));
        }
    }

    const Section solver = section.child(
        "solver",
        {"br_tolerance", "br_max_iters", "price_step", "fd_epsilon", "price_max_iters", "price_seed_points"});
    solver.read("br_tolerance", game.solver.br_tolerance);
    solver.read("br_max_iters", game.solver.br_max_iters);
    solver.read("price_step", game.solver.price_step);
    solver.read("fd_epsilon", game.solver.fd_epsilon);
    solver.read("price_max_iters", game.solver.price_max_iters);
    solver.read("price_seed_points", game.solver.price_seed_points);
}

void read_prerender(const Section& root, PrerenderSection& pre)
{
    const Section section = root.child(
        "prerender", {"grid", "timing", "compression", "work_units", "horizon", "mobility", "start", "trace_file"});
    const Section grid = section.child("grid", {"width", "height", "spacing", "region_side", "eight_neighborhood"});
    grid.read("width", pre.grid.width);
    grid.read("height", pre.grid.height);
    grid.read("spacing", pre.grid.spacing);
    grid.read("region_side", pre.grid.region_side);
    grid.read("eight_neighborhood", pre.grid.eight_neighborhood);
    const Section timing = section.child("timing", {"request_ms", "render_throughput", "bandwidth", "avatar_speed"});
    timing.read("request_ms", pre.timing.request_ms);
    timing.read("render_throughput", pre.timing.render_throughput);
    timing.read("bandwidth", pre.timing.bandwidth);
    timing.read("avatar_speed", pre.timing.avatar_speed);
    const Section compression = section.child("compression", {"base_i_size", "ratio_floor", "decay"});
    compression.read("base_i_size", pre.compression.base_i_size);
    compression.read("ratio_floor", pre.compression.ratio_floor);
    compression.read("decay", pre.compression.decay);
    section.read("work_units", pre.work_units);
    section.read("horizon", pre.horizon);
    section.read("mobility", pre.mobility);
    section.read("trace_file", pre.trace_file);
    const YAML::Node start = section.get("start");
    if (start && !start.IsNull()) {
        if (!start.IsSequence() || start.size() != 2) {
            throw ConfigError(section.path("start"), "expected [x, y]");
        }
        try {
            pre.start = prerender::GridPoint{start[0].as<int>(), start[1].as<int>()};
        } catch (const YAML::Exception&) {
            throw ConfigError(section.path("start"), "expected two integers");
        }
    }
}

void read_diffusion(const Section& root, DiffusionSection& d)
{
    const Section section = root.child(
        "diffusion", {"steps", "beta_start", "beta_end", "d_model", "heads", "levels", "layout", "learning_rate",
                      "batch_size", "epochs", "patience", "validation_fraction", "loss_buckets", "dataset_size",
                      "planted", "stride", "start_step", "eval_users", "eval_items", "eval_interest_fraction"});
    section.read("steps", d.steps);
    section.read("beta_start", d.beta_start);
    section.read("beta_end", d.beta_end);
    section.read("d_model", d.model.d_model);
    section.read("heads", d.model.heads);
    section.read("levels", d.model.levels);
    const Section layout = section.child("layout", {"interaction", "latency", "fluency"});
    layout.read("interaction", d.planted.layout.interaction);
    layout.read("latency", d.planted.layout.latency);
    layout.read("fluency", d.planted.layout.fluency);
    section.read("learning_rate", d.training.learning_rate);
    section.read("batch_size", d.training.batch_size);
    section.read("epochs", d.training.epochs);
    section.read("patience", d.training.patience);
    section.read("validation_fraction", d.training.validation_fraction);
    section.read("loss_buckets", d.training.loss_buckets);
    section.read("dataset_size", d.dataset_size);
    const Section planted = section.child(
        "planted", {"length", "interaction_noise", "signal_noise", "resource_drift", "mixing_seed"});
    planted.read("length", d.planted.length);
    planted.read("interaction_noise", d.planted.interaction_noise);
    planted.read("signal_noise", d.planted.signal_noise);
    planted.read("resource_drift", d.planted.resource_drift);
    planted.read("mixing_seed", d.planted.mixing_seed);
    section.read("stride", d.stride);
    section.read("start_step", d.start_step);
    section.read("eval_users", d.eval_users);
    section.read("eval_items", d.eval_items);
    section.read("eval_interest_fraction", d.eval_interest_fraction);
}

void read_bench(const Section& root, BenchSection& b)
{
    const Section section = root.child("bench", {"workload", "policy", "policies"});
    const Section w = section.child("workload", {"scenes", "frames_per_scene", "fps", "regions", "interest_fraction",
                                                 "work_min", "work_max", "observation_signal",
                                                 "observation_persistence"});
    w.read("scenes", b.workload.scenes);
    w.read("frames_per_scene", b.workload.frames_per_scene);
    w.read("fps", b.workload.fps);
    w.read("regions", b.workload.regions);
    w.read("interest_fraction", b.workload.interest_fraction);
    w.read("work_min", b.workload.work_min);
    w.read("work_max", b.workload.work_max);
    w.read("observation_signal", b.workload.observation_signal);
    w.read("observation_persistence", b.workload.observation_persistence);
    const Section p = section.child(
        "policy", {"lod_high", "lod_low", "throughput", "render_cost", "switch_cost", "discount", "observation_bins",
                   "calibration_scenes", "ro_samples", "focus_quantile", "inference_ms_per_call"});
    p.read("lod_high", b.policy.lod_high);
    p.read("lod_low", b.policy.lod_low);
    p.read("throughput", b.policy.throughput);
    p.read("render_cost", b.policy.render_cost);
    p.read("switch_cost", b.policy.switch_cost);
    p.read("discount", b.policy.discount);
    p.read("observation_bins", b.policy.observation_bins);
    p.read("calibration_scenes", b.policy.calibration_scenes);
    p.read("ro_samples", b.policy.ro_samples);
    p.read("focus_quantile", b.policy.focus_quantile);
    p.read("inference_ms_per_call", b.policy.inference_ms_per_call);
    const YAML::Node policies = section.get("policies");
    if (policies && !policies.IsNull()) {
        if (!policies.IsSequence()) {
            throw ConfigError(section.path("policies"), "expected a list of policy names");
        }
        b.policies.clear();
        for (const auto& item : policies) {
            if (!item.IsScalar()) {
                throw ConfigError(section.path("policies"), "expected a list of policy names");
            }
            b.policies.push_back(item.Scalar());
        }
    }
}

void require(bool ok, const std::string& path, const std::string& message)
{
    if (!ok) {
        throw ConfigError(path, message);
    }
}

template <typename Fn>
void module_check(const std::string& path, Fn&& fn)
{
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace

diffusion::DenoiserConfig DiffusionSection::denoiser_config() const
{
    diffusion::DenoiserConfig cfg = model;
    cfg.features = planted.layout.total();
    cfg.cond_dim = 4;
    return cfg;
}

ExperimentConfig::ExperimentConfig()
{
    game.nodes = {default_node("edge-0", 2.0, 0.5), default_node("edge-1", 3.0, 0.8)};
    prerender.grid.width = 20;
    prerender.grid.height = 20;
}

bench::WorkloadConfig ExperimentConfig::workload_config() const
{
    bench::WorkloadConfig w = bench.workload;
    w.planted = diffusion.planted;
    return w;
}

bench::PolicySettings ExperimentConfig::policy_settings() const
{
    bench::PolicySettings p = bench.policy;
    p.stride = diffusion.stride;
    p.start_step = diffusion.start_step;
    return p;
}

void validate_config(const ExperimentConfig& c)
{
    require(!c.output_dir.empty(), "output_dir", "must not be empty");

    const auto& g = c.game;
    require(g.cloud.unit_cost > 0.0, "game.cloud.unit_cost", "must be > 0");
    require(g.cloud.price_min >= g.cloud.unit_cost, "game.cloud.price_min", "must be >= game.cloud.unit_cost");
    require(g.cloud.price_max > g.cloud.price_min, "game.cloud.price_max", "must be > game.cloud.price_min");
    require(g.cloud.capacity > 0.0, "game.cloud.capacity", "must be > 0");
    require(!g.nodes.empty(), "game.nodes", "at least one edge node is required");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto base = fmt::format("game.nodes[{}]", i);
        require(!g.nodes[i].id.empty(), base + ".id", "must not be empty");
        require(ids.insert(g.nodes[i].id).second, base + ".id", fmt::format("duplicate id '{}'", g.nodes[i].id));
        require(g.nodes[i].alpha > 0.0, base + ".alpha", "must be > 0");
        require(g.nodes[i].beta >= 0.0, base + ".beta", "must be >= 0");
        require(g.nodes[i].demand_max > 0.0, base + ".demand_max", "must be > 0");
    }
    require(g.solver.br_tolerance > 0.0, "game.solver.br_tolerance", "must be > 0");
    require(g.solver.br_max_iters > 0, "game.solver.br_max_iters", "must be > 0");
    require(g.solver.price_step > 0.0, "game.solver.price_step", "must be > 0");
    require(g.solver.fd_epsilon > 0.0, "game.solver.fd_epsilon", "must be > 0");
    require(g.solver.price_max_iters > 0, "game.solver.price_max_iters", "must be > 0");
    require(g.solver.price_seed_points >= 1, "game.solver.price_seed_points", "must be >= 1");

    const auto& p = c.prerender;
    require(p.grid.width >= 1, "prerender.grid.width", "must be >= 1");
    require(p.grid.height >= 1, "prerender.grid.height", "must be >= 1");
    require(p.grid.spacing > 0.0, "prerender.grid.spacing", "must be > 0");
    require(p.grid.region_side >= 1 && p.grid.region_side % 2 == 1, "prerender.grid.region_side",
            "must be odd and >= 1");
    require(p.timing.request_ms >= 0.0, "prerender.timing.request_ms", "must be >= 0");
    require(p.timing.render_throughput > 0.0, "prerender.timing.render_throughput", "must be > 0");
    require(p.timing.bandwidth > 0.0, "prerender.timing.bandwidth", "must be > 0");
    require(p.timing.avatar_speed > 0.0, "prerender.timing.avatar_speed", "must be > 0");
    require(p.compression.base_i_size > 0.0, "prerender.compression.base_i_size", "must be > 0");
    require(p.compression.ratio_floor > 0.0 && p.compression.ratio_floor <= 1.0, "prerender.compression.ratio_floor",
            "must be in (0, 1]");
    require(p.compression.decay > 0.0, "prerender.compression.decay", "must be > 0");
    require(p.work_units >= 0.0, "prerender.work_units", "must be >= 0");
    require(p.horizon >= 1, "prerender.horizon", "must be >= 1");
    require(p.mobility == "random_walk" || p.mobility == "trace", "prerender.mobility",
            fmt::format("must be random_walk or trace, got '{}'", p.mobility));
    if (p.start) {
        require(p.start->x >= 0 && p.start->x < p.grid.width && p.start->y >= 0 && p.start->y < p.grid.height,
                "prerender.start", "must lie on the grid");
    }
    module_check("prerender.grid", [&] { p.grid.validate(); });
    module_check("prerender.timing", [&] { p.timing.validate(); });
    module_check("prerender.compression", [&] { p.compression.validate(); });

    const auto& d = c.diffusion;
    require(d.steps >= 1, "diffusion.steps", "must be >= 1");
    require(d.beta_start > 0.0 && d.beta_start < 1.0, "diffusion.beta_start", "must be in (0, 1)");
    require(d.beta_end > 0.0 && d.beta_end < 1.0, "diffusion.beta_end", "must be in (0, 1)");
    require(d.steps == 1 || d.beta_end > d.beta_start, "diffusion.beta_end", "must be > diffusion.beta_start");
    require(d.model.d_model >= 2 && d.model.d_model % 2 == 0, "diffusion.d_model", "must be even and >= 2");
    require(d.model.heads >= 1 && d.model.d_model % d.model.heads == 0, "diffusion.heads",
            "must be >= 1 and divide diffusion.d_model");
    require(d.model.levels >= 0, "diffusion.levels", "must be >= 0");
    require(d.planted.layout.interaction >= 1, "diffusion.layout.interaction", "must be >= 1");
    require(d.planted.layout.latency >= 0, "diffusion.layout.latency", "must be >= 0");
    require(d.planted.layout.fluency >= 0, "diffusion.layout.fluency", "must be >= 0");
    require(d.training.learning_rate > 0.0, "diffusion.learning_rate", "must be > 0");
    require(d.training.batch_size >= 1, "diffusion.batch_size", "must be >= 1");
    require(d.training.epochs >= 1, "diffusion.epochs", "must be >= 1");
    require(d.training.patience >= 1, "diffusion.patience", "must be >= 1");
    require(d.training.validation_fraction >= 0.0 && d.training.validation_fraction < 1.0,
            "diffusion.validation_fraction", "must be in [0, 1)");
    require(d.training.loss_buckets >= 1, "diffusion.loss_buckets", "must be >= 1");
    require(d.dataset_size >= 1, "diffusion.dataset_size", "must be >= 1");
    require(d.planted.length >= 1 && d.planted.length % (1 << d.model.levels) == 0, "diffusion.planted.length",
            fmt::format("must be a positive multiple of 2^levels = {}", 1 << d.model.levels));
    require(d.planted.interaction_noise >= 0.0, "diffusion.planted.interaction_noise", "must be >= 0");
    require(d.planted.signal_noise >= 0.0, "diffusion.planted.signal_noise", "must be >= 0");
    require(d.planted.resource_drift >= 0.0, "diffusion.planted.resource_drift", "must be >= 0");
    require(d.stride >= 1, "diffusion.stride", "must be >= 1");
    require(d.start_step >= 0 && d.start_step <= d.steps, "diffusion.start_step",
            "must be in [0, diffusion.steps] (0 means the full schedule)");
    const int start = d.start_step == 0 ? d.steps : d.start_step;
    require(start % d.stride == 0, "diffusion.stride", fmt::format("must divide the start step {}", start));
    require(d.eval_users >= 1, "diffusion.eval_users", "must be >= 1");
    require(d.eval_items >= 2, "diffusion.eval_items", "must be >= 2");
    require(d.eval_interest_fraction > 0.0 && d.eval_interest_fraction < 1.0, "diffusion.eval_interest_fraction",
            "must be in (0, 1)");
    module_check("diffusion", [&] {
        d.schedule();
        d.denoiser_config().validate();
    });

    const auto& w = c.bench.workload;
    require(w.scenes >= 1, "bench.workload.scenes", "must be >= 1");
    require(w.frames_per_scene >= 1, "bench.workload.frames_per_scene", "must be >= 1");
    require(w.fps >= 1, "bench.workload.fps", "must be >= 1");
    require(w.regions >= 2, "bench.workload.regions", "must be >= 2");
    require(w.interest_fraction > 0.0 && w.interest_fraction < 1.0, "bench.workload.interest_fraction",
            "must be in (0, 1)");
    require(w.work_min > 0.0, "bench.workload.work_min", "must be > 0");
    require(w.work_max >= w.work_min, "bench.workload.work_max", "must be >= bench.workload.work_min");
    require(w.observation_signal >= 0.0, "bench.workload.observation_signal", "must be >= 0");
    require(w.observation_persistence >= 0.0 && w.observation_persistence < 1.0,
            "bench.workload.observation_persistence", "must be in [0, 1)");
    const auto& pol = c.bench.policy;
    require(pol.lod_high > 0.0, "bench.policy.lod_high", "must be > 0");
    require(pol.lod_low > 0.0 && pol.lod_low < pol.lod_high, "bench.policy.lod_low",
            "must be in (0, bench.policy.lod_high)");
    require(pol.throughput > 0.0, "bench.policy.throughput", "must be > 0");
    require(pol.render_cost >= 0.0, "bench.policy.render_cost", "must be >= 0");
    require(pol.switch_cost >= 0.0, "bench.policy.switch_cost", "must be >= 0");
    require(pol.discount > 0.0 && pol.discount < 1.0, "bench.policy.discount", "must be in (0, 1)");
    require(pol.observation_bins >= 2, "bench.policy.observation_bins", "must be >= 2");
    require(pol.calibration_scenes >= 1, "bench.policy.calibration_scenes", "must be >= 1");
    require(pol.ro_samples >= 1, "bench.policy.ro_samples", "must be >= 1");
    require(pol.focus_quantile > 0.0 && pol.focus_quantile < 1.0, "bench.policy.focus_quantile", "must be in (0, 1)");
    require(pol.inference_ms_per_call >= 0.0, "bench.policy.inference_ms_per_call", "must be >= 0");
    require(!c.bench.policies.empty(), "bench.policies", "at least one policy is required");
    std::set<std::string> seen;
    for (const auto& name : c.bench.policies) {
        module_check("bench.policies", [&] { bench::parse_policy(name); });
        require(seen.insert(name).second, "bench.policies", fmt::format("duplicate policy '{}'", name));
    }
    module_check("bench.workload", [&] { c.workload_config().validate(); });
    module_check("bench.policy", [&] { c.policy_settings().validate(); });
}

ExperimentConfig parse_config(std::string_view text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", fmt::format("config parse error at line {}, column {}: {}", e.mark.line + 1,
                                          e.mark.column + 1, e.msg));
    }
    ExperimentConfig config;
    const Section top(root, "", {"seed", "output_dir", "game", "prerender", "diffusion", "bench"});
    top.read("seed", config.seed);
    top.read("output_dir", config.output_dir);
    read_game(top, config.game);
    read_prerender(top, config.prerender);
    read_diffusion(top, config.diffusion);
    read_bench(top, config.bench);
    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", fmt::format("cannot read config file {}", path.string()));
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

namespace {

struct Emit {
    YAML::Emitter& e;

    void num(const char* key, double v) { e << YAML::Key << key << YAML::Value << format_double(v); }
    void num(const char* key, int v) { e << YAML::Key << key << YAML::Value << v; }
    void num(const char* key, std::uint64_t v) { e << YAML::Key << key << YAML::Value << v; }
    void flag(const char* key, bool v) { e << YAML::Key << key << YAML::Value << v; }
    void str(const char* key, const std::string& v)
    {
        e << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << v;
    }
    void open(const char* key) { e << YAML::Key << key << YAML::Value << YAML::BeginMap; }
    void close() { e << YAML::EndMap; }
};

}  // namespace

std::string serialize_config(const ExperimentConfig& c)
{
    YAML::Emitter e;
    Emit w{e};
    e << YAML::BeginMap;
    w.num("seed", c.seed);
    w.str("output_dir", c.output_dir);

    w.open("game");
    w.open("cloud");
    w.num("unit_cost", c.game.cloud.unit_cost);
    w.num("price_min", c.game.cloud.price_min);
    w.num("price_max", c.game.cloud.price_max);
    w.num("capacity", c.game.cloud.capacity);
    w.close();
    e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
    for (const auto& node : c.game.nodes) {
        e << YAML::BeginMap;
        w.str("id", node.id);
        w.num("alpha", node.alpha);
        w.num("beta", node.beta);
        w.num("demand_max", node.demand_max);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    w.open("solver");
    w.num("br_tolerance", c.game.solver.br_tolerance);
    w.num("br_max_iters", c.game.solver.br_max_iters);
    w.num("price_step", c.game.solver.price_step);
    w.num("fd_epsilon", c.game.solver.fd_epsilon);
    w.num("price_max_iters", c.game.solver.price_max_iters);
    w.num("price_seed_points", c.game.solver.price_seed_points);
    w.close();
    w.close();

    const auto& p = c.prerender;
    w.open("prerender");
    w.open("grid");
    w.num("width", p.grid.width);
    w.num("height", p.grid.height);
    w.num("spacing", p.grid.spacing);
    w.num("region_side", p.grid.region_side);
    w.flag("eight_neighborhood", p.grid.eight_neighborhood);
    w.close();
    w.open("timing");
    w.num("request_ms", p.timing.request_ms);
    w.num("render_throughput", p.timing.render_throughput);
    w.num("bandwidth", p.timing.bandwidth);
    w.num("avatar_speed", p.timing.avatar_speed);
    w.close();
    w.open("compression");
    w.num("base_i_size", p.compression.base_i_size);
    w.num("ratio_floor", p.compression.ratio_floor);
    w.num("decay", p.compression.decay);
    w.close();
    w.num("work_units", p.work_units);
    w.num("horizon", p.horizon);
    w.str("mobility", p.mobility);
    e << YAML::Key << "start" << YAML::Value;
    if (p.start) {
        e << YAML::Flow << YAML::BeginSeq << p.start->x << p.start->y << YAML::EndSeq;
    } else {
        e << YAML::Null;
    }
    w.str("trace_file", p.trace_file);
    w.close();

    const auto& d = c.diffusion;
    w.open("diffusion");
    w.num("steps", d.steps);
    w.num("beta_start", d.beta_start);
    w.num("beta_end", d.beta_end);
    w.num("d_model", d.model.d_model);
    w.num("heads", d.model.heads);
    w.num("levels", d.model.levels);
    w.open("layout");
    w.num("interaction", d.planted.layout.interaction);
    w.num("latency", d.planted.layout.latency);
    w.num("fluency", d.planted.layout.fluency);
    w.close();
    w.num("learning_rate", d.training.learning_rate);
    w.num("batch_size", d.training.batch_size);
    w.num("epochs", d.training.epochs);
    w.num("patience", d.training.patience);
    w.num("validation_fraction", d.training.validation_fraction);
    w.num("loss_buckets", d.training.loss_buckets);
    w.num("dataset_size", d.dataset_size);
    w.open("planted");
    w.num("length", d.planted.length);
    w.num("interaction_noise", d.planted.interaction_noise);
    w.num("signal_noise", d.planted.signal_noise);
    w.num("resource_drift", d.planted.resource_drift);
    w.num("mixing_seed", d.planted.mixing_seed);
    w.close();
    w.num("stride", d.stride);
    w.num("start_step", d.start_step);
    w.num("eval_users", d.eval_users);
    w.num("eval_items", d.eval_items);
    w.num("eval_interest_fraction", d.eval_interest_fraction);
    w.close();

    const auto& b = c.bench;
    w.open("bench");
    w.open("workload");
    w.num("scenes", b.workload.scenes);
    w.num("frames_per_scene", b.workload.frames_per_scene);
    w.num("fps", b.workload.fps);
    w.num("regions", b.workload.regions);
    w.num("interest_fraction", b.workload.interest_fraction);
    w.num("work_min", b.workload.work_min);
    w.num("work_max", b.workload.work_max);
    w.num("observation_signal", b.workload.observation_signal);
    w.num("observation_persistence", b.workload.observation_persistence);
    w.close();
    w.open("policy");
    w.num("lod_high", b.policy.lod_high);
    w.num("lod_low", b.policy.lod_low);
    w.num("throughput", b.policy.throughput);
    w.num("render_cost", b.policy.render_cost);
    w.num("switch_cost", b.policy.switch_cost);
    w.num("discount", b.policy.discount);
    w.num("observation_bins", b.policy.observation_bins);
    w.num("calibration_scenes", b.policy.calibration_scenes);
    w.num("ro_samples", b.policy.ro_samples);
    w.num("focus_quantile", b.policy.focus_quantile);
    w.num("inference_ms_per_call", b.policy.inference_ms_per_call);
    w.close();
    e << YAML::Key << "policies" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& name : b.policies) {
        e << name;
    }
    e << YAML::EndSeq;
    w.close();

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string config_digest(const ExperimentConfig& config)
{
    Digest d;
    d.add(serialize_config(config));
    return d.hex();
}

std::optional<std::string> nearest_key(std::string_view key, const std::vector<std::string>& candidates)
{
    std::optional<std::string> best;
    std::size_t best_distance = 4;
    for (const auto& candidate : candidates) {
        // Levenshtein distance, single-row DP
        std::vector<std::size_t> row(candidate.size() + 1);
        std::iota(row.begin(), row.end(), std::size_t{0});
        for (std::size_t i = 1; i <= key.size(); ++i) {
            std::size_t diagonal = row[0];
            row[0] = i;
            for (std::size_t j = 1; j <= candidate.size(); ++j) {
                const std::size_t above = row[j];
                row[j] = std::min({row[j] + 1, row[j - 1] + 1, diagonal + (key[i - 1] == candidate[j - 1] ? 0 : 1)});
                diagonal = above;
            }
        }
        if (row.back() < best_distance) {
            best_distance = row.back();
            best = candidate;
        }
    }
    return best;
}

}  // namespace mvr::cli
