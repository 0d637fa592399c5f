#include "mvr/prerender/walk.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "mvr/common/format.hpp"
#include "mvr/common/rng.hpp"

namespace mvr::prerender {

namespace {

bool adjacent(const GridWorld& world, GridPoint a, GridPoint b)
{
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    if (world.eight_neighborhood) {
        return std::max(dx, dy) == 1;
    }
    return dx + dy == 1;
}

}  // namespace

WalkResult simulate_walk(const GridWorld& world, const TimingModel& timing,
                         const WalkSettings& settings, const MobilitySpec& mobility, int horizon,
                         std::uint64_t seed)
{
    if (horizon < 1) {
        throw std::invalid_argument("simulate_walk: horizon must be >= 1");
    }
    world.validate();
    timing.validate();
    settings.compression.validate();

    const RegionMap regions(world);
    // every I-frame is on the device before the walk starts
    const std::set<GridPoint> device_store(regions.centers().begin(), regions.centers().end());

    GridPoint current;
    int steps = horizon;
    if (mobility.kind == MobilitySpec::Kind::Trace) {
        if (mobility.trace.size() < 2) {
            throw std::invalid_argument("simulate_walk: trace needs a start point and at least one step");
        }
        for (std::size_t i = 0; i < mobility.trace.size(); ++i) {
            const GridPoint p = mobility.trace[i];
            if (!world.contains(p)) {
                throw std::invalid_argument(
                    fmt::format("trace step {}: point ({}, {}) outside grid", i, p.x, p.y));
            }
            if (i > 0 && !adjacent(world, mobility.trace[i - 1], p)) {
                throw std::invalid_argument(fmt::format("trace step {}: not adjacent to the previous point", i));
            }
        }
        current = mobility.trace.front();
        steps = std::min(horizon, static_cast<int>(mobility.trace.size()) - 1);
    } else {
        current = mobility.start.value_or(GridPoint{world.width / 2, world.height / 2});
        if (!world.contains(current)) {
            throw std::invalid_argument("simulate_walk: start point outside grid");
        }
    }

    Rng rng(seed);
    WalkResult result;
    result.records.reserve(steps);
    result.per_step_latency.reserve(steps);
    for (int step = 1; step <= steps; ++step) {
        const auto candidates = neighbors(world, current);
        GridPoint next;
        if (mobility.kind == MobilitySpec::Kind::Trace) {
            next = mobility.trace[step];
        } else {
            if (candidates.empty()) {
                throw std::invalid_argument("simulate_walk: a 1x1 grid has nowhere to move");
            }
            next = candidates[rng.index(candidates.size())];
        }

        const PanoramaFrame frame = encode_frame(regions, next, settings.compression);
        if (frame.kind == FrameKind::P && !device_store.contains(*frame.reference)) {
            result.decode_order_valid = false;
        }
        StepRecord record;
        record.step = step;
        record.point = next;
        record.kind = frame.kind;
        record.size = frame.size;
        record.transmitted = frame.kind == FrameKind::P ? frame.size : 0.0;
        record.latency_ms = step_latency(frame, timing, settings.work_units);
        record.deadline_ms = hop_deadline(world, timing, current, next);
        record.missed = record.latency_ms > record.deadline_ms;
        record.prerenders = static_cast<int>(candidates.size());

        result.bytes_transmitted += record.transmitted;
        result.bytes_all_i_baseline += settings.compression.base_i_size;
        result.deadline_misses += record.missed ? 1 : 0;
        result.total_prerenders += record.prerenders;
        result.per_step_latency.push_back(record.latency_ms);
        result.records.push_back(record);
        current = next;
    }
    result.steps = steps;
    return result;
}

std::vector<GridPoint> read_trace(std::istream& in)
{
    std::vector<GridPoint> points;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        long step = 0;
        GridPoint p;
        if (!(fields >> step)) {
            continue;
        }
        if (!(fields >> p.x >> p.y)) {
            throw std::invalid_argument(fmt::format("trace line {}: expected `step x y`", line_number));
        }
        if (step != static_cast<long>(points.size())) {
            throw std::invalid_argument(fmt::format("trace line {}: step index {} out of sequence",
                                                    line_number, step));
        }
        points.push_back(p);
    }
    return points;
}

void write_walk_csv(std::ostream& out, const WalkResult& result)
{
    out << "step,x,y,kind,size,latency_ms,missed\n";
    for (const auto& r : result.records) {
        out << fmt::format("{},{},{},{},{},{},{}\n", r.step, r.point.x, r.point.y, to_string(r.kind),
                           format_double(r.size), format_double(r.latency_ms), r.missed ? 1 : 0);
    }
}

void write_walk_summary(std::ostream& out, const WalkResult& result)
{
    nlohmann::ordered_json j;
    j["steps"] = result.steps;
    j["deadline_misses"] = result.deadline_misses;
    j["bytes_transmitted"] = result.bytes_transmitted;
    j["bytes_all_i_baseline"] = result.bytes_all_i_baseline;
    j["compression_ratio"] =
        result.bytes_all_i_baseline > 0.0 ? result.bytes_transmitted / result.bytes_all_i_baseline : 0.0;
    j["total_prerenders"] = result.total_prerenders;
    j["decode_order_valid"] = result.decode_order_valid;
    double max_latency = 0.0;
    double sum_latency = 0.0;
    for (double v : result.per_step_latency) {
        max_latency = std::max(max_latency, v);
        sum_latency += v;
    }
    j["max_latency_ms"] = max_latency;
    j["mean_latency_ms"] = result.steps > 0 ? sum_latency / result.steps : 0.0;
    out << j.dump(2) << "\n";
}

}  // namespace mvr::prerender
