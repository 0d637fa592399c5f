#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mvr/prerender/panorama.hpp"

namespace mvr::prerender {

struct MobilitySpec {
    enum class Kind { RandomWalk, Trace };

    Kind kind = Kind::RandomWalk;
    /// Random-walk start; the grid center when absent.
    std::optional<GridPoint> start;
    /// Replayed positions; entry 0 is the starting point, every later entry is
    /// the point entered at that step.
    std::vector<GridPoint> trace;
};

struct StepRecord {
    int step = 0;
    GridPoint point;
    FrameKind kind = FrameKind::I;
    double size = 0.0;         ///< encoded frame size
    double transmitted = 0.0;  ///< bytes sent for this step
    double latency_ms = 0.0;
    double deadline_ms = 0.0;
    bool missed = false;
    int prerenders = 0;  ///< neighbors pre-rendered while standing at the previous point
};

struct WalkResult {
    int steps = 0;
    int deadline_misses = 0;
    double bytes_transmitted = 0.0;
    double bytes_all_i_baseline = 0.0;
    std::vector<double> per_step_latency;
    std::vector<StepRecord> records;
    long total_prerenders = 0;
    bool decode_order_valid = true;
};

struct WalkSettings {
    CompressionModel compression;
    double work_units = 5.0;  ///< per panorama
};

/// Moves an avatar for `horizon` steps. At each step every neighbor of the
/// current point is pre-rendered; the entered point is charged its
/// step_latency and counted as a miss when that exceeds the hop deadline.
/// Byte totals are compared against re-sending a full I-frame every step.
WalkResult simulate_walk(const GridWorld& world, const TimingModel& timing,
                         const WalkSettings& settings, const MobilitySpec& mobility, int horizon,
                         std::uint64_t seed);

/// Reads `step_index x y` lines; blank lines and `#` comments are skipped.
std::vector<GridPoint> read_trace(std::istream& in);

/// One row per step: step,x,y,kind,size,latency_ms,missed.
void write_walk_csv(std::ostream& out, const WalkResult& result);

/// JSON summary of the walk totals.
void write_walk_summary(std::ostream& out, const WalkResult& result);

}  // namespace mvr::prerender
