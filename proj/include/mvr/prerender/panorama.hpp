#pragma once

#include <optional>
#include <string_view>

#include "mvr/prerender/grid.hpp"

namespace mvr::prerender {

enum class FrameKind { I, P };

std::string_view to_string(FrameKind kind);

struct PanoramaFrame {
    GridPoint point;
    FrameKind kind = FrameKind::I;
    double size = 0.0;                   ///< bytes
    std::optional<GridPoint> reference;  ///< I-frame a P-frame decodes against
};

/// P-frame size = base * (floor + (1 - floor) * min(1, dist / decay)), where
/// dist is the Euclidean grid distance to the region's I-frame.
struct CompressionModel {
    double base_i_size = 1000.0;  ///< bytes
    double ratio_floor = 0.1;     ///< rho, in (0, 1]
    double decay = 4.0;           ///< lambda, grid units

    void validate() const;
};

PanoramaFrame encode_frame(const RegionMap& regions, GridPoint point, const CompressionModel& model);

/// Request + render/encode + transmission time in ms. I-frames are held on the
/// device, so they cost no transmission.
double step_latency(const PanoramaFrame& frame, const TimingModel& timing, double work_units);

}  // namespace mvr::prerender
