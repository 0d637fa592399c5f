#include "mvr/prerender/panorama.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvr::prerender {

std::string_view to_string(FrameKind kind) { return kind == FrameKind::I ? "I" : "P"; }

void CompressionModel::validate() const
{
    if (!(base_i_size > 0.0)) {
        throw std::invalid_argument("compression: base_i_size must be > 0");
    }
    if (!(ratio_floor > 0.0 && ratio_floor <= 1.0)) {
        throw std::invalid_argument("compression: ratio_floor must be in (0, 1]");
    }
    if (!(decay > 0.0)) {
        throw std::invalid_argument("compression: decay must be > 0");
    }
}

PanoramaFrame encode_frame(const RegionMap& regions, GridPoint point, const CompressionModel& model)
{
    model.validate();
    const GridPoint center = regions.center_of(point);
    PanoramaFrame frame;
    frame.point = point;
    if (center == point) {
        frame.kind = FrameKind::I;
        frame.size = model.base_i_size;
        return frame;
    }
    const double dist = std::hypot(static_cast<double>(point.x - center.x),
                                   static_cast<double>(point.y - center.y));
    const double ramp = std::min(1.0, dist / model.decay);
    frame.kind = FrameKind::P;
    frame.size = model.base_i_size * (model.ratio_floor + (1.0 - model.ratio_floor) * ramp);
    frame.reference = center;
    return frame;
}

double step_latency(const PanoramaFrame& frame, const TimingModel& timing, double work_units)
{
    const double transmit = frame.kind == FrameKind::I ? 0.0 : frame.size / timing.bandwidth;
    return timing.request_ms + work_units / timing.render_throughput + transmit;
}

}  // namespace mvr::prerender
