#pragma once

// Discretized virtual space and the region layout used for panorama
// compression. Grid points are addressed by integer (x, y); spacing is metres.

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

namespace mvr::prerender {

struct GridPoint {
    int x = 0;
    int y = 0;

    auto operator<=>(const GridPoint&) const = default;
};

struct GridWorld {
    int width = 1;
    int height = 1;
    double spacing = 0.02;  ///< metres between adjacent points
    int region_side = 5;    ///< points per compression-region side, odd
    /// Also pre-render diagonal neighbors; their deadline scales with hop length.
    bool eight_neighborhood = false;

    void validate() const;
    bool contains(GridPoint p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
    std::size_t index(GridPoint p) const { return static_cast<std::size_t>(p.y) * width + p.x; }
    std::size_t point_count() const { return static_cast<std::size_t>(width) * height; }
};

struct TimingModel {
    double request_ms = 1.0;          ///< background rendering request latency
    double render_throughput = 1.0;   ///< panorama work units per ms (render + encode)
    double bandwidth = 100.0;         ///< downlink bytes per ms
    double avatar_speed = 1.0;        ///< m/s

    void validate() const;
};

/// Time to cross one axis-aligned grid hop, in ms: 1000 * spacing / speed.
double hop_deadline(const GridWorld& world, const TimingModel& timing);

/// Deadline for the hop between two adjacent points (diagonals scale by sqrt 2).
double hop_deadline(const GridWorld& world, const TimingModel& timing, GridPoint from, GridPoint to);

/// Neighborhood clipped to the grid. Order: -x, +x, -y, +y, then diagonals.
/// Throws std::out_of_range for points outside the grid.
std::vector<GridPoint> neighbors(const GridWorld& world, GridPoint point);

/// Assignment of every grid point to a compression region.
///
/// Centers come from tiling the grid with region_side x region_side squares;
/// a border tile that is cut short takes the coordinate-wise median of its
/// points. Each point then belongs to its nearest center under Manhattan
/// distance, ties going to the lower region index. For full tiles this is
/// exactly the tile; at short borders a few points switch to the closer
/// border center.
class RegionMap {
public:
    explicit RegionMap(const GridWorld& world);

    const GridWorld& world() const { return world_; }
    std::size_t region_count() const { return centers_.size(); }
    const std::vector<GridPoint>& centers() const { return centers_; }

    int region_of(GridPoint p) const;
    GridPoint center_of(GridPoint p) const { return centers_[region_of(p)]; }
    bool is_center(GridPoint p) const { return center_of(p) == p; }

private:
    GridWorld world_;
    int tiles_x_ = 0;
    int tiles_y_ = 0;
    std::vector<GridPoint> centers_;
    std::vector<int> assignment_;
};

RegionMap segment_regions(const GridWorld& world);

}  // namespace mvr::prerender
