#include "mvr/prerender/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace mvr::prerender {

void GridWorld::validate() const
{
    if (width < 1 || height < 1) {
        throw std::invalid_argument("grid: width and height must be >= 1");
    }
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("grid: spacing must be > 0");
    }
    if (region_side < 1 || region_side % 2 == 0) {
        throw std::invalid_argument("grid: region_side must be odd and >= 1");
    }
}

void TimingModel::validate() const
{
    if (!(request_ms > 0.0) || !(render_throughput > 0.0) || !(bandwidth > 0.0) ||
        !(avatar_speed > 0.0)) {
        throw std::invalid_argument("timing: all fields must be > 0");
    }
}

double hop_deadline(const GridWorld& world, const TimingModel& timing)
{
    return 1000.0 * world.spacing / timing.avatar_speed;
}

double hop_deadline(const GridWorld& world, const TimingModel& timing, GridPoint from, GridPoint to)
{
    const int dx = std::abs(to.x - from.x);
    const int dy = std::abs(to.y - from.y);
    if (dx + dy == 1) {
        return hop_deadline(world, timing);
    }
    return hop_deadline(world, timing) * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
}

std::vector<GridPoint> neighbors(const GridWorld& world, GridPoint point)
{
    if (!world.contains(point)) {
        throw std::out_of_range(fmt::format("point ({}, {}) outside {}x{} grid", point.x, point.y,
                                            world.width, world.height));
    }
    static constexpr int kAxis[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    static constexpr int kDiagonal[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
    std::vector<GridPoint> out;
    out.reserve(world.eight_neighborhood ? 8 : 4);
    for (const auto& d : kAxis) {
        const GridPoint q{point.x + d[0], point.y + d[1]};
        if (world.contains(q)) {
            out.push_back(q);
        }
    }
    if (world.eight_neighborhood) {
        for (const auto& d : kDiagonal) {
            const GridPoint q{point.x + d[0], point.y + d[1]};
            if (world.contains(q)) {
                out.push_back(q);
            }
        }
    }
    return out;
}

namespace {

// lower median of the tile's coordinates along one axis
int tile_center(int tile, int side, int extent)
{
    const int lo = tile * side;
    const int count = std::min(extent, lo + side) - lo;
    return lo + (count - 1) / 2;
}

}  // namespace

RegionMap::RegionMap(const GridWorld& world) : world_(world)
{
    world_.validate();
    const int k = world_.region_side;
    tiles_x_ = (world_.width + k - 1) / k;
    tiles_y_ = (world_.height + k - 1) / k;
    centers_.reserve(static_cast<std::size_t>(tiles_x_) * tiles_y_);
    for (int ty = 0; ty < tiles_y_; ++ty) {
        for (int tx = 0; tx < tiles_x_; ++tx) {
            centers_.push_back({tile_center(tx, k, world_.width), tile_center(ty, k, world_.height)});
        }
    }

    // the nearest center always lies in the point's own tile or an adjacent one
    assignment_.resize(world_.point_count());
    for (int y = 0; y < world_.height; ++y) {
        for (int x = 0; x < world_.width; ++x) {
            const int tx = x / k;
            const int ty = y / k;
            int best = -1;
            int best_distance = std::numeric_limits<int>::max();
            for (int ny = std::max(0, ty - 1); ny <= std::min(tiles_y_ - 1, ty + 1); ++ny) {
                for (int nx = std::max(0, tx - 1); nx <= std::min(tiles_x_ - 1, tx + 1); ++nx) {
                    const int region = ny * tiles_x_ + nx;
                    const GridPoint c = centers_[region];
                    const int distance = std::abs(c.x - x) + std::abs(c.y - y);
                    if (distance < best_distance || (distance == best_distance && region < best)) {
                        best = region;
                        best_distance = distance;
                    }
                }
            }
            assignment_[world_.index({x, y})] = best;
        }
    }
}

int RegionMap::region_of(GridPoint p) const
{
    if (!world_.contains(p)) {
        throw std::out_of_range(fmt::format("point ({}, {}) outside grid", p.x, p.y));
    }
    return assignment_[world_.index(p)];
}

RegionMap segment_regions(const GridWorld& world) { return RegionMap(world); }

}  // namespace mvr::prerender
