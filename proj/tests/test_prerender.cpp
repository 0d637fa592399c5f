#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mvr/prerender/walk.hpp"

using namespace mvr::prerender;

namespace {

GridWorld grid(int w, int h, int k = 5)
{
    GridWorld world;
    world.width = w;
    world.height = h;
    world.region_side = k;
    return world;
}

}  // namespace

TEST_CASE("hop deadline")
{
    TimingModel timing;
    GridWorld world = grid(3, 3);
    timing.avatar_speed = 1.0;
    CHECK(hop_deadline(world, timing) == doctest::Approx(20.0).epsilon(1e-12));
    timing.avatar_speed = 2.0;
    CHECK(hop_deadline(world, timing) == doctest::Approx(10.0).epsilon(1e-12));
    world.spacing = 0.04;
    timing.avatar_speed = 1.0;
    CHECK(hop_deadline(world, timing) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(hop_deadline(world, timing, {0, 0}, {1, 1}) == doctest::Approx(40.0 * std::sqrt(2.0)));
}

TEST_CASE("neighbors")
{
    CHECK(neighbors(grid(5, 5), {2, 2}).size() == 4);
    CHECK(neighbors(grid(5, 5), {0, 0}).size() == 2);
    CHECK(neighbors(grid(5, 5), {0, 2}).size() == 3);
    CHECK(neighbors(grid(1, 1), {0, 0}).empty());
    CHECK_THROWS_AS(neighbors(grid(5, 5), {5, 0}), std::out_of_range);

    GridWorld eight = grid(5, 5);
    eight.eight_neighborhood = true;
    CHECK(neighbors(eight, {2, 2}).size() == 8);
    CHECK(neighbors(eight, {0, 0}).size() == 3);
}

TEST_CASE("region segmentation")
{
    const auto single = segment_regions(grid(5, 5));
    CHECK(single.region_count() == 1);
    CHECK(single.centers()[0] == GridPoint{2, 2});
    CHECK(segment_regions(grid(10, 10)).region_count() == 4);

    SUBCASE("centers map to themselves")
    {
        const auto regions = segment_regions(grid(23, 17));
        for (std::size_t r = 0; r < regions.region_count(); ++r) {
            CHECK(regions.region_of(regions.centers()[r]) == static_cast<int>(r));
        }
    }

    SUBCASE("assignment is the nearest center, exhaustively")
    {
        for (int k : {1, 3, 5}) {
            for (int w = 1; w <= 50; ++w) {
                for (int h = 1; h <= 50; h += (k == 5 ? 1 : 7)) {
                    const auto regions = segment_regions(grid(w, h, k));
                    const auto& centers = regions.centers();
                    for (int y = 0; y < h; ++y) {
                        for (int x = 0; x < w; ++x) {
                            int best = -1;
                            int best_distance = std::numeric_limits<int>::max();
                            for (std::size_t r = 0; r < centers.size(); ++r) {
                                const int d = std::abs(centers[r].x - x) + std::abs(centers[r].y - y);
                                if (d < best_distance) {
                                    best_distance = d;
                                    best = static_cast<int>(r);
                                }
                            }
                            if (regions.region_of({x, y}) != best) {
                                FAIL("grid " << w << "x" << h << " k=" << k << " point (" << x << ","
                                             << y << ")");
                            }
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("frame encoding")
{
    const auto regions = segment_regions(grid(5, 5));
    const CompressionModel model{1000.0, 0.1, 4.0};

    const auto center = encode_frame(regions, {2, 2}, model);
    CHECK(center.kind == FrameKind::I);
    CHECK(center.size == 1000.0);
    CHECK_FALSE(center.reference.has_value());

    const auto p = encode_frame(regions, {2, 0}, model);
    CHECK(p.kind == FrameKind::P);
    CHECK(p.size == doctest::Approx(550.0).epsilon(1e-12));
    REQUIRE(p.reference.has_value());
    CHECK(*p.reference == GridPoint{2, 2});

    // the nearest P-frames approach the floor as decay grows
    const auto near = encode_frame(regions, {2, 1}, CompressionModel{1000.0, 0.1, 1e9});
    CHECK(near.size == doctest::Approx(100.0).epsilon(1e-6));

    SUBCASE("compression never inflates")
    {
        const auto big = segment_regions(grid(31, 27, 7));
        for (int y = 0; y < 27; ++y) {
            for (int x = 0; x < 31; ++x) {
                const auto frame = encode_frame(big, {x, y}, model);
                CHECK(frame.size <= model.base_i_size);
                CHECK(frame.size >= model.ratio_floor * model.base_i_size);
            }
        }
    }

    CHECK_THROWS_AS(encode_frame(regions, {0, 0}, CompressionModel{1000.0, 0.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(encode_frame(regions, {0, 0}, CompressionModel{1000.0, 0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("step latency")
{
    TimingModel timing{1.0, 1.0, 100.0, 1.0};
    PanoramaFrame cached{{0, 0}, FrameKind::I, 1000.0, std::nullopt};
    CHECK(step_latency(cached, timing, 5.0) == doctest::Approx(6.0));
    PanoramaFrame p{{0, 1}, FrameKind::P, 550.0, GridPoint{0, 0}};
    CHECK(step_latency(p, timing, 5.0) == doctest::Approx(11.5));

    double previous = 0.0;
    for (double size = 0.0; size <= 2000.0; size += 50.0) {
        p.size = size;
        const double latency = step_latency(p, timing, 5.0);
        CHECK(latency >= previous);
        previous = latency;
    }
}

TEST_CASE("walk simulation")
{
    const GridWorld world = grid(20, 20);
    WalkSettings settings;
    settings.compression = {1000.0, 0.1, 4.0};
    settings.work_units = 5.0;

    SUBCASE("generous timing never misses")
    {
        // worst case: 1 + 5 + 1000/100 = 16 ms < 20 ms
        const TimingModel timing{1.0, 1.0, 100.0, 1.0};
        const auto result = simulate_walk(world, timing, settings, {}, 2000, 3);
        CHECK(result.deadline_misses == 0);
        CHECK(result.steps == 2000);
        CHECK(result.decode_order_valid);
    }

    SUBCASE("starved bandwidth misses every P-frame step")
    {
        const TimingModel timing{1.0, 1.0, 1e-3, 1.0};
        const auto result = simulate_walk(world, timing, settings, {}, 500, 3);
        int p_steps = 0;
        for (const auto& r : result.records) {
            p_steps += r.kind == FrameKind::P ? 1 : 0;
            CHECK(r.missed == (r.kind == FrameKind::P));
        }
        CHECK(result.deadline_misses == p_steps);
    }

    SUBCASE("miss iff latency exceeds the deadline")
    {
        const TimingModel timing{2.0, 0.5, 60.0, 1.0};
        const auto result = simulate_walk(world, timing, settings, {}, 1000, 9);
        for (const auto& r : result.records) {
            CHECK(r.missed == (r.latency_ms > 20.0));
        }
    }

    SUBCASE("bookkeeping")
    {
        const TimingModel timing{1.0, 1.0, 100.0, 1.0};
        const auto result = simulate_walk(world, timing, settings, {}, 500, 0);
        CHECK(result.bytes_transmitted < result.bytes_all_i_baseline);
        CHECK(result.bytes_all_i_baseline == 500 * 1000.0);
        GridPoint previous{10, 10};
        for (const auto& r : result.records) {
            CHECK(r.prerenders == static_cast<int>(neighbors(world, previous).size()));
            previous = r.point;
        }
    }

    SUBCASE("replay is bit-exact")
    {
        const TimingModel timing{1.0, 1.0, 80.0, 1.0};
        const auto a = simulate_walk(world, timing, settings, {}, 300, 42);
        const auto b = simulate_walk(world, timing, settings, {}, 300, 42);
        std::ostringstream sa, sb;
        write_walk_csv(sa, a);
        write_walk_csv(sb, b);
        CHECK(sa.str() == sb.str());
        CHECK(a.per_step_latency == b.per_step_latency);
    }

    SUBCASE("trace replay")
    {
        std::istringstream text("# start\n0 0 0\n1 1 0\n2 2 0\n\n3 2 1\n");
        MobilitySpec mobility;
        mobility.kind = MobilitySpec::Kind::Trace;
        mobility.trace = read_trace(text);
        REQUIRE(mobility.trace.size() == 4);
        const auto result = simulate_walk(world, TimingModel{}, settings, mobility, 100, 0);
        CHECK(result.steps == 3);
        CHECK(result.records.back().point == GridPoint{2, 1});

        mobility.trace.push_back({25, 1});
        CHECK_THROWS_AS(simulate_walk(world, TimingModel{}, settings, mobility, 100, 0), std::invalid_argument);

        std::istringstream bad("0 0 0\n2 1 0\n");
        CHECK_THROWS_AS(read_trace(bad), std::invalid_argument);
    }

    CHECK_THROWS_AS(simulate_walk(world, TimingModel{}, settings, {}, 0, 0), std::invalid_argument);
}
