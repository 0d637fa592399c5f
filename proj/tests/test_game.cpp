#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mvr/common/rng.hpp"
#include "mvr/game/resource_game.hpp"
#include "oracles/game_oracle.hpp"

using namespace mvr::game;

namespace {

EdgeNodeParams node(double alpha, double beta, double demand_max = 10.0)
{
    return EdgeNodeParams{"n", alpha, beta, demand_max};
}

}  // namespace

TEST_CASE("edge utility closed form")
{
    CHECK(edge_utility(node(2, 0), 0.0, 5.0, 1.0, 10.0) == 0.0);
    CHECK(edge_utility(node(2, 0), 1.0, 0.0, 1.0, 10.0) ==
          doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-12));
    CHECK(edge_utility(node(2, 1), 1.0, 3.0, 0.5, 10.0) ==
          doctest::Approx(2.0 * std::log(2.0) - 0.4 - 0.5).epsilon(1e-12));
    CHECK(edge_utility(node(2, 1), 1.0, 3.0, 0.5, 10.0) == doctest::Approx(0.4862944).epsilon(1e-6));
}

TEST_CASE("edge utility rejects invalid arguments")
{
    CHECK_THROWS_AS(edge_utility(node(2, 0), 1.0, 0.0, 0.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(edge_utility(node(2, 0), -0.1, 0.0, 1.0, 10.0), std::domain_error);
}

TEST_CASE("edge utility is concave in own demand")
{
    mvr::Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = node(rng.uniform(0.5, 5.0), rng.uniform(0.0, 2.0), rng.uniform(1.0, 10.0));
        const double others = rng.uniform(0.0, 10.0);
        const double price = rng.uniform(0.1, 3.0);
        double previous_slope = INFINITY;
        const double h = n.demand_max / 99.0;
        for (int k = 0; k < 99; ++k) {
            const double slope = (edge_utility(n, (k + 1) * h, others, price, 10.0) -
                                  edge_utility(n, k * h, others, price, 10.0)) / h;
            CHECK(slope <= previous_slope + 1e-12);
            previous_slope = slope;
        }
    }
}

TEST_CASE("best response matches closed form and grid scan")
{
    SolverSettings settings;
    CHECK(edge_best_response(node(2, 0), 0.0, 1.0, 10.0, settings) ==
          doctest::Approx(1.0).epsilon(settings.br_tolerance));
    CHECK(edge_best_response(node(2, 0), 0.0, 3.0, 10.0, settings) == 0.0);

    const double grid = oracle::grid_best_response(node(2, 1), 2.0, 0.5, 10.0, 1e-5);
    CHECK(std::abs(edge_best_response(node(2, 1), 2.0, 0.5, 10.0, settings) - grid) <= 1e-5);

    mvr::Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = node(rng.uniform(0.5, 6.0), 0.0, rng.uniform(0.5, 8.0));
        const double price = rng.uniform(0.2, 4.0);
        CHECK(std::abs(edge_best_response(n, 1.0, price, 10.0, settings) -
                       oracle::closed_form_best_response(n, price)) <= settings.br_tolerance);
    }
}

TEST_CASE("nash equilibrium")
{
    SolverSettings settings;

    SUBCASE("single decoupled node")
    {
        const auto eq = nash_equilibrium({node(2, 0)}, 1.0, 10.0, settings);
        REQUIRE(eq.converged);
        CHECK(eq.demands[0] == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("identical players are symmetric")
    {
        std::vector<EdgeNodeParams> nodes(4, node(3, 1.5, 5));
        const auto eq = nash_equilibrium(nodes, 0.8, 10.0, settings);
        REQUIRE(eq.converged);
        for (double d : eq.demands) {
            CHECK(std::abs(d - eq.demands[0]) <= settings.br_tolerance);
        }
    }

    SUBCASE("heterogeneous pair agrees with the 2-D grid oracle")
    {
        std::vector<EdgeNodeParams> nodes{node(2.5, 1.0, 4.0), node(4.0, 2.0, 4.0)};
        const auto eq = nash_equilibrium(nodes, 0.7, 5.0, settings);
        REQUIRE(eq.converged);
        const auto grid = oracle::grid_equilibrium(nodes, 0.7, 5.0, 1e-3);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            CHECK(std::abs(eq.demands[i] - grid[i]) <= 1e-3);
        }
    }

    SUBCASE("converged point is a fixed point of unilateral best responses")
    {
        mvr::Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<EdgeNodeParams> nodes;
            const int count = 1 + static_cast<int>(rng.index(5));
            for (int i = 0; i < count; ++i) {
                nodes.push_back(node(rng.uniform(1.0, 5.0), rng.uniform(0.0, 2.0), rng.uniform(1.0, 6.0)));
            }
            const double price = rng.uniform(0.3, 2.0);
            const auto eq = nash_equilibrium(nodes, price, 8.0, settings);
            REQUIRE(eq.converged);
            double total = 0.0;
            for (double d : eq.demands) {
                total += d;
            }
            for (int i = 0; i < count; ++i) {
                const double fresh = edge_best_response(nodes[i], total - eq.demands[i], price, 8.0, settings);
                CHECK(std::abs(fresh - eq.demands[i]) < 10 * settings.br_tolerance);
            }
        }
    }

    SUBCASE("cap on sweeps is reported, not thrown")
    {
        SolverSettings capped;
        capped.br_max_iters = 1;
        std::vector<EdgeNodeParams> nodes{node(2.5, 1.0, 4.0), node(4.0, 2.0, 4.0)};
        const auto eq = nash_equilibrium(nodes, 0.7, 5.0, capped);
        CHECK_FALSE(eq.converged);
        CHECK(eq.iterations == 1);
    }

    CHECK_THROWS_AS(nash_equilibrium({}, 1.0, 10.0, settings), std::invalid_argument);
}

TEST_CASE("cloud utility")
{
    SolverSettings settings;
    const CloudParams cloud{0.5, 0.5, 5.0, 10.0};
    CHECK(cloud_utility(cloud, {node(2, 0)}, 0.5, settings).value == 0.0);
    CHECK(cloud_utility(cloud, {node(2, 0)}, 1.0, settings).value == doctest::Approx(0.5).epsilon(1e-6));
    // alpha / p - 1 < 0 for every node
    CHECK(cloud_utility(cloud, {node(2, 0), node(1.5, 0.3)}, 4.0, settings).value == 0.0);
    CHECK_THROWS_AS(cloud_utility(cloud, {node(2, 0)}, 6.0, settings), std::domain_error);
}

TEST_CASE("stackelberg solution")
{
    SolverSettings settings;
    const CloudParams cloud{0.5, 0.5, 3.0, 10.0};
    const std::vector<EdgeNodeParams> nodes{node(2.0, 0.5, 10.0), node(3.0, 0.8, 10.0)};
    const auto result = solve_stackelberg(cloud, nodes, settings);
    REQUIRE(result.converged);

    const auto sweep = oracle::price_sweep(cloud, nodes, settings);
    CHECK(std::abs(result.price - sweep.best_price) <= 0.01 * sweep.best_price);
    CHECK(result.cloud_utility >= cloud_utility(cloud, nodes, cloud.price_min, settings).value);
    CHECK(result.cloud_utility >= cloud_utility(cloud, nodes, cloud.price_max, settings).value);

    SUBCASE("backward induction consistency")
    {
        const auto eq = nash_equilibrium(nodes, result.price, cloud.capacity, settings);
        REQUIRE(eq.demands.size() == result.demands.size());
        for (std::size_t i = 0; i < eq.demands.size(); ++i) {
            CHECK(std::abs(eq.demands[i] - result.demands[i]) <= settings.br_tolerance);
        }
    }

    SUBCASE("richer satisfaction weakly raises the leader's optimum")
    {
        auto doubled = nodes;
        for (auto& n : doubled) {
            n.alpha *= 2.0;
        }
        const auto base = oracle::price_sweep(cloud, nodes, settings);
        const auto richer = oracle::price_sweep(cloud, doubled, settings);
        CHECK(richer.best_utility >= base.best_utility);
        CHECK(solve_stackelberg(cloud, doubled, settings).cloud_utility >= result.cloud_utility - 1e-9);
    }

    SUBCASE("deterministic")
    {
        const auto again = solve_stackelberg(cloud, nodes, settings);
        CHECK(to_record(again) == to_record(result));
    }
}

TEST_CASE("price scan seeds the ascent past zero-demand plateaus")
{
    // every node prices out above ~1.45, so the interval midpoint has zero gradient
    const CloudParams cloud{0.402, 0.5, 3.0, 6.082};
    const std::vector<EdgeNodeParams> nodes{node(1.455, 1.458, 3.745)};
    SolverSettings settings;
    const auto sweep = oracle::price_sweep(cloud, nodes, settings);
    REQUIRE(sweep.best_utility > 0.1);

    const auto seeded = solve_stackelberg(cloud, nodes, settings);
    CHECK(seeded.converged);
    CHECK(std::abs(seeded.price - sweep.best_price) <= 0.01 * sweep.best_price);

    settings.price_seed_points = 1;
    const auto midpoint = solve_stackelberg(cloud, nodes, settings);
    CHECK(midpoint.price == 1.75);
    CHECK(midpoint.cloud_utility == 0.0);

    settings.price_seed_points = 0;
    CHECK_THROWS_AS(solve_stackelberg(cloud, nodes, settings), std::invalid_argument);
}

TEST_CASE("iteration cap clears the converged flag")
{
    SolverSettings settings;
    settings.price_max_iters = 2;
    const CloudParams cloud{0.5, 0.5, 3.0, 10.0};
    const auto result = solve_stackelberg(cloud, {node(2.0, 0.5)}, settings);
    CHECK_FALSE(result.converged);
}

TEST_CASE("equilibrium record round trip")
{
    SolverSettings settings;
    const CloudParams cloud{0.5, 0.5, 3.0, 10.0};
    const auto result = solve_stackelberg(cloud, {node(2.0, 0.5), node(3.0, 0.1)}, settings);
    const auto parsed = parse_record(to_record(result));
    CHECK(parsed.price == result.price);
    CHECK(parsed.demands == result.demands);
    CHECK(parsed.edge_utilities == result.edge_utilities);
    CHECK(parsed.cloud_utility == result.cloud_utility);
    CHECK(parsed.converged == result.converged);
    CHECK_THROWS_AS(parse_record("nonsense"), std::invalid_argument);
}
