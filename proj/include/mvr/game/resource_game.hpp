#pragma once

// Two-tier rendering-resource game between one cloud and a set of edge nodes.
//
// Tier 2: edge nodes choose resource demands non-cooperatively for a posted
// price. Tier 1: the cloud picks the price knowing how the edge equilibrium
// responds. Solved by backward induction: the inner equilibrium is computed by
// best-response sweeps, the outer price by projected gradient ascent on the
// induced cloud utility.
//
// Edge utility:  alpha * ln(1 + d) - beta * d * (d + D_others) / C - p * d
// Cloud utility: (p - c) * sum_i d_i*(p)

#include <string>
#include <vector>

namespace mvr::game {

struct EdgeNodeParams {
    std::string id;
    double alpha = 1.0;       ///< satisfaction weight, > 0
    double beta = 0.0;        ///< congestion coefficient, >= 0
    double demand_max = 1.0;  ///< upper bound on demand, > 0

    void validate() const;
};

struct CloudParams {
    double unit_cost = 0.5;  ///< c
    double price_min = 0.5;
    double price_max = 3.0;
    double capacity = 10.0;  ///< C, normalizes congestion

    void validate() const;
    double price_range() const { return price_max - price_min; }
};

struct SolverSettings {
    double br_tolerance = 1e-6;
    int br_max_iters = 10'000;
    /// Initial price move, as a fraction of the admissible price interval.
    double price_step = 0.1;
    /// Finite-difference half-width, as a fraction of the price interval.
    double fd_epsilon = 1e-4;
    int price_max_iters = 500;
    /// Uniform price scan whose best point starts the ascent; the leader
    /// objective has kinks where a node's demand reaches zero.
    int price_seed_points = 41;

    void validate() const;
};

struct EquilibriumResult {
    double price = 0.0;
    std::vector<double> demands;
    std::vector<double> edge_utilities;
    double cloud_utility = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct CloudUtility {
    double value = 0.0;
    bool equilibrium_converged = true;  ///< false: inner equilibrium hit its sweep cap
};

/// Throws std::domain_error if price <= 0, demand < 0 or others < 0.
double edge_utility(const EdgeNodeParams& node, double demand, double others_demand,
                    double price, double capacity);

/// Maximizer of edge_utility over [0, demand_max] by golden-section search.
double edge_best_response(const EdgeNodeParams& node, double others_demand, double price,
                          double capacity, const SolverSettings& settings);

/// Synchronous best-response sweeps from zero demands. Non-convergence is
/// reported through `converged`, not thrown. cloud_utility is left at 0.
EquilibriumResult nash_equilibrium(const std::vector<EdgeNodeParams>& nodes, double price,
                                   double capacity, const SolverSettings& settings);

CloudUtility cloud_utility(const CloudParams& cloud, const std::vector<EdgeNodeParams>& nodes,
                           double price, const SolverSettings& settings);

EquilibriumResult solve_stackelberg(const CloudParams& cloud,
                                    const std::vector<EdgeNodeParams>& nodes,
                                    const SolverSettings& settings);

/// Flat `key=value` record, one key per line. Vectors are comma separated.
std::string to_record(const EquilibriumResult& result);
EquilibriumResult parse_record(const std::string& text);

}  // namespace mvr::game
