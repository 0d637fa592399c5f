#pragma once

#include <vector>

namespace mvr::bench {

/// Finite MDP with state-action rewards.
struct Mdp {
    int states = 0;
    int actions = 0;
    /// transition[a][s][s'] = P(s' | s, a); each row sums to 1.
    std::vector<std::vector<std::vector<double>>> transition;
    /// reward[s][a], received on taking a in s.
    std::vector<std::vector<double>> reward;

    Mdp(int state_count, int action_count);
    void validate() const;
};

struct MdpSolution {
    std::vector<double> values;
    std::vector<int> policy;  ///< greedy action, lowest index on ties
    int iterations = 0;
    bool converged = false;
};

/// Value iteration; stops once the sup-norm change is below
/// tolerance * (1 - discount) / discount, i.e. values within tolerance of the fixed point.
MdpSolution value_iteration(const Mdp& mdp, double discount, double tolerance = 1e-10, int max_iterations = 100000);

}  // namespace mvr::bench
