#include "mvr/bench/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mvr::bench {

Mdp::Mdp(int state_count, int action_count) : states(state_count), actions(action_count)
{
    if (state_count < 1 || action_count < 1) {
        throw std::invalid_argument("mdp: need at least one state and one action");
    }
    transition.assign(static_cast<std::size_t>(actions),
                      std::vector<std::vector<double>>(static_cast<std::size_t>(states),
                                                       std::vector<double>(static_cast<std::size_t>(states), 0.0)));
    reward.assign(static_cast<std::size_t>(states), std::vector<double>(static_cast<std::size_t>(actions), 0.0));
}

void Mdp::validate() const
{
    for (int a = 0; a < actions; ++a) {
        for (int s = 0; s < states; ++s) {
            double sum = 0.0;
            for (double p : transition[a][s]) {
                if (!(p >= 0.0)) {
                    throw std::invalid_argument(fmt::format("mdp: negative transition probability at a={}, s={}", a, s));
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::invalid_argument(fmt::format("mdp: transition row a={}, s={} sums to {}", a, s, sum));
            }
        }
    }
}

MdpSolution value_iteration(const Mdp& mdp, double discount, double tolerance, int max_iterations)
{
    if (!(discount > 0.0 && discount < 1.0)) {
        throw std::invalid_argument("value iteration: discount must be in (0, 1)");
    }
    if (!(tolerance > 0.0) || max_iterations < 1) {
        throw std::invalid_argument("value iteration: tolerance and max_iterations must be positive");
    }
    mdp.validate();
    const auto n = static_cast<std::size_t>(mdp.states);
    MdpSolution sol;
    sol.values.assign(n, 0.0);
    sol.policy.assign(n, 0);
    std::vector<double> next(n);
    const double stop = tolerance * (1.0 - discount) / discount;

    auto q_value = [&](std::size_t s, int a) {
        double future = 0.0;
        const auto& row = mdp.transition[static_cast<std::size_t>(a)][s];
        for (std::size_t t = 0; t < n; ++t) {
            future += row[t] * sol.values[t];
        }
        return mdp.reward[s][static_cast<std::size_t>(a)] + discount * future;
    };

    while (sol.iterations < max_iterations) {
        ++sol.iterations;
        double change = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double best = q_value(s, 0);
            for (int a = 1; a < mdp.actions; ++a) {
                best = std::max(best, q_value(s, a));
            }
            next[s] = best;
            change = std::max(change, std::abs(best - sol.values[s]));
        }
        sol.values.swap(next);
        if (change < stop) {
            sol.converged = true;
            break;
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        double best = q_value(s, 0);
        for (int a = 1; a < mdp.actions; ++a) {
            const double q = q_value(s, a);
            if (q > best) {
                best = q;
                sol.policy[s] = a;
            }
        }
    }
    return sol;
}

}  // namespace mvr::bench
