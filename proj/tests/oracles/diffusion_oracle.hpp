#pragma once

// Independent references for the diffusion module.

#include <vector>

namespace oracle {

/// alpha_bar_t for t = 0..steps, accumulated in long double from a linear
/// beta grid computed as start + (end - start) * (t - 1) / (steps - 1).
inline std::vector<long double> alpha_bar_table(int steps, long double start, long double end)
{
    std::vector<long double> table(static_cast<std::size_t>(steps) + 1, 1.0L);
    for (int t = 1; t <= steps; ++t) {
        const long double beta = steps == 1 ? start : start + (end - start) * (t - 1) / (steps - 1);
        table[static_cast<std::size_t>(t)] = table[static_cast<std::size_t>(t) - 1] * (1.0L - beta);
    }
    return table;
}

}  // namespace oracle
