#include "mvr/game/resource_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "mvr/common/format.hpp"

namespace mvr::game {

void EdgeNodeParams::validate() const
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument(fmt::format("edge node '{}': alpha must be > 0", id));
    }
    if (!(beta >= 0.0)) {
        throw std::invalid_argument(fmt::format("edge node '{}': beta must be >= 0", id));
    }
    if (!(demand_max > 0.0)) {
        throw std::invalid_argument(fmt::format("edge node '{}': demand_max must be > 0", id));
    }
}

void CloudParams::validate() const
{
    if (!(unit_cost > 0.0)) {
        throw std::invalid_argument("cloud: unit_cost must be > 0");
    }
    if (!(unit_cost <= price_min)) {
        throw std::invalid_argument("cloud: unit_cost must not exceed price_min");
    }
    if (!(price_min < price_max)) {
        throw std::invalid_argument("cloud: price_min must be < price_max");
    }
    if (!(capacity > 0.0)) {
        throw std::invalid_argument("cloud: capacity must be > 0");
    }
}

void SolverSettings::validate() const
{
    if (!(br_tolerance > 0.0) || br_max_iters <= 0 || !(price_step > 0.0) ||
        !(fd_epsilon > 0.0) || price_max_iters <= 0 || price_seed_points < 1) {
        throw std::invalid_argument("solver settings must all be strictly positive");
    }
}

double edge_utility(const EdgeNodeParams& node, double demand, double others_demand,
                    double price, double capacity)
{
    if (!(price > 0.0)) {
        throw std::domain_error("edge_utility: price must be > 0");
    }
    if (!(demand >= 0.0) || !(others_demand >= 0.0)) {
        throw std::domain_error("edge_utility: demands must be >= 0");
    }
    return node.alpha * std::log1p(demand) -
           node.beta * demand * (demand + others_demand) / capacity - price * demand;
}

double edge_best_response(const EdgeNodeParams& node, double others_demand, double price,
                          double capacity, const SolverSettings& settings)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double d) { return edge_utility(node, d, others_demand, price, capacity); };

    double lo = 0.0;
    double hi = node.demand_max;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > settings.br_tolerance) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }

    // the bracket only approaches a boundary optimum; snap to it exactly
    double best = 0.5 * (lo + hi);
    double best_value = f(best);
    for (double edge : {0.0, node.demand_max}) {
        const double value = f(edge);
        if (value >= best_value) {
            best = edge;
            best_value = value;
        }
    }
    return best;
}

EquilibriumResult nash_equilibrium(const std::vector<EdgeNodeParams>& nodes, double price,
                                   double capacity, const SolverSettings& settings)
{
    if (nodes.empty()) {
        throw std::invalid_argument("nash_equilibrium: at least one edge node is required");
    }
    const std::size_t n = nodes.size();
    EquilibriumResult result;
    result.price = price;
    result.demands.assign(n, 0.0);

    std::vector<double> next(n);
    for (int sweep = 1; sweep <= settings.br_max_iters; ++sweep) {
        double total = 0.0;
        for (double d : result.demands) {
            total += d;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double others = std::max(0.0, total - result.demands[i]);
            next[i] = edge_best_response(nodes[i], others, price, capacity, settings);
            change = std::max(change, std::abs(next[i] - result.demands[i]));
        }
        result.demands.swap(next);
        result.iterations = sweep;
        if (change < settings.br_tolerance) {
            result.converged = true;
            break;
        }
    }

    double total = 0.0;
    for (double d : result.demands) {
        total += d;
    }
    result.edge_utilities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double others = std::max(0.0, total - result.demands[i]);
        result.edge_utilities[i] = edge_utility(nodes[i], result.demands[i], others, price, capacity);
    }
    return result;
}

CloudUtility cloud_utility(const CloudParams& cloud, const std::vector<EdgeNodeParams>& nodes,
                           double price, const SolverSettings& settings)
{
    const double slack = 1e-12 * cloud.price_range();
    if (price < cloud.price_min - slack || price > cloud.price_max + slack) {
        throw std::domain_error(fmt::format("cloud_utility: price {} outside [{}, {}]", price,
                                            cloud.price_min, cloud.price_max));
    }
    const auto eq = nash_equilibrium(nodes, price, cloud.capacity, settings);
    double total = 0.0;
    for (double d : eq.demands) {
        total += d;
    }
    return {(price - cloud.unit_cost) * total, eq.converged};
}

EquilibriumResult solve_stackelberg(const CloudParams& cloud,
                                    const std::vector<EdgeNodeParams>& nodes,
                                    const SolverSettings& settings)
{
    cloud.validate();
    settings.validate();
    for (const auto& node : nodes) {
        node.validate();
    }

    const double range = cloud.price_range();
    const double eps = settings.fd_epsilon * range;
    const double min_step = 1e-8 * range;
    auto clamp_price = [&](double p) { return std::clamp(p, cloud.price_min, cloud.price_max); };
    auto utility = [&](double p) { return cloud_utility(cloud, nodes, p, settings).value; };

    double price = 0.5 * (cloud.price_min + cloud.price_max);
    double current = utility(price);
    double step = settings.price_step * range;
    if (settings.price_seed_points > 1) {
        const double spacing = range / (settings.price_seed_points - 1);
        for (int k = 0; k < settings.price_seed_points; ++k) {
            const double p = cloud.price_min + spacing * k;
            const double value = utility(p);
            if (value > current) {
                price = p;
                current = value;
            }
        }
        step = std::min(step, spacing);
    }
    bool step_converged = false;
    int iteration = 0;

    while (iteration < settings.price_max_iters) {
        ++iteration;
        // central difference, one-sided against the interval bounds
        const double up = clamp_price(price + eps);
        const double down = clamp_price(price - eps);
        const double gradient = (utility(up) - utility(down)) / (up - down);
        if (gradient == 0.0) {
            step_converged = true;
            break;
        }
        const double candidate = clamp_price(price + (gradient > 0.0 ? step : -step));
        const double value = utility(candidate);
        if (value > current) {
            price = candidate;
            current = value;
        } else {
            step *= 0.5;
            if (step < min_step) {
                step_converged = true;
                break;
            }
        }
    }

    EquilibriumResult result = nash_equilibrium(nodes, price, cloud.capacity, settings);
    double total = 0.0;
    for (double d : result.demands) {
        total += d;
    }
    result.cloud_utility = (price - cloud.unit_cost) * total;
    result.converged = step_converged && result.converged;
    result.iterations = iteration;
    return result;
}

namespace {

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& text)
{
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) {
            values.push_back(std::stod(item));
        }
    }
    return values;
}

}  // namespace

std::string to_record(const EquilibriumResult& result)
{
    std::string out;
    out += "price=" + format_double(result.price) + "\n";
    out += "demands=" + join(result.demands) + "\n";
    out += "utilities=" + join(result.edge_utilities) + "\n";
    out += "cloud_utility=" + format_double(result.cloud_utility) + "\n";
    out += fmt::format("iterations={}\n", result.iterations);
    out += fmt::format("converged={}\n", result.converged ? "true" : "false");
    return out;
}

EquilibriumResult parse_record(const std::string& text)
{
    EquilibriumResult result;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("equilibrium record: malformed line '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "price") {
            result.price = std::stod(value);
        } else if (key == "demands") {
            result.demands = split_doubles(value);
        } else if (key == "utilities") {
            result.edge_utilities = split_doubles(value);
        } else if (key == "cloud_utility") {
            result.cloud_utility = std::stod(value);
        } else if (key == "iterations") {
            result.iterations = std::stoi(value);
        } else if (key == "converged") {
            result.converged = value == "true";
        } else {
            throw std::invalid_argument("equilibrium record: unknown key '" + key + "'");
        }
    }
    return result;
}

}  // namespace mvr::game
