#include "mvr/bench/metrics.hpp"

#include <stdexcept>

namespace mvr::bench {

double Confusion::accuracy() const
{
    return total() > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
}

double Confusion::precision() const
{
    return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double Confusion::recall() const
{
    return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double Confusion::f1() const
{
    const double p = precision();
    const double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

Confusion& Confusion::operator+=(const Confusion& other)
{
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

Confusion score_focus(const std::vector<bool>& predicted, const std::vector<bool>& actual)
{
    if (predicted.size() != actual.size()) {
        throw std::invalid_argument("score_focus: prediction and flag vectors differ in length");
    }
    Confusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) {
            ++(actual[i] ? c.tp : c.fp);
        } else {
            ++(actual[i] ? c.fn : c.tn);
        }
    }
    return c;
}

double relative_reduction(double candidate, double baseline)
{
    if (!(baseline > 0.0)) {
        throw std::invalid_argument("relative_reduction: baseline must be > 0");
    }
    return 100.0 * (baseline - candidate) / baseline;
}

}  // namespace mvr::bench
