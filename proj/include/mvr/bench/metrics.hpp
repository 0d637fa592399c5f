#pragma once

#include <vector>

namespace mvr::bench {

/// Predicted-focus membership scored against ground-truth interest flags.
struct Confusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
    double accuracy() const;
    /// 0 when nothing is predicted positive.
    double precision() const;
    /// 0 when there are no actual positives.
    double recall() const;
    /// Harmonic mean of precision and recall; 0 when both are 0.
    double f1() const;

    Confusion& operator+=(const Confusion& other);
};

Confusion score_focus(const std::vector<bool>& predicted, const std::vector<bool>& actual);

/// (baseline - candidate) / baseline, in percent.
double relative_reduction(double candidate, double baseline);

}  // namespace mvr::bench
