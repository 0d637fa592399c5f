#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvr/bench/policies.hpp"

namespace mvr::bench {

struct ComparisonRow {
    std::string policy;
    double mean_render_time_s = 0.0;
    double mean_inference_time_s = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// candidate relative to baseline; metric deltas are candidate - baseline.
struct ComparisonDelta {
    std::string candidate;
    std::string baseline;
    double time_reduction_pct = 0.0;
    double accuracy_delta = 0.0;
    double recall_delta = 0.0;
    double f1_delta = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<ComparisonDelta> deltas;  ///< every ordered pair of distinct reports
};

ComparisonRow summarize(const PolicyReport& report);
Comparison compare(const std::vector<ComparisonRow>& rows);
Comparison compare(const std::vector<PolicyReport>& reports);

/// policy,scene,render_time_s,inference_time_s,high_fraction,denoiser_calls,tp,fp,tn,fn
void write_scene_csv(std::ostream& out, const std::vector<PolicyReport>& reports);
/// policy,mean_render_time_s,mean_inference_time_s,accuracy,precision,recall,f1
void write_summary_csv(std::ostream& out, const Comparison& comparison);
void write_summary_json(std::ostream& out, const Comparison& comparison, const std::string& workload_digest,
                        std::uint64_t seed);
/// scene,render_time_s for one policy.
void write_time_series(std::ostream& out, const PolicyReport& report);

}  // namespace mvr::bench
