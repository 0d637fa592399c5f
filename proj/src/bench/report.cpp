#include "mvr/bench/report.hpp"

#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "mvr/common/format.hpp"

namespace mvr::bench {

ComparisonRow summarize(const PolicyReport& report)
{
    return ComparisonRow{std::string(to_string(report.policy)),
                         report.mean_render_time(),
                         report.mean_inference_time(),
                         report.pooled.accuracy(),
                         report.pooled.precision(),
                         report.pooled.recall(),
                         report.pooled.f1()};
}

Comparison compare(const std::vector<ComparisonRow>& rows)
{
    if (rows.size() < 2) {
        throw std::invalid_argument("compare: need at least two reports");
    }
    Comparison out;
    out.rows = rows;
    for (const auto& candidate : rows) {
        for (const auto& baseline : rows) {
            if (&candidate == &baseline) {
                continue;
            }
            out.deltas.push_back(ComparisonDelta{candidate.policy, baseline.policy,
                                                 relative_reduction(candidate.mean_render_time_s,
                                                                    baseline.mean_render_time_s),
                                                 candidate.accuracy - baseline.accuracy,
                                                 candidate.recall - baseline.recall, candidate.f1 - baseline.f1});
        }
    }
    return out;
}

Comparison compare(const std::vector<PolicyReport>& reports)
{
    std::vector<ComparisonRow> rows;
    for (const auto& r : reports) {
        rows.push_back(summarize(r));
    }
    return compare(rows);
}

void write_scene_csv(std::ostream& out, const std::vector<PolicyReport>& reports)
{
    out << "policy,scene,render_time_s,inference_time_s,high_fraction,denoiser_calls,tp,fp,tn,fn\n";
    for (const auto& report : reports) {
        for (const auto& s : report.scenes) {
            out << to_string(report.policy) << ',' << s.scene << ',' << format_double(s.render_time_s) << ','
                << format_double(s.inference_time_s) << ',' << format_double(s.high_fraction) << ','
                << s.denoiser_calls << ',' << s.confusion.tp << ',' << s.confusion.fp << ',' << s.confusion.tn << ','
                << s.confusion.fn << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, const Comparison& comparison)
{
    out << "policy,mean_render_time_s,mean_inference_time_s,accuracy,precision,recall,f1\n";
    for (const auto& r : comparison.rows) {
        out << r.policy << ',' << format_double(r.mean_render_time_s) << ',' << format_double(r.mean_inference_time_s)
            << ',' << format_double(r.accuracy) << ',' << format_double(r.precision) << ','
            << format_double(r.recall) << ',' << format_double(r.f1) << '\n';
    }
}

void write_summary_json(std::ostream& out, const Comparison& comparison, const std::string& workload_digest,
                        std::uint64_t seed)
{
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["workload_digest"] = workload_digest;
    auto& policies = j["policies"] = nlohmann::ordered_json::array();
    for (const auto& r : comparison.rows) {
        policies.push_back({{"policy", r.policy},
                            {"mean_render_time_s", r.mean_render_time_s},
                            {"mean_inference_time_s", r.mean_inference_time_s},
                            {"accuracy", r.accuracy},
                            {"precision", r.precision},
                            {"recall", r.recall},
                            {"f1", r.f1}});
    }
    auto& deltas = j["comparisons"] = nlohmann::ordered_json::array();
    for (const auto& d : comparison.deltas) {
        deltas.push_back({{"candidate", d.candidate},
                          {"baseline", d.baseline},
                          {"time_reduction_pct", d.time_reduction_pct},
                          {"accuracy_delta", d.accuracy_delta},
                          {"recall_delta", d.recall_delta},
                          {"f1_delta", d.f1_delta}});
    }
    out << j.dump(2) << '\n';
}

void write_time_series(std::ostream& out, const PolicyReport& report)
{
    out << "scene,render_time_s\n";
    for (const auto& s : report.scenes) {
        out << s.scene << ',' << format_double(s.render_time_s) << '\n';
    }
}

}  // namespace mvr::bench
