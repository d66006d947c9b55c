#pragma once

// Emissions accounting for optimizer decisions, the OPT_x/EVAL_y scenario
// matrix, PPA sweeps, and empirical CDFs of discrepancies across regions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridci/attribution.hpp"
#include "gridci/error.hpp"
#include "gridci/grid.hpp"
#include "gridci/optimizers.hpp"

namespace gridci {

struct EmissionsReport {
    double total_g = 0.0;
    double total_kwh = 0.0;
    double per_kwh = 0.0;  // g/kWh; 0 when nothing was consumed
    std::vector<double> per_hour_g;
};

namespace detail {

inline void finish_report(EmissionsReport& r) { r.per_kwh = r.total_kwh > 0.0 ? r.total_g / r.total_kwh : 0.0; }

}  // namespace detail

/// Requests at each DC are charged at the intensity of that DC's region.
inline EmissionsReport evaluate(const RoutingAssignment& routing, std::span<const DataCenter> dcs,
                                const SignalMap& signals) {
    const std::size_t hours = routing.hours.size();
    std::map<std::string, std::pair<const DataCenter*, const CarbonSignal*>, std::less<>> by_id;
    for (const auto& dc : dcs) by_id[dc.dc_id] = {&dc, &signal_for(signals, dc.region_id, hours)};
    EmissionsReport r;
    r.per_hour_g.assign(hours, 0.0);
    for (std::size_t t = 0; t < hours; ++t) {
        for (const auto& route : routing.hours[t]) {
            auto it = by_id.find(route.dc_id);
            if (it == by_id.end())
                throw Error(ErrorCode::InvalidWorkload, "routing names unknown data center '" + route.dc_id + "'");
            const double kwh = route.requests * it->second.first->per_request_energy_kwh;
            const double g = kwh * (*it->second.second)[t];
            r.per_hour_g[t] += g;
            r.total_g += g;
            r.total_kwh += kwh;
        }
    }
    detail::finish_report(r);
    return r;
}

inline EmissionsReport evaluate_schedule(std::span<const TemporalJob> jobs, std::span<const std::size_t> starts,
                                         const CarbonSignal& signal) {
    if (jobs.size() != starts.size())
        throw Error(ErrorCode::InvalidWorkload, "one start hour is needed per job");
    EmissionsReport r;
    r.per_hour_g.assign(signal.size(), 0.0);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (starts[j] + jobs[j].duration > signal.size())
            throw Error(ErrorCode::SignalSpanMismatch, "job run ends after the signal");
        for (std::size_t t = starts[j]; t < starts[j] + jobs[j].duration; ++t) {
            const double g = jobs[j].power_kw * signal[t];
            r.per_hour_g[t] += g;
            r.total_g += g;
            r.total_kwh += jobs[j].power_kw;
        }
    }
    detail::finish_report(r);
    return r;
}

inline EmissionsReport evaluate_plans(std::span<const AutoscaleJob> jobs, std::span<const AllocationPlan> plans,
                                      const CarbonSignal& signal) {
    if (jobs.size() != plans.size()) throw Error(ErrorCode::InvalidWorkload, "one plan is needed per job");
    EmissionsReport r;
    r.per_hour_g.assign(signal.size(), 0.0);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& plan = plans[j];
        if (plan.release + plan.instances.size() > signal.size())
            throw Error(ErrorCode::SignalSpanMismatch, "allocation extends past the signal");
        for (std::size_t i = 0; i < plan.instances.size(); ++i) {
            const std::size_t t = plan.release + i;
            const double kwh = plan.instances[i] * jobs[j].per_instance_power_kw;
            const double g = kwh * signal[t];
            r.per_hour_g[t] += g;
            r.total_g += g;
            r.total_kwh += kwh;
        }
    }
    detail::finish_report(r);
    return r;
}

inline EmissionsReport evaluate(const AllocationPlan& plan, const AutoscaleJob& job, const CarbonSignal& signal) {
    return evaluate_plans(std::span(&job, 1), std::span(&plan, 1), signal);
}

// ---------------------------------------------------------------------------
// Workloads and decisions
// ---------------------------------------------------------------------------

enum class Technique { spatial, temporal, autoscale };

inline std::string_view technique_name(Technique t) {
    switch (t) {
    case Technique::spatial: return "spatial";
    case Technique::temporal: return "temporal";
    case Technique::autoscale: return "autoscale";
    }
    return "unknown";
}

struct SpatialWorkload {
    std::vector<DataCenter> dcs;
    std::vector<ClientSite> sites;
    RoutingOptions options;
};

struct TemporalWorkload {
    std::string region_id;
    std::vector<TemporalJob> jobs;
};

struct AutoscaleWorkload {
    std::string region_id;
    std::vector<AutoscaleJob> jobs;
};

using Workload = std::variant<SpatialWorkload, TemporalWorkload, AutoscaleWorkload>;

inline Technique technique_of(const Workload& w) { return static_cast<Technique>(w.index()); }

struct StartTimes {
    std::vector<std::size_t> starts;
    bool operator==(const StartTimes&) const = default;
};

struct AllocationSchedule {
    std::vector<AllocationPlan> plans;
    bool operator==(const AllocationSchedule&) const = default;
};

using DecisionTrace = std::variant<std::monostate, RoutingAssignment, StartTimes, AllocationSchedule>;

namespace detail {

inline const CarbonSignal& single_region_signal(const SignalMap& signals, const std::string& region) {
    if (region.empty()) {
        if (signals.size() != 1)
            throw Error(ErrorCode::MissingSignal, "workload names no region and the signal set is ambiguous");
        return signals.begin()->second;
    }
    auto it = signals.find(region);
    if (it == signals.end()) throw Error(ErrorCode::MissingSignal, "no carbon signal for region '" + region + "'");
    return it->second;
}

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace detail

/// Runs the workload's carbon-aware optimizer against `signals`.
inline DecisionTrace optimize(const Workload& workload, const SignalMap& signals) {
    return std::visit(
        detail::Overloaded{
            [&](const SpatialWorkload& w) -> DecisionTrace {
                return route_requests(w.sites, w.dcs, signals, w.options);
            },
            [&](const TemporalWorkload& w) -> DecisionTrace {
                const auto& sig = detail::single_region_signal(signals, w.region_id);
                StartTimes out;
                for (const auto& job : w.jobs) out.starts.push_back(schedule_job(job, sig));
                return out;
            },
            [&](const AutoscaleWorkload& w) -> DecisionTrace {
                const auto& sig = detail::single_region_signal(signals, w.region_id);
                AllocationSchedule out;
                for (const auto& job : w.jobs) out.plans.push_back(autoscale(job, sig));
                return out;
            },
        },
        workload);
}

/// The carbon-unaware decision. Reads no signal.
inline DecisionTrace baseline_decision(const Workload& workload) {
    return std::visit(detail::Overloaded{
                          [](const SpatialWorkload& w) -> DecisionTrace { return route_baseline(w.sites, w.dcs); },
                          [](const TemporalWorkload& w) -> DecisionTrace {
                              StartTimes out;
                              for (const auto& job : w.jobs) out.starts.push_back(schedule_baseline(job));
                              return out;
                          },
                          [](const AutoscaleWorkload& w) -> DecisionTrace {
                              AllocationSchedule out;
                              for (const auto& job : w.jobs) out.plans.push_back(autoscale_baseline(job));
                              return out;
                          },
                      },
                      workload);
}

inline EmissionsReport evaluate(const DecisionTrace& decision, const Workload& workload, const SignalMap& signals) {
    return std::visit(
        detail::Overloaded{
            [&](const SpatialWorkload& w) {
                const auto* routing = std::get_if<RoutingAssignment>(&decision);
                if (!routing) throw Error(ErrorCode::InvalidWorkload, "decision is not a routing assignment");
                return evaluate(*routing, w.dcs, signals);
            },
            [&](const TemporalWorkload& w) {
                const auto* starts = std::get_if<StartTimes>(&decision);
                if (!starts) throw Error(ErrorCode::InvalidWorkload, "decision is not a set of start times");
                return evaluate_schedule(w.jobs, starts->starts, detail::single_region_signal(signals, w.region_id));
            },
            [&](const AutoscaleWorkload& w) {
                const auto* sched = std::get_if<AllocationSchedule>(&decision);
                if (!sched) throw Error(ErrorCode::InvalidWorkload, "decision is not an allocation schedule");
                return evaluate_plans(w.jobs, sched->plans, detail::single_region_signal(signals, w.region_id));
            },
        },
        workload);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

enum class Method { lb, mb };

inline std::string_view method_name(Method m) { return m == Method::lb ? "lb" : "mb"; }

/// Location-based and market-based signals for the same regions.
struct SignalSets {
    SignalMap lb;
    SignalMap mb;
    double ppa_fraction = 0.0;

    const SignalMap& get(Method m) const { return m == Method::lb ? lb : mb; }
};

/// CI_lb, and CI_mb = (1 - f) * CI_res with fraction p contracted on every
/// PPA-eligible source, for each region.
inline SignalSets build_signals(std::span<const GenerationSeries> series_set, const SourceTable& sources, double p,
                                ConsumerProfile consumer = {},
                                DegeneratePolicy policy = DegeneratePolicy::error) {
    const auto ppa = uniform_portfolio(sources, p);
    SignalSets out;
    out.ppa_fraction = p;
    for (const auto& series : series_set) {
        const auto valid = validate_series(series, sources);
        out.lb.insert_or_assign(series.region_id, ci_lb(valid, sources));
        out.mb.insert_or_assign(series.region_id, ci_mb(ci_res(valid, sources, ppa, policy), consumer));
    }
    return out;
}

struct ScenarioResult {
    Technique technique = Technique::temporal;
    std::string region_id;
    Method opt_method = Method::lb;
    Method eval_method = Method::lb;
    double ppa_fraction = 0.0;
    EmissionsReport baseline;
    EmissionsReport optimized;
    double savings_pct = 0.0;
    double per_kwh_savings_pct = 0.0;
    DecisionTrace decision;
};

inline double savings_percent(double baseline, double optimized) {
    if (baseline == 0.0) {
        if (optimized == 0.0) return 0.0;
        throw Error(ErrorCode::ZeroBaselineEmissions, "baseline emits nothing, savings are undefined");
    }
    return 100.0 * (baseline - optimized) / baseline;
}

inline std::string workload_label(const Workload& w) {
    if (const auto* t = std::get_if<TemporalWorkload>(&w)) return t->region_id;
    if (const auto* a = std::get_if<AutoscaleWorkload>(&w)) return a->region_id;
    return "all";
}

/// Scores the optimized decision against the carbon-unaware baseline, both
/// evaluated under `eval_signals`.
inline ScenarioResult score_decision(const Workload& workload, DecisionTrace decision, const SignalMap& eval_signals,
                                     Method opt, Method eval, double ppa_fraction) {
    ScenarioResult r;
    r.technique = technique_of(workload);
    r.region_id = workload_label(workload);
    r.opt_method = opt;
    r.eval_method = eval;
    r.ppa_fraction = ppa_fraction;
    r.baseline = evaluate(baseline_decision(workload), workload, eval_signals);
    r.optimized = evaluate(decision, workload, eval_signals);
    r.savings_pct = savings_percent(r.baseline.total_g, r.optimized.total_g);
    r.per_kwh_savings_pct = savings_percent(r.baseline.per_kwh, r.optimized.per_kwh);
    r.decision = std::move(decision);
    return r;
}

inline ScenarioResult run_scenario(const Workload& workload, const SignalSets& signals, Method opt, Method eval) {
    return score_decision(workload, optimize(workload, signals.get(opt)), signals.get(eval), opt, eval,
                          signals.ppa_fraction);
}

inline ScenarioResult run_scenario(const Workload& workload, std::span<const GenerationSeries> series_set,
                                   const SourceTable& sources, double p, Method opt, Method eval,
                                   ConsumerProfile consumer = {},
                                   DegeneratePolicy policy = DegeneratePolicy::error) {
    return run_scenario(workload, build_signals(series_set, sources, p, consumer, policy), opt, eval);
}

struct DiscrepancyRecord {
    std::string region_id;
    double ppa_fraction = 0.0;
    double discrepancy_pp = 0.0;
};

/// Savings claimed under location-based evaluation minus savings under
/// market-based evaluation of the same decisions, in percentage points.
inline DiscrepancyRecord discrepancy(const ScenarioResult& lb_lb, const ScenarioResult& lb_mb) {
    if (lb_lb.opt_method != Method::lb || lb_lb.eval_method != Method::lb)
        throw Error(ErrorCode::MismatchedScenarios, "first scenario must be OPT_lb/EVAL_lb");
    if (lb_mb.opt_method != Method::lb || lb_mb.eval_method != Method::mb)
        throw Error(ErrorCode::MismatchedScenarios, "second scenario must be OPT_lb/EVAL_mb");
    if (lb_lb.technique != lb_mb.technique || lb_lb.region_id != lb_mb.region_id ||
        lb_lb.ppa_fraction != lb_mb.ppa_fraction)
        throw Error(ErrorCode::MismatchedScenarios, "scenarios differ in technique, region or PPA fraction");
    if (!(lb_lb.decision == lb_mb.decision))
        throw Error(ErrorCode::MismatchedScenarios, "scenarios were produced by different decisions");
    return DiscrepancyRecord{lb_lb.region_id, lb_lb.ppa_fraction, lb_lb.savings_pct - lb_mb.savings_pct};
}

struct ScenarioMatrix {
    ScenarioResult lb_lb;
    ScenarioResult lb_mb;
    ScenarioResult mb_mb;
    DiscrepancyRecord discrepancy;
};

/// The three cells share one OPT_lb decision between EVAL_lb and EVAL_mb.
inline ScenarioMatrix run_matrix(const Workload& workload, const SignalSets& signals) {
    ScenarioMatrix m;
    auto lb_decision = optimize(workload, signals.lb);
    m.lb_lb = score_decision(workload, lb_decision, signals.lb, Method::lb, Method::lb, signals.ppa_fraction);
    m.lb_mb = score_decision(workload, std::move(lb_decision), signals.mb, Method::lb, Method::mb,
                             signals.ppa_fraction);
    m.mb_mb = run_scenario(workload, signals, Method::mb, Method::mb);
    m.discrepancy = discrepancy(m.lb_lb, m.lb_mb);
    return m;
}

struct SweepRow {
    double fraction = 0.0;
    ScenarioMatrix cells;
};

struct SweepTable {
    Technique technique = Technique::temporal;
    std::string region_id;
    std::vector<SweepRow> rows;
};

inline SweepTable ppa_sweep(const Workload& workload, std::span<const GenerationSeries> series_set,
                            const SourceTable& sources, std::span<const double> fractions,
                            ConsumerProfile consumer = {}, DegeneratePolicy policy = DegeneratePolicy::error) {
    for (double p : fractions) check_fraction(p, "sweep fraction");
    SweepTable table;
    table.technique = technique_of(workload);
    table.region_id = workload_label(workload);
    for (double p : fractions)
        table.rows.push_back(SweepRow{p, run_matrix(workload, build_signals(series_set, sources, p, consumer, policy))});
    return table;
}

// ---------------------------------------------------------------------------
// Empirical CDFs
// ---------------------------------------------------------------------------

struct CdfPoint {
    double value = 0.0;
    double cumulative = 0.0;
};

struct CdfSummary {
    std::vector<CdfPoint> points;  // ascending, ties merged
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

inline CdfSummary empirical_cdf(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "CDF of an empty collection");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    CdfSummary out;
    out.count = sorted.size();
    const double n = static_cast<double>(sorted.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        sum += sorted[i];
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.points.push_back(CdfPoint{sorted[i], static_cast<double>(i + 1) / n});
    }
    out.mean = sum / n;
    out.max = sorted.back();
    return out;
}

/// CDFs over regions, aggregating each region's records by their mean and
/// by their maximum.
struct RegionCdf {
    CdfSummary per_region_mean;
    CdfSummary per_region_max;
};

inline RegionCdf region_cdf(std::span<const DiscrepancyRecord> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no discrepancy records");
    std::map<std::string, std::vector<double>> by_region;
    for (const auto& r : records) by_region[r.region_id].push_back(r.discrepancy_pp);
    std::vector<double> means, maxima;
    for (const auto& [region, values] : by_region) {
        double sum = 0.0;
        for (double v : values) sum += v;
        means.push_back(sum / static_cast<double>(values.size()));
        maxima.push_back(*std::max_element(values.begin(), values.end()));
    }
    return RegionCdf{empirical_cdf(means), empirical_cdf(maxima)};
}

}  // namespace gridci
