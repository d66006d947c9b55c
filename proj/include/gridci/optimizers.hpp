#pragma once

// Carbon-aware spatial routing, temporal shifting, and resource autoscaling,
// each with its carbon-unaware baseline. Optimizers take whatever signal they
// are handed, so the same code serves location-based and market-based runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridci/attribution.hpp"
#include "gridci/error.hpp"

namespace gridci {

using SignalMap = std::map<std::string, CarbonSignal, std::less<>>;

// ---------------------------------------------------------------------------
// Spatial routing
// ---------------------------------------------------------------------------

/// Weight of carbon intensity in the routing score; distance gets the rest.
inline constexpr double kDefaultCarbonWeight = 0.67;

struct DataCenter {
    std::string dc_id;
    std::string region_id;
    double per_request_energy_kwh = 1.0;
};

struct ClientSite {
    std::string site_id;
    std::map<std::string, double, std::less<>> distance;  // dc_id -> distance
    std::vector<double> hourly_requests;
};

struct Route {
    std::string dc_id;
    double requests = 0.0;
    bool operator==(const Route&) const = default;
};

/// hours[t][s] is where site s sends its requests during hour t.
struct RoutingAssignment {
    std::vector<std::string> site_ids;
    std::vector<std::vector<Route>> hours;
    bool operator==(const RoutingAssignment&) const = default;
};

struct RoutingOptions {
    double alpha = kDefaultCarbonWeight;
    std::optional<double> latency_cap;
};

namespace detail {

inline std::size_t check_routing_inputs(std::span<const ClientSite> sites, std::span<const DataCenter> dcs) {
    if (dcs.empty()) throw Error(ErrorCode::InvalidWorkload, "no data centers");
    if (sites.empty()) throw Error(ErrorCode::InvalidWorkload, "no client sites");
    for (std::size_t i = 0; i < dcs.size(); ++i) {
        if (!(dcs[i].per_request_energy_kwh > 0.0) || !std::isfinite(dcs[i].per_request_energy_kwh))
            throw Error(ErrorCode::InvalidWorkload, "data center '" + dcs[i].dc_id + "' needs positive energy per request");
        for (std::size_t j = 0; j < i; ++j)
            if (dcs[i].dc_id == dcs[j].dc_id)
                throw Error(ErrorCode::InvalidWorkload, "duplicate data center '" + dcs[i].dc_id + "'");
    }
    const std::size_t hours = sites.front().hourly_requests.size();
    for (const auto& site : sites) {
        if (site.hourly_requests.size() != hours)
            throw Error(ErrorCode::LengthMismatch, "site '" + site.site_id + "' request trace length differs");
        for (double r : site.hourly_requests)
            if (!std::isfinite(r) || r < 0.0)
                throw Error(ErrorCode::InvalidWorkload, "site '" + site.site_id + "' has a negative request count");
        for (const auto& dc : dcs) {
            auto it = site.distance.find(dc.dc_id);
            if (it == site.distance.end())
                throw Error(ErrorCode::InvalidWorkload,
                            "site '" + site.site_id + "' has no distance to '" + dc.dc_id + "'");
            if (!std::isfinite(it->second) || it->second < 0.0)
                throw Error(ErrorCode::InvalidWorkload, "site '" + site.site_id + "' has a negative distance");
        }
    }
    return hours;
}

// Closest first, then lexicographic id.
inline bool closer(const ClientSite& site, const DataCenter& a, const DataCenter& b) {
    const double da = site.distance.find(a.dc_id)->second;
    const double db = site.distance.find(b.dc_id)->second;
    if (da != db) return da < db;
    return a.dc_id < b.dc_id;
}

inline double normalize(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }

}  // namespace detail

inline const CarbonSignal& signal_for(const SignalMap& signals, std::string_view region, std::size_t hours) {
    auto it = signals.find(region);
    if (it == signals.end())
        throw Error(ErrorCode::MissingSignal, "no carbon signal for region '" + std::string(region) + "'");
    if (it->second.size() != hours)
        throw Error(ErrorCode::SignalSpanMismatch, "signal for '" + std::string(region) + "' has " +
                                                       std::to_string(it->second.size()) + " hours, expected " +
                                                       std::to_string(hours));
    return it->second;
}

/// Per (hour, site): argmin of alpha * CI + (1 - alpha) * distance, both
/// min-max normalized over the eligible data centers.
inline RoutingAssignment route_requests(std::span<const ClientSite> sites, std::span<const DataCenter> dcs,
                                        const SignalMap& signals, const RoutingOptions& options = {}) {
    const std::size_t hours = detail::check_routing_inputs(sites, dcs);
    if (!(options.alpha >= 0.0 && options.alpha <= 1.0))
        throw Error(ErrorCode::InvalidWorkload, "alpha must lie in [0, 1]");
    std::vector<const CarbonSignal*> dc_signal;
    for (const auto& dc : dcs) dc_signal.push_back(&signal_for(signals, dc.region_id, hours));

    std::vector<std::vector<std::size_t>> eligible(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s) {
        for (std::size_t i = 0; i < dcs.size(); ++i) {
            const double d = sites[s].distance.find(dcs[i].dc_id)->second;
            if (!options.latency_cap || d <= *options.latency_cap) eligible[s].push_back(i);
        }
        if (eligible[s].empty())
            throw Error(ErrorCode::NoEligibleDc, "latency cap excludes every data center for site '" +
                                                     sites[s].site_id + "'");
    }

    RoutingAssignment out;
    for (const auto& site : sites) out.site_ids.push_back(site.site_id);
    out.hours.resize(hours);
    for (std::size_t t = 0; t < hours; ++t) {
        out.hours[t].reserve(sites.size());
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const auto& site = sites[s];
            double ci_lo = std::numeric_limits<double>::infinity(), ci_hi = -ci_lo;
            double d_lo = ci_lo, d_hi = -ci_lo;
            for (std::size_t i : eligible[s]) {
                const double ci = (*dc_signal[i])[t];
                const double d = site.distance.find(dcs[i].dc_id)->second;
                ci_lo = std::min(ci_lo, ci);
                ci_hi = std::max(ci_hi, ci);
                d_lo = std::min(d_lo, d);
                d_hi = std::max(d_hi, d);
            }
            std::size_t best = eligible[s].front();
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t i : eligible[s]) {
                const double ci = (*dc_signal[i])[t];
                const double d = site.distance.find(dcs[i].dc_id)->second;
                const double score = options.alpha * detail::normalize(ci, ci_lo, ci_hi) +
                                     (1.0 - options.alpha) * detail::normalize(d, d_lo, d_hi);
                if (score < best_score || (score == best_score && detail::closer(site, dcs[i], dcs[best]))) {
                    best = i;
                    best_score = score;
                }
            }
            out.hours[t].push_back(Route{dcs[best].dc_id, site.hourly_requests[t]});
        }
    }
    return out;
}

/// Every request goes to its closest data center.
inline RoutingAssignment route_baseline(std::span<const ClientSite> sites, std::span<const DataCenter> dcs) {
    const std::size_t hours = detail::check_routing_inputs(sites, dcs);
    RoutingAssignment out;
    std::vector<std::size_t> nearest(sites.size(), 0);
    for (std::size_t s = 0; s < sites.size(); ++s) {
        out.site_ids.push_back(sites[s].site_id);
        for (std::size_t i = 1; i < dcs.size(); ++i)
            if (detail::closer(sites[s], dcs[i], dcs[nearest[s]])) nearest[s] = i;
    }
    out.hours.resize(hours);
    for (std::size_t t = 0; t < hours; ++t)
        for (std::size_t s = 0; s < sites.size(); ++s)
            out.hours[t].push_back(Route{dcs[nearest[s]].dc_id, sites[s].hourly_requests[t]});
    return out;
}

// ---------------------------------------------------------------------------
// Temporal shifting
// ---------------------------------------------------------------------------

/// Nightly jobs nominally start at 01:00 and may move up to 8 hours either way.
inline constexpr std::size_t kNightlyStartHour = 1;
inline constexpr std::size_t kDefaultFlexibilityHours = 8;

/// A non-preemptible job of `duration` hours drawing `power_kw` while running.
struct TemporalJob {
    std::size_t nominal_start = kNightlyStartHour;
    std::size_t duration = 1;
    std::size_t flexibility = kDefaultFlexibilityHours;
    double power_kw = 1.0;
};

struct StartWindow {
    std::size_t first;
    std::size_t last;  // inclusive
};

inline StartWindow feasible_starts(const TemporalJob& job, std::size_t hours) {
    if (job.duration == 0) throw Error(ErrorCode::InvalidWorkload, "job duration must be at least one hour");
    if (!(job.power_kw > 0.0)) throw Error(ErrorCode::InvalidWorkload, "job power must be positive");
    if (job.duration > hours) throw Error(ErrorCode::EmptyWindow, "job longer than the signal");
    const std::size_t latest_possible = hours - job.duration;
    const std::size_t first = job.nominal_start > job.flexibility ? job.nominal_start - job.flexibility : 0;
    const std::size_t last = std::min(latest_possible, job.nominal_start + job.flexibility);
    if (first > last)
        throw Error(ErrorCode::EmptyWindow, "no feasible start around hour " + std::to_string(job.nominal_start));
    return {first, last};
}

/// Start hour minimizing mean CI over the job's run; ties go to the start
/// closest to nominal, then the earlier one.
inline std::size_t schedule_job(const TemporalJob& job, const CarbonSignal& signal) {
    const auto window = feasible_starts(job, signal.size());
    auto distance = [&](std::size_t s) { return s > job.nominal_start ? s - job.nominal_start : job.nominal_start - s; };
    std::size_t best = window.first;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t s = window.first; s <= window.last; ++s) {
        double sum = 0.0;
        for (std::size_t t = s; t < s + job.duration; ++t) sum += signal[t];
        if (sum < best_sum || (sum == best_sum && distance(s) < distance(best))) {
            best = s;
            best_sum = sum;
        }
    }
    return best;
}

inline std::size_t schedule_baseline(const TemporalJob& job) { return job.nominal_start; }

/// One job per day nominally at `hour_of_day`, keeping only days whose
/// nominal run fits inside `hours`.
inline std::vector<TemporalJob> daily_jobs(std::size_t hours, std::size_t hour_of_day, std::size_t duration,
                                           std::size_t flexibility, double power_kw) {
    std::vector<TemporalJob> jobs;
    for (std::size_t day = 0; day * 24 + hour_of_day + duration <= hours; ++day)
        jobs.push_back(TemporalJob{day * 24 + hour_of_day, duration, flexibility, power_kw});
    return jobs;
}

// ---------------------------------------------------------------------------
// Resource autoscaling
// ---------------------------------------------------------------------------

inline constexpr double kDefaultAutoscaleWork = 24.0;
inline constexpr int kDefaultMaxInstances = 8;
inline constexpr std::size_t kDefaultDeadlineHours = 24;

/// Interruptible job that must complete `work` units between release and
/// deadline. throughput[a] is the work rate with a instances; empty means
/// linear (one unit per instance-hour).
struct AutoscaleJob {
    std::size_t release = 0;
    std::size_t deadline = kDefaultDeadlineHours;
    double work = kDefaultAutoscaleWork;
    int max_instances = kDefaultMaxInstances;
    double per_instance_power_kw = 1.0;
    std::vector<double> throughput;

    double rate(int instances) const {
        return throughput.empty() ? static_cast<double>(instances) : throughput[static_cast<std::size_t>(instances)];
    }
};

/// instances[i] is the allocation during hour release + i.
struct AllocationPlan {
    std::size_t release = 0;
    std::vector<int> instances;
    bool operator==(const AllocationPlan&) const = default;
};

inline double work_done(const AllocationPlan& plan, const AutoscaleJob& job) {
    double done = 0.0;
    for (int a : plan.instances) done += job.rate(a);
    return done;
}

inline void check_autoscale_job(const AutoscaleJob& job) {
    if (job.deadline < job.release) throw Error(ErrorCode::InvalidWorkload, "deadline precedes release");
    if (job.max_instances < 1) throw Error(ErrorCode::InvalidWorkload, "max_instances must be positive");
    if (!(job.per_instance_power_kw > 0.0) || !std::isfinite(job.per_instance_power_kw))
        throw Error(ErrorCode::InvalidWorkload, "per-instance power must be positive");
    if (!std::isfinite(job.work) || job.work < 0.0) throw Error(ErrorCode::InvalidWorkload, "work must be >= 0");
    if (!job.throughput.empty()) {
        if (job.throughput.size() != static_cast<std::size_t>(job.max_instances) + 1)
            throw Error(ErrorCode::InvalidWorkload, "throughput profile needs max_instances + 1 entries");
        if (job.throughput[0] != 0.0) throw Error(ErrorCode::InvalidWorkload, "throughput with zero instances must be 0");
        for (std::size_t a = 1; a < job.throughput.size(); ++a)
            if (!std::isfinite(job.throughput[a]) || job.throughput[a] < job.throughput[a - 1])
                throw Error(ErrorCode::InvalidWorkload, "throughput profile must be non-decreasing");
    }
}

namespace detail {

inline bool is_linear_profile(const AutoscaleJob& job) {
    if (job.throughput.empty()) return true;
    const double unit = job.throughput[1];
    for (int a = 0; a <= job.max_instances; ++a)
        if (job.throughput[static_cast<std::size_t>(a)] != a * unit) return false;
    return unit > 0.0;
}

// Linear profile: cheapest hours get max_instances until less than one full
// hour of work remains; the next cheapest hour gets the fewest instances
// that finish the job.
inline std::vector<int> greedy_linear(const AutoscaleJob& job, std::span<const double> ci) {
    std::vector<std::size_t> order(ci.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ci[a] < ci[b]; });
    std::vector<int> plan(ci.size(), 0);
    const double full = job.rate(job.max_instances);
    double remaining = job.work;
    for (std::size_t h : order) {
        if (remaining <= 0.0) break;
        if (remaining >= full) {
            plan[h] = job.max_instances;
            remaining -= full;
            continue;
        }
        int a = 1;
        while (job.rate(a) < remaining) ++a;
        plan[h] = a;
        remaining -= job.rate(a);
    }
    return plan;
}

// General non-decreasing profile: exact minimum-cost cover by dynamic
// programming over hours, keeping only Pareto-optimal (work, cost) states.
// Work is capped at the target so every finishing state collapses to one
// work level.
inline std::vector<int> pareto_cover(const AutoscaleJob& job, std::span<const double> ci) {
    struct Node {
        double work;
        double cost;
        std::size_t parent;
        int instances;
    };
    std::vector<std::vector<Node>> layers(ci.size() + 1);
    layers[0].push_back(Node{0.0, 0.0, 0, 0});
    for (std::size_t h = 0; h < ci.size(); ++h) {
        std::vector<Node> next;
        const auto& prev = layers[h];
        for (std::size_t p = 0; p < prev.size(); ++p) {
            for (int a = 0; a <= job.max_instances; ++a) {
                const double w = std::min(prev[p].work + job.rate(a), job.work);
                const double c = prev[p].cost + a * job.per_instance_power_kw * ci[h];
                next.push_back(Node{w, c, p, a});
            }
        }
        // Highest work first; equal work keeps the cheapest, earliest-generated.
        std::stable_sort(next.begin(), next.end(), [](const Node& x, const Node& y) {
            if (x.work != y.work) return x.work > y.work;
            return x.cost < y.cost;
        });
        std::vector<Node> frontier;
        double cheapest = std::numeric_limits<double>::infinity();
        for (const auto& n : next) {
            if (n.cost < cheapest) {
                frontier.push_back(n);
                cheapest = n.cost;
            }
        }
        layers[h + 1] = std::move(frontier);
    }
    const auto& last = layers.back();
    // Frontier is sorted by work descending, so a finishing state is first.
    if (last.empty() || last.front().work < job.work)
        throw Error(ErrorCode::InfeasibleDeadline, "work cannot be completed before the deadline");
    std::vector<int> plan(ci.size(), 0);
    std::size_t idx = 0;
    for (std::size_t h = ci.size(); h > 0; --h) {
        const Node& n = layers[h][idx];
        plan[h - 1] = n.instances;
        idx = n.parent;
    }
    return plan;
}

}  // namespace detail

/// Emissions-minimizing allocation for the given signal.
inline AllocationPlan autoscale(const AutoscaleJob& job, const CarbonSignal& signal) {
    check_autoscale_job(job);
    if (job.deadline > signal.size())
        throw Error(ErrorCode::SignalSpanMismatch, "deadline " + std::to_string(job.deadline) +
                                                       " lies beyond the signal's " + std::to_string(signal.size()) +
                                                       " hours");
    const std::size_t window = job.deadline - job.release;
    if (static_cast<double>(window) * job.rate(job.max_instances) < job.work)
        throw Error(ErrorCode::InfeasibleDeadline, "work exceeds what max_instances can finish before the deadline");
    AllocationPlan plan;
    plan.release = job.release;
    if (job.work == 0.0) {
        plan.instances.assign(window, 0);
        return plan;
    }
    std::span<const double> ci(signal.values.data() + job.release, window);
    plan.instances = detail::is_linear_profile(job) ? detail::greedy_linear(job, ci) : detail::pareto_cover(job, ci);
    return plan;
}

/// One instance from release until the work is done.
inline AllocationPlan autoscale_baseline(const AutoscaleJob& job) {
    check_autoscale_job(job);
    const std::size_t window = job.deadline - job.release;
    AllocationPlan plan;
    plan.release = job.release;
    plan.instances.assign(window, 0);
    double done = 0.0;
    for (std::size_t i = 0; i < window && done < job.work; ++i) {
        plan.instances[i] = 1;
        done += job.rate(1);
    }
    if (done < job.work)
        throw Error(ErrorCode::InfeasibleDeadline, "a single instance cannot finish before the deadline");
    return plan;
}

/// Jobs released daily at `hour_of_day` with a 24-hour deadline, for every
/// day whose deadline fits inside `hours`.
inline std::vector<AutoscaleJob> daily_autoscale_jobs(std::size_t hours, std::size_t hour_of_day,
                                                      const AutoscaleJob& prototype) {
    std::vector<AutoscaleJob> jobs;
    const std::size_t span = prototype.deadline - prototype.release;
    for (std::size_t day = 0; day * 24 + hour_of_day + span <= hours; ++day) {
        AutoscaleJob job = prototype;
        job.release = day * 24 + hour_of_day;
        job.deadline = job.release + span;
        jobs.push_back(std::move(job));
    }
    return jobs;
}

}  // namespace gridci
