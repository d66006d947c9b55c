#pragma once

// Location-based, residual-mix, and market-based carbon intensity, and
// summaries of how far the residual signal drifts from the location-based one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridci/error.hpp"
#include "gridci/grid.hpp"

namespace gridci {

enum class Attribution { location_based, residual, market_based };

inline std::string_view attribution_name(Attribution a) {
    switch (a) {
    case Attribution::location_based: return "location_based";
    case Attribution::residual: return "residual";
    case Attribution::market_based: return "market_based";
    }
    return "unknown";
}

/// Residual denominators at or below this many MWh count as degenerate.
inline constexpr double kDegenerateResidualMwh = 1e-9;

enum class DegeneratePolicy { error, clamp_zero };

/// Hourly carbon intensity (g/kWh) for one region under one attribution.
struct CarbonSignal {
    std::string region_id;
    Timestamp start{};
    Attribution method = Attribution::location_based;
    double consumer_f = 0.0;  // market_based only
    std::vector<double> values;
    PpaPortfolio ppa;                          // empty for location_based
    std::vector<std::size_t> degenerate_hours;  // clamped residual hours

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t t) const { return values[t]; }
};

/// Builds a signal from raw values, e.g. a trace obtained from a carbon
/// information service. Values must be finite and non-negative.
inline CarbonSignal make_signal(std::string region_id, std::vector<double> values,
                                Attribution method = Attribution::location_based) {
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (!std::isfinite(values[t]) || values[t] < 0.0)
            throw Error(ErrorCode::NonFiniteValue, "carbon intensity at hour " + std::to_string(t) +
                                                       " must be finite and non-negative");
    }
    CarbonSignal s;
    s.region_id = std::move(region_id);
    s.method = method;
    s.values = std::move(values);
    return s;
}

namespace detail {

struct HourMix {
    double emissions = 0.0;  // MWh * g/kWh
    double energy = 0.0;     // MWh
};

inline std::vector<double> cef_column(const GenerationSeries& series, const SourceTable& sources) {
    std::vector<double> cefs;
    cefs.reserve(series.per_source.size());
    for (const auto& [name, values] : series.per_source) cefs.push_back(lookup_source(sources, name).cef_g_per_kwh);
    return cefs;
}

inline HourMix total_mix(const GenerationSeries& series, std::span<const double> cefs, std::size_t t) {
    HourMix mix;
    std::size_t i = 0;
    for (const auto& [name, values] : series.per_source) {
        mix.emissions += values[t] * cefs[i++];
        mix.energy += values[t];
    }
    return mix;
}

inline HourMix residual_hour_mix(const GenerationSeries& series, std::span<const double> cefs,
                                 std::span<const double> fractions, std::size_t t) {
    HourMix mix;
    std::size_t i = 0;
    for (const auto& [name, values] : series.per_source) {
        const double remaining = values[t] - fractions[i] * values[t];
        mix.emissions += remaining * cefs[i];
        mix.energy += remaining;
        ++i;
    }
    return mix;
}

inline std::vector<double> fraction_column(const GenerationSeries& series, const PpaPortfolio& ppa) {
    std::vector<double> fr;
    fr.reserve(series.per_source.size());
    for (const auto& [name, values] : series.per_source) fr.push_back(ppa.fraction(name));
    return fr;
}

}  // namespace detail

/// Generation-weighted average CEF of the full grid mix, hour by hour.
inline CarbonSignal ci_lb(const GenerationSeries& series, const SourceTable& sources) {
    check_series_shape(series);
    const auto cefs = detail::cef_column(series, sources);
    CarbonSignal out;
    out.region_id = series.region_id;
    out.start = series.start;
    out.method = Attribution::location_based;
    out.values.resize(series.hours());
    for (std::size_t t = 0; t < series.hours(); ++t) {
        const auto mix = detail::total_mix(series, cefs, t);
        if (mix.energy <= 0.0)
            throw Error(ErrorCode::ZeroTotalGeneration,
                        "region '" + series.region_id + "' has no generation at hour " + std::to_string(t));
        out.values[t] = mix.emissions / mix.energy;
    }
    return out;
}

/// The generation left after removing each source's contracted share.
inline GenerationSeries residual_mix(const GenerationSeries& series, const PpaPortfolio& ppa) {
    GenerationSeries out = series;
    for (auto& [name, values] : out.per_source) {
        const double p = ppa.fraction(name);
        for (auto& v : values) v = v - p * v;
    }
    return out;
}

inline CarbonSignal ci_res(const GenerationSeries& series, const SourceTable& sources, const PpaPortfolio& ppa,
                           DegeneratePolicy policy = DegeneratePolicy::error) {
    check_series_shape(series);
    validate_portfolio(ppa, sources);
    const auto cefs = detail::cef_column(series, sources);
    const auto fractions = detail::fraction_column(series, ppa);
    CarbonSignal out;
    out.region_id = series.region_id;
    out.start = series.start;
    out.method = Attribution::residual;
    out.ppa = ppa;
    out.values.resize(series.hours());
    for (std::size_t t = 0; t < series.hours(); ++t) {
        const auto mix = detail::residual_hour_mix(series, cefs, fractions, t);
        if (mix.energy <= kDegenerateResidualMwh) {
            if (policy == DegeneratePolicy::error)
                throw Error(ErrorCode::DegenerateResidualHour, "region '" + series.region_id +
                                                                   "' has no residual generation at hour " +
                                                                   std::to_string(t));
            out.values[t] = 0.0;
            out.degenerate_hours.push_back(t);
            continue;
        }
        out.values[t] = mix.emissions / mix.energy;
    }
    return out;
}

/// Market-based intensity seen by a consumer whose own PPAs cover a share f
/// of its demand: (1 - f) times the residual intensity.
inline CarbonSignal ci_mb(const CarbonSignal& residual, ConsumerProfile consumer) {
    if (residual.method != Attribution::residual)
        throw Error(ErrorCode::WrongInputMethod, "ci_mb needs a residual signal, got " +
                                                     std::string(attribution_name(residual.method)));
    check_fraction(consumer.f, "consumer PPA share f");
    CarbonSignal out = residual;
    out.method = Attribution::market_based;
    out.consumer_f = consumer.f;
    for (auto& v : out.values) v = (1.0 - consumer.f) * v;
    return out;
}

// ---------------------------------------------------------------------------
// Divergence statistics
// ---------------------------------------------------------------------------

enum class Grouping { overall, hour_of_day, month, region };

inline std::string_view grouping_name(Grouping g) {
    switch (g) {
    case Grouping::overall: return "overall";
    case Grouping::hour_of_day: return "hour_of_day";
    case Grouping::month: return "month";
    case Grouping::region: return "region";
    }
    return "unknown";
}

struct GroupStats {
    std::string key;
    std::size_t hours = 0;        // non-degenerate hours in the group
    std::size_t ratio_hours = 0;  // of which CI_lb > 0
    double mean_increase_pct = 0.0;
    double median_increase_pct = 0.0;
    double max_increase_pct = 0.0;
    double mean_ci_lb = 0.0;
    double mean_ci_res = 0.0;
    double mean_gap = 0.0;  // mean of CI_res - CI_lb, g/kWh
};

struct DivergenceSummary {
    Grouping grouping = Grouping::overall;
    std::vector<GroupStats> groups;   // ordered by key
    std::size_t degenerate_hours = 0;  // no residual generation; excluded
    std::size_t zero_lb_hours = 0;     // CI_lb = 0; excluded from ratios only
};

inline double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline std::string group_key(Grouping g, const GenerationSeries& series, std::size_t t) {
    char buf[8];
    switch (g) {
    case Grouping::overall: return "all";
    case Grouping::hour_of_day:
        std::snprintf(buf, sizeof buf, "%02d", utc_hour_of_day(series.time_at(t)));
        return buf;
    case Grouping::month:
        std::snprintf(buf, sizeof buf, "%02u", utc_month(series.time_at(t)));
        return buf;
    case Grouping::region: return series.region_id;
    }
    return "all";
}

/// Per-group statistics of 100 * (CI_res - CI_lb) / CI_lb, averaged over
/// hours (not a ratio of averages).
inline DivergenceSummary divergence(std::span<const GenerationSeries> series_set, const SourceTable& sources,
                                    const PpaPortfolio& ppa, Grouping grouping) {
    validate_portfolio(ppa, sources);
    struct Acc {
        std::vector<double> increases;
        double sum_lb = 0.0, sum_res = 0.0;
        std::size_t hours = 0;
    };
    std::map<std::string, Acc> acc;
    DivergenceSummary out;
    out.grouping = grouping;

    for (const auto& series : series_set) {
        check_series_shape(series);
        const auto cefs = detail::cef_column(series, sources);
        const auto fractions = detail::fraction_column(series, ppa);
        for (std::size_t t = 0; t < series.hours(); ++t) {
            const auto total = detail::total_mix(series, cefs, t);
            const auto resid = detail::residual_hour_mix(series, cefs, fractions, t);
            if (total.energy <= 0.0 || resid.energy <= kDegenerateResidualMwh) {
                ++out.degenerate_hours;
                continue;
            }
            const double lb = total.emissions / total.energy;
            const double res = resid.emissions / resid.energy;
            auto& a = acc[group_key(grouping, series, t)];
            ++a.hours;
            a.sum_lb += lb;
            a.sum_res += res;
            if (lb > 0.0) {
                a.increases.push_back(100.0 * (res - lb) / lb);
            } else {
                ++out.zero_lb_hours;
            }
        }
    }

    std::size_t ratio_total = 0;
    for (auto& [key, a] : acc) {
        GroupStats g;
        g.key = key;
        g.hours = a.hours;
        g.ratio_hours = a.increases.size();
        g.mean_ci_lb = a.sum_lb / static_cast<double>(a.hours);
        g.mean_ci_res = a.sum_res / static_cast<double>(a.hours);
        g.mean_gap = g.mean_ci_res - g.mean_ci_lb;
        if (!a.increases.empty()) {
            double sum = 0.0;
            for (double v : a.increases) sum += v;
            g.mean_increase_pct = sum / static_cast<double>(a.increases.size());
            g.max_increase_pct = *std::max_element(a.increases.begin(), a.increases.end());
            g.median_increase_pct = median_of(std::move(a.increases));
        }
        ratio_total += g.ratio_hours;
        out.groups.push_back(std::move(g));
    }
    if (ratio_total == 0)
        throw Error(ErrorCode::EmptyAfterExclusion, "no hour with positive CI_lb and residual generation");
    return out;
}

}  // namespace gridci
