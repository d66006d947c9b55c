#pragma once

// Generation sources, hourly per-source generation series, and PPA portfolios.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridci/error.hpp"
#include "gridci/timeutil.hpp"

namespace gridci {

/// A generation technology and its carbon emission factor (g CO2-eq per kWh).
struct EnergySource {
    std::string name;
    double cef_g_per_kwh = 0.0;
    bool renewable = false;
    bool ppa_eligible = false;

    bool operator==(const EnergySource&) const = default;
};

using SourceTable = std::map<std::string, EnergySource, std::less<>>;

inline EnergySource make_source(std::string name, double cef, bool renewable, bool ppa_eligible) {
    if (!std::isfinite(cef)) throw Error(ErrorCode::NonFiniteValue, "CEF of '" + name + "' is not finite");
    if (cef < 0.0) throw Error(ErrorCode::NegativeCef, "CEF of '" + name + "' is negative");
    if (ppa_eligible && !renewable)
        throw Error(ErrorCode::InvalidSource, "'" + name + "' is PPA-eligible but not renewable");
    return EnergySource{std::move(name), cef, renewable, ppa_eligible};
}

inline void add_source(SourceTable& table, EnergySource source) {
    auto key = source.name;
    table.insert_or_assign(std::move(key), std::move(source));
}

/// Coal 760 g/kWh, natural gas 370 g/kWh, renewables zero. Only solar and
/// wind are PPA-eligible.
inline SourceTable default_sources() {
    SourceTable table;
    add_source(table, make_source("coal", 760.0, false, false));
    add_source(table, make_source("gas", 370.0, false, false));
    add_source(table, make_source("solar", 0.0, true, true));
    add_source(table, make_source("wind", 0.0, true, true));
    add_source(table, make_source("hydro", 0.0, true, false));
    add_source(table, make_source("geothermal", 0.0, true, false));
    return table;
}

inline const EnergySource& lookup_source(const SourceTable& table, std::string_view name) {
    auto it = table.find(name);
    if (it == table.end()) throw Error(ErrorCode::UnknownSource, "source '" + std::string(name) + "' is not declared");
    return it->second;
}

/// Hourly generation (MWh) per source for one region. All sequences share
/// one length; hour t starts at `start + t hours`.
struct GenerationSeries {
    std::string region_id;
    Timestamp start{};
    std::map<std::string, std::vector<double>, std::less<>> per_source;

    std::size_t hours() const { return per_source.empty() ? 0 : per_source.begin()->second.size(); }

    Timestamp time_at(std::size_t t) const { return start + static_cast<long>(t) * kHour; }

    double total(std::size_t t) const {
        double sum = 0.0;
        for (const auto& [name, values] : per_source) sum += values[t];
        return sum;
    }

    bool operator==(const GenerationSeries&) const = default;
};

// Shape-only checks that need no source table: equal lengths, finite and
// non-negative values, at least one hour.
inline void check_series_shape(const GenerationSeries& series) {
    if (series.per_source.empty())
        throw Error(ErrorCode::LengthMismatch, "region '" + series.region_id + "' has no sources");
    const std::size_t len = series.per_source.begin()->second.size();
    if (len == 0) throw Error(ErrorCode::LengthMismatch, "region '" + series.region_id + "' has zero hours");
    for (const auto& [name, values] : series.per_source) {
        if (values.size() != len)
            throw Error(ErrorCode::LengthMismatch, "source '" + name + "' has " + std::to_string(values.size()) +
                                                       " hours, expected " + std::to_string(len));
        for (std::size_t t = 0; t < values.size(); ++t) {
            if (!std::isfinite(values[t]))
                throw Error(ErrorCode::NonFiniteValue, "source '" + name + "' hour " + std::to_string(t));
            if (values[t] < 0.0)
                throw Error(ErrorCode::NegativeGeneration, "source '" + name + "' hour " + std::to_string(t));
        }
    }
}

/// Returns the series unchanged when every source is declared, lengths
/// match, and values are finite and non-negative.
inline GenerationSeries validate_series(GenerationSeries series, const SourceTable& sources) {
    for (const auto& [name, values] : series.per_source) lookup_source(sources, name);
    check_series_shape(series);
    return series;
}

/// Fraction p_i of each source's generation that is contracted through PPAs.
struct PpaPortfolio {
    std::map<std::string, double, std::less<>> fractions;

    double fraction(std::string_view source) const {
        auto it = fractions.find(source);
        return it == fractions.end() ? 0.0 : it->second;
    }

    bool empty() const {
        for (const auto& [name, p] : fractions)
            if (p != 0.0) return false;
        return true;
    }

    bool operator==(const PpaPortfolio&) const = default;
};

inline void check_fraction(double value, const std::string& what) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0)
        throw Error(ErrorCode::InvalidFraction, what + " must lie in [0, 1]");
}

inline PpaPortfolio validate_portfolio(PpaPortfolio ppa, const SourceTable& sources) {
    for (const auto& [name, p] : ppa.fractions) {
        check_fraction(p, "PPA fraction of '" + name + "'");
        const auto& src = lookup_source(sources, name);
        if (p != 0.0 && !src.ppa_eligible)
            throw Error(ErrorCode::InvalidPortfolio, "source '" + name + "' cannot be PPA-contracted");
    }
    return ppa;
}

/// The same contracted fraction on every PPA-eligible source.
inline PpaPortfolio uniform_portfolio(const SourceTable& sources, double p) {
    check_fraction(p, "PPA fraction");
    PpaPortfolio ppa;
    for (const auto& [name, src] : sources)
        if (src.ppa_eligible) ppa.fractions[name] = p;
    return ppa;
}

/// Fraction of a consumer's own demand covered by PPAs.
struct ConsumerProfile {
    double f = 0.0;
};

inline ConsumerProfile make_consumer(double f) {
    check_fraction(f, "consumer PPA share f");
    return ConsumerProfile{f};
}

}  // namespace gridci
