#pragma once

// CSV ingestion of generation and emission-factor tables, CSV output of
// generation series, and the seeded synthetic grid generator.
//
// Generation CSV:  timestamp,region,source,generation_mwh
//                  2022-01-01T00:00Z,CAISO,solar,1200.5
// CEF CSV:         source,cef_g_per_kwh,renewable,ppa_eligible
//                  coal,760,false,false

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gridci/error.hpp"
#include "gridci/grid.hpp"
#include "gridci/timeutil.hpp"

namespace gridci {

inline constexpr std::string_view kGenerationHeader = "timestamp,region,source,generation_mwh";
inline constexpr std::string_view kCefHeader = "source,cef_g_per_kwh,renewable,ppa_eligible";

namespace csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

[[noreturn]] inline void parse_error(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

inline double parse_number(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last)
        parse_error(line_no, "'" + std::string(field) + "' is not a number");
    return value;
}

inline bool parse_bool(std::string_view field, std::size_t line_no) {
    std::string lower(field);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "1" || lower == "yes") return true;
    if (lower == "false" || lower == "0" || lower == "no") return false;
    parse_error(line_no, "'" + std::string(field) + "' is not a boolean");
}

// Shortest representation that parses back to the same double.
inline std::string exact(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace csv

/// Reads generation rows and groups them into one validated-shape series
/// per region, ordered by region id. Every region must cover a contiguous
/// run of hours with every one of its sources present at every hour.
inline std::vector<GenerationSeries> load_generation_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    // region -> hour -> source -> MWh
    std::map<std::string, std::map<Timestamp, std::map<std::string, double, std::less<>>>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = csv::trim(line);
        if (text.empty()) continue;
        if (!have_header) {
            if (text != kGenerationHeader) csv::parse_error(line_no, "expected header '" + std::string(kGenerationHeader) + "'");
            have_header = true;
            continue;
        }
        const auto fields = csv::split(text);
        if (fields.size() != 4) csv::parse_error(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
        const auto ts = parse_utc_timestamp(fields[0]);
        if (!ts) csv::parse_error(line_no, "bad timestamp '" + std::string(fields[0]) + "'");
        if (!is_on_the_hour(*ts)) csv::parse_error(line_no, "timestamp is not on the hour");
        if (fields[1].empty() || fields[2].empty()) csv::parse_error(line_no, "empty region or source");
        const double value = csv::parse_number(fields[3], line_no);
        auto& by_source = rows[std::string(fields[1])][*ts];
        if (!by_source.emplace(std::string(fields[2]), value).second)
            throw Error(ErrorCode::DuplicateRow, "line " + std::to_string(line_no) + ": region '" +
                                                     std::string(fields[1]) + "', source '" + std::string(fields[2]) +
                                                     "' at " + format_utc_hour(*ts) + " appears twice");
    }
    if (!have_header) csv::parse_error(line_no, "missing header");

    std::vector<GenerationSeries> out;
    for (auto& [region, hours] : rows) {
        std::set<std::string, std::less<>> sources;
        for (const auto& [ts, by_source] : hours)
            for (const auto& [name, v] : by_source) sources.insert(name);
        GenerationSeries series;
        series.region_id = region;
        series.start = hours.begin()->first;
        for (const auto& name : sources) series.per_source[name].reserve(hours.size());
        Timestamp expected = series.start;
        for (const auto& [ts, by_source] : hours) {
            if (ts != expected)
                throw Error(ErrorCode::GapInSeries, "region '" + region + "' is missing hour " + format_utc_hour(expected));
            for (const auto& name : sources) {
                auto it = by_source.find(name);
                if (it == by_source.end())
                    throw Error(ErrorCode::GapInSeries,
                                "region '" + region + "' source '" + name + "' is missing hour " + format_utc_hour(ts));
                series.per_source[name].push_back(it->second);
            }
            expected += kHour;
        }
        check_series_shape(series);
        out.push_back(std::move(series));
    }
    return out;
}

inline std::vector<GenerationSeries> load_generation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return load_generation_csv(in);
}

inline void write_generation_csv(std::span<const GenerationSeries> series_set, std::ostream& out) {
    out << kGenerationHeader << '\n';
    std::vector<const GenerationSeries*> ordered;
    for (const auto& s : series_set) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->region_id < b->region_id; });
    for (const auto* s : ordered) {
        for (std::size_t t = 0; t < s->hours(); ++t) {
            const auto stamp = format_utc_hour(s->time_at(t));
            for (const auto& [name, values] : s->per_source)
                out << stamp << ',' << s->region_id << ',' << name << ',' << csv::exact(values[t]) << '\n';
        }
    }
}

inline std::string generation_csv(std::span<const GenerationSeries> series_set) {
    std::ostringstream os;
    write_generation_csv(series_set, os);
    return os.str();
}

/// Reads a source table. The header line is optional.
inline SourceTable load_cef_csv(std::istream& in) {
    SourceTable table;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = csv::trim(line);
        if (text.empty()) continue;
        const bool header_line = first && text.starts_with("source,");
        first = false;
        if (header_line) {
            if (text != kCefHeader) csv::parse_error(line_no, "expected header '" + std::string(kCefHeader) + "'");
            continue;
        }
        const auto fields = csv::split(text);
        if (fields.size() != 4) csv::parse_error(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
        if (fields[0].empty()) csv::parse_error(line_no, "empty source name");
        const double cef = csv::parse_number(fields[1], line_no);
        const bool renewable = csv::parse_bool(fields[2], line_no);
        const bool eligible = csv::parse_bool(fields[3], line_no);
        auto src = make_source(std::string(fields[0]), cef, renewable, eligible);
        if (table.contains(src.name))
            throw Error(ErrorCode::DuplicateRow, "line " + std::to_string(line_no) + ": source '" + src.name + "' repeated");
        add_source(table, std::move(src));
    }
    return table;
}

inline SourceTable load_cef_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return load_cef_csv(in);
}

inline void write_cef_csv(const SourceTable& table, std::ostream& out) {
    out << kCefHeader << '\n';
    for (const auto& [name, s] : table)
        out << name << ',' << csv::exact(s.cef_g_per_kwh) << ',' << (s.renewable ? "true" : "false") << ','
            << (s.ppa_eligible ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic grids
// ---------------------------------------------------------------------------

/// Parameters of a synthetic region. Magnitudes are MWh per hour.
struct SyntheticGridSpec {
    std::string region_id = "SYNTH";
    Timestamp start = *parse_utc_timestamp("2022-01-01T00:00Z");
    std::size_t days = 7;
    int utc_offset_hours = 0;  // local solar time = UTC + offset
    double baseload_coal = 0.0;
    double gas_base = 0.0;
    double gas_peaker_amplitude = 0.0;
    double solar_peak = 0.0;
    double wind_mean = 0.0;
    double wind_jitter = 0.0;
    std::uint64_t rng_seed = 1;
};

/// Solar-heavy grid with gas peakers and a small coal-fired import share.
inline SyntheticGridSpec caiso_like_spec() {
    SyntheticGridSpec s;
    s.region_id = "CAISO";
    s.baseload_coal = 1500.0;
    s.gas_base = 7000.0;
    s.gas_peaker_amplitude = 6000.0;
    s.solar_peak = 14000.0;
    s.wind_mean = 2500.0;
    s.wind_jitter = 1500.0;
    s.rng_seed = 2022;
    return s;
}

/// Wind and coal heavy grid.
inline SyntheticGridSpec ercot_like_spec() {
    SyntheticGridSpec s;
    s.region_id = "ERCOT";
    s.baseload_coal = 12000.0;
    s.gas_base = 18000.0;
    s.gas_peaker_amplitude = 9000.0;
    s.solar_peak = 4000.0;
    s.wind_mean = 11000.0;
    s.wind_jitter = 7000.0;
    s.rng_seed = 4044;
    return s;
}

/// Gas-dominated grid with little solar and wind.
inline SyntheticGridSpec isone_like_spec() {
    SyntheticGridSpec s;
    s.region_id = "ISONE";
    s.gas_base = 9000.0;
    s.gas_peaker_amplitude = 3000.0;
    s.solar_peak = 800.0;
    s.wind_mean = 900.0;
    s.wind_jitter = 500.0;
    s.rng_seed = 1776;
    return s;
}

namespace detail {

// sin profile clipped to its positive lobe; exactly zero outside (lo, hi).
inline double lobe(int hour, int lo, int hi) {
    if (hour <= lo || hour >= hi) return 0.0;
    return std::sin(std::numbers::pi * static_cast<double>(hour - lo) / static_cast<double>(hi - lo));
}

}  // namespace detail

/// Deterministic hourly series: constant coal, sinusoidal daytime solar,
/// gas with an evening peaker bump, and seeded uniform wind jitter. The seed
/// only affects wind.
inline GenerationSeries synth_generate(const SyntheticGridSpec& spec) {
    for (double v : {spec.baseload_coal, spec.gas_base, spec.gas_peaker_amplitude, spec.solar_peak, spec.wind_mean,
                     spec.wind_jitter})
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidArgument, "synthetic magnitudes must be finite and non-negative");
    if (spec.days == 0) throw Error(ErrorCode::InvalidArgument, "synthetic series needs at least one day");

    const std::size_t hours = spec.days * 24;
    GenerationSeries out;
    out.region_id = spec.region_id;
    out.start = spec.start;
    const bool coal = spec.baseload_coal > 0.0;
    const bool gas = spec.gas_base > 0.0 || spec.gas_peaker_amplitude > 0.0;
    const bool solar = spec.solar_peak > 0.0;
    const bool wind = spec.wind_mean > 0.0 || spec.wind_jitter > 0.0;
    if (!(coal || gas || solar || wind))
        throw Error(ErrorCode::InvalidArgument, "synthetic grid has no generation");

    std::mt19937_64 rng(spec.rng_seed);
    for (std::size_t t = 0; t < hours; ++t) {
        const int utc_hour = utc_hour_of_day(out.time_at(t));
        const int local = ((utc_hour + spec.utc_offset_hours) % 24 + 24) % 24;
        if (coal) out.per_source["coal"].push_back(spec.baseload_coal);
        if (gas) out.per_source["gas"].push_back(spec.gas_base + spec.gas_peaker_amplitude * detail::lobe(local, 16, 24));
        if (solar) out.per_source["solar"].push_back(spec.solar_peak * detail::lobe(local, 6, 18));
        if (wind) {
            // 53 high bits -> uniform in [0, 1); independent of the standard
            // library's distribution implementations.
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            out.per_source["wind"].push_back(std::max(0.0, spec.wind_mean + spec.wind_jitter * (2.0 * u - 1.0)));
        }
    }
    return out;
}

}  // namespace gridci
