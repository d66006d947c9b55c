#pragma once

// Machine-readable reports: JSON documents and CSV tables with a fixed column
// order. CSV numbers use 6-decimal fixed notation; JSON numbers are rounded
// to 6 decimals. Identical inputs give byte-identical files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gridci/attribution.hpp"
#include "gridci/error.hpp"
#include "gridci/evaluation.hpp"

namespace gridci {

using ordered_json = nlohmann::ordered_json;

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

inline double round6(double v) {
    const double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline ordered_json to_json(const EmissionsReport& r) {
    return ordered_json{{"total_g", round6(r.total_g)}, {"total_kwh", round6(r.total_kwh)}, {"per_kwh", round6(r.per_kwh)}};
}

inline ordered_json to_json(const ScenarioResult& r) {
    ordered_json j;
    j["technique"] = technique_name(r.technique);
    j["region"] = r.region_id;
    j["opt_method"] = method_name(r.opt_method);
    j["eval_method"] = method_name(r.eval_method);
    j["ppa_fraction"] = round6(r.ppa_fraction);
    j["savings_pct"] = round6(r.savings_pct);
    j["per_kwh_savings_pct"] = round6(r.per_kwh_savings_pct);
    j["baseline"] = to_json(r.baseline);
    j["optimized"] = to_json(r.optimized);
    return j;
}

inline ordered_json results_json(std::span<const ScenarioResult> results) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    return arr;
}

inline ordered_json to_json(const ScenarioMatrix& m) {
    ordered_json j;
    j["technique"] = technique_name(m.lb_lb.technique);
    j["region"] = m.lb_lb.region_id;
    j["ppa_fraction"] = round6(m.lb_lb.ppa_fraction);
    j["opt_lb_eval_lb"] = to_json(m.lb_lb);
    j["opt_lb_eval_mb"] = to_json(m.lb_mb);
    j["opt_mb_eval_mb"] = to_json(m.mb_mb);
    j["discrepancy_pp"] = round6(m.discrepancy.discrepancy_pp);
    return j;
}

inline ordered_json to_json(const SweepTable& t) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
        rows.push_back(ordered_json{{"ppa_fraction", round6(row.fraction)},
                                    {"opt_lb_eval_lb", round6(row.cells.lb_lb.savings_pct)},
                                    {"opt_lb_eval_mb", round6(row.cells.lb_mb.savings_pct)},
                                    {"opt_mb_eval_mb", round6(row.cells.mb_mb.savings_pct)},
                                    {"discrepancy_pp", round6(row.cells.discrepancy.discrepancy_pp)}});
    }
    return ordered_json{{"technique", technique_name(t.technique)}, {"region", t.region_id}, {"rows", rows}};
}

inline ordered_json to_json(const CdfSummary& c) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : c.points) pts.push_back(ordered_json::array({round6(p.value), round6(p.cumulative)}));
    return ordered_json{{"count", c.count}, {"mean", round6(c.mean)}, {"max", round6(c.max)}, {"points", pts}};
}

inline ordered_json to_json(const RegionCdf& c) {
    return ordered_json{{"per_region_mean", to_json(c.per_region_mean)}, {"per_region_max", to_json(c.per_region_max)}};
}

inline ordered_json to_json(const DivergenceSummary& d) {
    ordered_json groups = ordered_json::array();
    for (const auto& g : d.groups) {
        groups.push_back(ordered_json{{"key", g.key},
                                      {"hours", g.hours},
                                      {"ratio_hours", g.ratio_hours},
                                      {"mean_increase_pct", round6(g.mean_increase_pct)},
                                      {"median_increase_pct", round6(g.median_increase_pct)},
                                      {"max_increase_pct", round6(g.max_increase_pct)},
                                      {"mean_ci_lb", round6(g.mean_ci_lb)},
                                      {"mean_ci_res", round6(g.mean_ci_res)},
                                      {"mean_gap", round6(g.mean_gap)}});
    }
    return ordered_json{{"grouping", grouping_name(d.grouping)},
                        {"degenerate_hours", d.degenerate_hours},
                        {"zero_lb_hours", d.zero_lb_hours},
                        {"groups", groups}};
}

inline std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string signal_csv(std::span<const CarbonSignal> signals) {
    std::ostringstream os;
    os << "timestamp,region,method,ci_g_per_kwh\n";
    for (const auto& s : signals)
        for (std::size_t t = 0; t < s.size(); ++t)
            os << format_utc_hour(s.start + static_cast<long>(t) * kHour) << ',' << s.region_id << ','
               << attribution_name(s.method) << ',' << fixed6(s[t]) << '\n';
    return os.str();
}

inline void append_result_row(std::ostringstream& os, std::string_view cell, const ScenarioResult& r) {
    os << cell << ',' << technique_name(r.technique) << ',' << r.region_id << ',' << method_name(r.opt_method) << ','
       << method_name(r.eval_method) << ',' << fixed6(r.ppa_fraction) << ',' << fixed6(r.baseline.total_g) << ','
       << fixed6(r.optimized.total_g) << ',' << fixed6(r.baseline.total_kwh) << ',' << fixed6(r.optimized.total_kwh)
       << ',' << fixed6(r.savings_pct) << ',' << fixed6(r.per_kwh_savings_pct) << '\n';
}

inline constexpr std::string_view kResultColumns =
    "cell,technique,region,opt_method,eval_method,ppa_fraction,baseline_g,optimized_g,baseline_kwh,optimized_kwh,"
    "savings_pct,per_kwh_savings_pct\n";

inline std::string matrix_csv(std::span<const ScenarioMatrix> matrices) {
    std::ostringstream os;
    os << kResultColumns;
    for (const auto& m : matrices) {
        append_result_row(os, "opt_lb_eval_lb", m.lb_lb);
        append_result_row(os, "opt_lb_eval_mb", m.lb_mb);
        append_result_row(os, "opt_mb_eval_mb", m.mb_mb);
    }
    return os.str();
}

/// Hour-by-hour emissions of each cell, for plotting where each optimizer
/// placed its load.
inline std::string matrix_hourly_csv(const ScenarioMatrix& m) {
    std::ostringstream os;
    os << "hour,baseline_eval_lb_g,opt_lb_eval_lb_g,baseline_eval_mb_g,opt_lb_eval_mb_g,opt_mb_eval_mb_g\n";
    const std::size_t n = m.lb_lb.optimized.per_hour_g.size();
    for (std::size_t t = 0; t < n; ++t)
        os << t << ',' << fixed6(m.lb_lb.baseline.per_hour_g[t]) << ',' << fixed6(m.lb_lb.optimized.per_hour_g[t]) << ','
           << fixed6(m.lb_mb.baseline.per_hour_g[t]) << ',' << fixed6(m.lb_mb.optimized.per_hour_g[t]) << ','
           << fixed6(m.mb_mb.optimized.per_hour_g[t]) << '\n';
    return os.str();
}

inline std::string sweep_csv(std::span<const SweepTable> tables) {
    std::ostringstream os;
    os << "technique,region,ppa_fraction,opt_lb_eval_lb,opt_lb_eval_mb,opt_mb_eval_mb,discrepancy_pp\n";
    for (const auto& t : tables)
        for (const auto& row : t.rows)
            os << technique_name(t.technique) << ',' << t.region_id << ',' << fixed6(row.fraction) << ','
               << fixed6(row.cells.lb_lb.savings_pct) << ',' << fixed6(row.cells.lb_mb.savings_pct) << ','
               << fixed6(row.cells.mb_mb.savings_pct) << ',' << fixed6(row.cells.discrepancy.discrepancy_pp) << '\n';
    return os.str();
}

/// One row per region: location-based savings, then OPT_mb/EVAL_mb savings
/// for each nonzero PPA fraction of the sweep.
inline std::string savings_table_csv(std::span<const SweepTable> tables) {
    std::ostringstream os;
    os << "region,location_based";
    if (!tables.empty())
        for (const auto& row : tables.front().rows)
            if (row.fraction > 0.0) {
                char label[32];
                std::snprintf(label, sizeof label, "%g", 100.0 * row.fraction);
                os << ",market_based_" << label;
            }
    os << '\n';
    for (const auto& t : tables) {
        os << t.region_id << ',';
        os << (t.rows.empty() ? fixed6(0.0) : fixed6(t.rows.front().cells.lb_lb.savings_pct));
        for (const auto& row : t.rows)
            if (row.fraction > 0.0) os << ',' << fixed6(row.cells.mb_mb.savings_pct);
        os << '\n';
    }
    return os.str();
}

inline std::string cdf_csv(const CdfSummary& c) {
    std::ostringstream os;
    os << "discrepancy_pp,cumulative_fraction\n";
    for (const auto& p : c.points) os << fixed6(p.value) << ',' << fixed6(p.cumulative) << '\n';
    return os.str();
}

inline std::string records_csv(std::span<const DiscrepancyRecord> records) {
    std::ostringstream os;
    os << "region,ppa_fraction,discrepancy_pp\n";
    for (const auto& r : records) os << r.region_id << ',' << fixed6(r.ppa_fraction) << ',' << fixed6(r.discrepancy_pp) << '\n';
    return os.str();
}

inline std::string divergence_csv(const DivergenceSummary& d) {
    std::ostringstream os;
    os << "grouping,key,hours,ratio_hours,mean_increase_pct,median_increase_pct,max_increase_pct,mean_ci_lb,"
          "mean_ci_res,mean_gap\n";
    for (const auto& g : d.groups)
        os << grouping_name(d.grouping) << ',' << g.key << ',' << g.hours << ',' << g.ratio_hours << ','
           << fixed6(g.mean_increase_pct) << ',' << fixed6(g.median_increase_pct) << ',' << fixed6(g.max_increase_pct)
           << ',' << fixed6(g.mean_ci_lb) << ',' << fixed6(g.mean_ci_res) << ',' << fixed6(g.mean_gap) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Atomic multi-file output
// ---------------------------------------------------------------------------

/// Collects named file contents and writes them all or none: each file goes
/// to a temporary sibling first, and renames happen only after every write
/// succeeded.
class OutputBatch {
public:
    void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

    std::size_t size() const { return files_.size(); }
    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

    /// Returns the written paths in insertion order.
    std::vector<std::filesystem::path> commit(const std::filesystem::path& dir) const {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());

        std::vector<fs::path> temps, finals;
        auto cleanup = [&] {
            for (const auto& t : temps) fs::remove(t, ec);
        };
        for (const auto& [name, content] : files_) {
            const fs::path final_path = dir / name;
            const fs::path tmp = dir / ("." + name + ".tmp");
            temps.push_back(tmp);
            finals.push_back(final_path);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << content;
            out.close();
            if (!out) {
                cleanup();
                throw Error(ErrorCode::IoError, "cannot write '" + final_path.string() + "'");
            }
        }
        for (std::size_t i = 0; i < temps.size(); ++i) {
            fs::rename(temps[i], finals[i], ec);
            if (ec) {
                for (std::size_t k = 0; k < i; ++k) fs::remove(finals[k], ec);
                cleanup();
                throw Error(ErrorCode::IoError, "cannot move '" + finals[i].string() + "' into place");
            }
        }
        return finals;
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace gridci
