#pragma once

// Command-line front end. run_cli() does the work so tests can drive it
// in-process; tools/gridci.cpp only forwards argv.
//
// Exit codes: 0 success, 1 data error (message names the error code),
// 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridci/attribution.hpp"
#include "gridci/dataio.hpp"
#include "gridci/error.hpp"
#include "gridci/evaluation.hpp"
#include "gridci/grid.hpp"
#include "gridci/optimizers.hpp"
#include "gridci/report.hpp"
#include "gridci/workload_io.hpp"

namespace gridci {

inline constexpr const char* kOutDirEnv = "GRIDCI_OUT_DIR";

/// Everything a subcommand needs, with library defaults.
struct RunConfig {
    std::string subcommand;
    std::string generation_path;
    std::string cef_path;
    std::string workload_path;
    std::vector<std::string> regions;
    std::string out_dir = ".";

    double ppa = 1.0;
    double consumer_f = 0.0;
    DegeneratePolicy degenerate = DegeneratePolicy::error;
    Grouping grouping = Grouping::overall;
    Technique technique = Technique::temporal;
    std::vector<double> fractions{0.0, 0.25, 0.5, 0.75, 1.0};

    // spatial
    double alpha = kDefaultCarbonWeight;
    std::optional<double> latency_cap;
    // temporal
    std::size_t nominal_hour = kNightlyStartHour;
    std::size_t flexibility = kDefaultFlexibilityHours;
    std::size_t duration = 1;
    double job_power_kw = 1.0;
    // autoscale
    std::size_t release_hour = 0;
    std::size_t window_hours = kDefaultDeadlineHours;
    double work = kDefaultAutoscaleWork;
    int max_instances = kDefaultMaxInstances;
    double instance_power_kw = 1.0;
    std::vector<double> throughput;

    // synth
    std::vector<std::string> presets;
    SyntheticGridSpec synth = SyntheticGridSpec{};
    std::string output_name = "generation.csv";
};

namespace cli_detail {

inline const std::map<std::string, DegeneratePolicy> kPolicies{{"error", DegeneratePolicy::error},
                                                              {"clamp_zero", DegeneratePolicy::clamp_zero}};
inline const std::map<std::string, Grouping> kGroupings{{"overall", Grouping::overall},
                                                       {"hour_of_day", Grouping::hour_of_day},
                                                       {"month", Grouping::month},
                                                       {"region", Grouping::region}};
inline const std::map<std::string, Technique> kTechniques{
    {"spatial", Technique::spatial}, {"temporal", Technique::temporal}, {"autoscale", Technique::autoscale}};

inline void add_inputs(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--generation", cfg.generation_path, "Hourly generation CSV (timestamp,region,source,MWh)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--cef", cfg.cef_path, "Emission-factor CSV (source,g CO2/kWh,renewable,ppa_eligible); "
                                           "default: coal 760, gas 370, renewables 0")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");
    sub->add_option("--degenerate", cfg.degenerate, "Hours with no residual generation: error | clamp_zero")
        ->transform(CLI::CheckedTransformer(kPolicies, CLI::ignore_case));
}

inline void add_attribution(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--ppa", cfg.ppa, "Fraction of solar and wind generation under PPA, 0..1")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--consumer-f", cfg.consumer_f, "Fraction of the consumer's own demand met by PPAs, 0..1")
        ->check(CLI::Range(0.0, 1.0));
}

inline void add_regions(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--region", cfg.regions, "Region id to run (repeatable; default: every region in the file)");
}

inline void add_spatial(CLI::App* sub, RunConfig& cfg, bool required) {
    auto* opt = sub->add_option("--workload", cfg.workload_path, "Data centers and client sites JSON (distances in km)")
                    ->check(CLI::ExistingFile);
    if (required) opt->required();
    sub->add_option("--alpha", cfg.alpha, "Weight of carbon intensity in the routing score, 0..1 (distance gets 1-alpha)")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--latency-cap", cfg.latency_cap, "Maximum client-to-DC distance, km")->check(CLI::NonNegativeNumber);
}

inline void add_temporal(CLI::App* sub, RunConfig& cfg, bool duration_required) {
    sub->add_option("--nominal", cfg.nominal_hour, "Nominal daily start, hour of day 0..23")->check(CLI::Range(0, 23));
    sub->add_option("--flex", cfg.flexibility, "Flexibility window, +/- hours around the nominal start")
        ->check(CLI::Range(0, 48));
    auto* d = sub->add_option("--duration", cfg.duration, "Job length, hours")->check(CLI::Range(1, 24 * 366));
    if (duration_required) d->required();
    sub->add_option("--power", cfg.job_power_kw, "Job power draw, kW")->check(CLI::PositiveNumber);
}

inline void add_autoscale(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--start-hour", cfg.release_hour, "Daily release, hour of day 0..23")->check(CLI::Range(0, 23));
    sub->add_option("--window", cfg.window_hours, "Release-to-deadline span, hours")->check(CLI::Range(1, 24 * 366));
    sub->add_option("--work", cfg.work, "Work to complete, instance-hours at one instance's rate")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--max-instances", cfg.max_instances, "Maximum simultaneous instances")->check(CLI::Range(1, 4096));
    sub->add_option("--instance-power", cfg.instance_power_kw, "Power per instance, kW")->check(CLI::PositiveNumber);
    sub->add_option("--throughput", cfg.throughput,
                    "Work rate with 0..max instances, comma separated (default linear: a)")
        ->delimiter(',');
}

inline std::vector<GenerationSeries> select_regions(std::vector<GenerationSeries> all,
                                                    const std::vector<std::string>& wanted) {
    if (wanted.empty()) return all;
    std::vector<GenerationSeries> out;
    for (const auto& id : wanted) {
        auto it = std::find_if(all.begin(), all.end(), [&](const auto& s) { return s.region_id == id; });
        if (it == all.end()) throw Error(ErrorCode::MissingSignal, "region '" + id + "' is not in the generation file");
        out.push_back(*it);
    }
    return out;
}

struct Inputs {
    SourceTable sources;
    std::vector<GenerationSeries> series;
};

inline Inputs load_inputs(const RunConfig& cfg, bool filter_regions) {
    Inputs in;
    in.sources = cfg.cef_path.empty() ? default_sources() : load_cef_csv(cfg.cef_path);
    in.series = load_generation_csv(cfg.generation_path);
    if (filter_regions) in.series = select_regions(std::move(in.series), cfg.regions);
    for (auto& s : in.series) s = validate_series(std::move(s), in.sources);
    return in;
}

inline AutoscaleJob autoscale_prototype(const RunConfig& cfg) {
    AutoscaleJob job;
    job.release = 0;
    job.deadline = cfg.window_hours;
    job.work = cfg.work;
    job.max_instances = cfg.max_instances;
    job.per_instance_power_kw = cfg.instance_power_kw;
    job.throughput = cfg.throughput;
    check_autoscale_job(job);
    return job;
}

inline Workload temporal_workload(const RunConfig& cfg, const GenerationSeries& s) {
    auto jobs = daily_jobs(s.hours(), cfg.nominal_hour, cfg.duration, cfg.flexibility, cfg.job_power_kw);
    if (jobs.empty()) throw Error(ErrorCode::EmptyWindow, "no day of '" + s.region_id + "' fits the job");
    return TemporalWorkload{s.region_id, std::move(jobs)};
}

inline Workload autoscale_workload(const RunConfig& cfg, const GenerationSeries& s) {
    auto jobs = daily_autoscale_jobs(s.hours(), cfg.release_hour, autoscale_prototype(cfg));
    if (jobs.empty()) throw Error(ErrorCode::InfeasibleDeadline, "no day of '" + s.region_id + "' fits the job window");
    return AutoscaleWorkload{s.region_id, std::move(jobs)};
}

inline Workload spatial_workload(const RunConfig& cfg, const std::vector<GenerationSeries>& series, bool alpha_given) {
    const std::size_t hours = series.empty() ? 0 : series.front().hours();
    auto spec = load_spatial_spec(cfg.workload_path, hours);
    SpatialWorkload w;
    w.dcs = std::move(spec.dcs);
    w.sites = std::move(spec.sites);
    w.options.alpha = alpha_given || !spec.alpha ? cfg.alpha : *spec.alpha;
    w.options.latency_cap = cfg.latency_cap ? cfg.latency_cap : spec.latency_cap;
    return w;
}

// Workloads to run for a technique: one spatial workload over all regions,
// or one per region for temporal and autoscale.
inline std::vector<std::pair<Workload, std::vector<GenerationSeries>>>
workloads_for(const RunConfig& cfg, const Inputs& in, bool alpha_given) {
    std::vector<std::pair<Workload, std::vector<GenerationSeries>>> out;
    if (cfg.technique == Technique::spatial) {
        out.emplace_back(spatial_workload(cfg, in.series, alpha_given), in.series);
        return out;
    }
    for (const auto& s : in.series) {
        Workload w = cfg.technique == Technique::temporal ? temporal_workload(cfg, s) : autoscale_workload(cfg, s);
        out.emplace_back(std::move(w), std::vector<GenerationSeries>{s});
    }
    return out;
}

inline std::string prefix(Technique t) {
    switch (t) {
    case Technique::spatial: return "route";
    case Technique::temporal: return "schedule";
    case Technique::autoscale: return "autoscale";
    }
    return "run";
}

// ---------------------------------------------------------------------------

inline OutputBatch cmd_ci(const RunConfig& cfg) {
    const auto in = load_inputs(cfg, true);
    const auto ppa = uniform_portfolio(in.sources, cfg.ppa);
    std::vector<CarbonSignal> lb, res, mb;
    for (const auto& s : in.series) {
        lb.push_back(ci_lb(s, in.sources));
        res.push_back(ci_res(s, in.sources, ppa, cfg.degenerate));
        mb.push_back(ci_mb(res.back(), make_consumer(cfg.consumer_f)));
    }
    OutputBatch batch;
    batch.add("ci_lb.csv", signal_csv(lb));
    batch.add("ci_res.csv", signal_csv(res));
    batch.add("ci_mb.csv", signal_csv(mb));
    return batch;
}

inline OutputBatch cmd_divergence(const RunConfig& cfg) {
    const auto in = load_inputs(cfg, true);
    const auto summary = divergence(in.series, in.sources, uniform_portfolio(in.sources, cfg.ppa), cfg.grouping);
    const std::string stem = "divergence_" + std::string(grouping_name(cfg.grouping));
    OutputBatch batch;
    batch.add(stem + ".csv", divergence_csv(summary));
    batch.add(stem + ".json", dump(to_json(summary)));
    return batch;
}

inline OutputBatch cmd_matrix(const RunConfig& cfg, bool alpha_given) {
    const auto in = load_inputs(cfg, cfg.technique != Technique::spatial);
    const auto consumer = make_consumer(cfg.consumer_f);
    std::vector<ScenarioMatrix> matrices;
    for (const auto& [workload, series] : workloads_for(cfg, in, alpha_given))
        matrices.push_back(run_matrix(workload, build_signals(series, in.sources, cfg.ppa, consumer, cfg.degenerate)));

    const std::string stem = prefix(cfg.technique);
    ordered_json arr = ordered_json::array();
    for (const auto& m : matrices) arr.push_back(to_json(m));
    OutputBatch batch;
    batch.add(stem + "_matrix.json", dump(arr));
    batch.add(stem + "_matrix.csv", matrix_csv(matrices));
    for (const auto& m : matrices) batch.add(stem + "_hourly_" + m.lb_lb.region_id + ".csv", matrix_hourly_csv(m));
    return batch;
}

inline OutputBatch cmd_sweep(const RunConfig& cfg, bool alpha_given) {
    if (cfg.technique == Technique::spatial && cfg.workload_path.empty())
        throw CLI::RequiredError("--workload (needed for --technique spatial)");
    const auto in = load_inputs(cfg, cfg.technique != Technique::spatial);
    const auto consumer = make_consumer(cfg.consumer_f);
    std::vector<SweepTable> tables;
    for (const auto& [workload, series] : workloads_for(cfg, in, alpha_given))
        tables.push_back(ppa_sweep(workload, series, in.sources, cfg.fractions, consumer, cfg.degenerate));
    ordered_json arr = ordered_json::array();
    for (const auto& t : tables) arr.push_back(to_json(t));
    OutputBatch batch;
    batch.add("sweep.csv", sweep_csv(tables));
    batch.add("sweep.json", dump(arr));
    batch.add("savings_table.csv", savings_table_csv(tables));
    return batch;
}

// One discrepancy record per daily job, per region.
inline OutputBatch cmd_cdf(const RunConfig& cfg) {
    const auto in = load_inputs(cfg, true);
    const auto consumer = make_consumer(cfg.consumer_f);
    std::vector<DiscrepancyRecord> records;
    for (const auto& s : in.series) {
        const std::vector<GenerationSeries> one{s};
        const auto signals = build_signals(one, in.sources, cfg.ppa, consumer, cfg.degenerate);
        const Workload all = cfg.technique == Technique::temporal ? temporal_workload(cfg, s) : autoscale_workload(cfg, s);
        if (const auto* tw = std::get_if<TemporalWorkload>(&all)) {
            for (const auto& job : tw->jobs)
                records.push_back(run_matrix(TemporalWorkload{s.region_id, {job}}, signals).discrepancy);
        } else {
            for (const auto& job : std::get<AutoscaleWorkload>(all).jobs)
                records.push_back(run_matrix(AutoscaleWorkload{s.region_id, {job}}, signals).discrepancy);
        }
    }
    const auto cdf = region_cdf(records);
    OutputBatch batch;
    batch.add("cdf_records.csv", records_csv(records));
    batch.add("cdf_per_region_mean.csv", cdf_csv(cdf.per_region_mean));
    batch.add("cdf_per_region_max.csv", cdf_csv(cdf.per_region_max));
    batch.add("cdf.json", dump(to_json(cdf)));
    return batch;
}

inline OutputBatch cmd_synth(const RunConfig& cfg) {
    std::vector<GenerationSeries> series;
    auto with_overrides = [&](SyntheticGridSpec spec) {
        spec.days = cfg.synth.days;
        spec.utc_offset_hours = cfg.synth.utc_offset_hours;
        spec.start = cfg.synth.start;
        return spec;
    };
    for (const auto& preset : cfg.presets) {
        if (preset == "caiso") series.push_back(synth_generate(with_overrides(caiso_like_spec())));
        else if (preset == "ercot") series.push_back(synth_generate(with_overrides(ercot_like_spec())));
        else series.push_back(synth_generate(with_overrides(isone_like_spec())));
    }
    if (cfg.presets.empty()) series.push_back(synth_generate(cfg.synth));
    OutputBatch batch;
    batch.add(cfg.output_name, generation_csv(series));
    return batch;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli_detail;
    RunConfig cfg;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;

    CLI::App app{"Carbon-intensity attribution and carbon-aware optimization simulator", "gridci"};
    app.require_subcommand(1);

    auto* ci = app.add_subcommand("ci", "Emit CI_lb, CI_res and CI_mb series (g CO2/kWh) per region");
    add_inputs(ci, cfg);
    add_attribution(ci, cfg);
    add_regions(ci, cfg);

    auto* div = app.add_subcommand("divergence", "Percentage increase of CI_res over CI_lb, grouped");
    add_inputs(div, cfg);
    add_attribution(div, cfg);
    add_regions(div, cfg);
    div->add_option("--group", cfg.grouping, "Grouping: overall | hour_of_day | month | region (hours in UTC)")
        ->transform(CLI::CheckedTransformer(kGroupings, CLI::ignore_case));

    auto* route = app.add_subcommand("route", "Spatial load shifting scenario matrix");
    add_inputs(route, cfg);
    add_attribution(route, cfg);
    add_spatial(route, cfg, true);

    auto* sched = app.add_subcommand("schedule", "Temporal shifting of daily jobs, scenario matrix per region");
    add_inputs(sched, cfg);
    add_attribution(sched, cfg);
    add_regions(sched, cfg);
    add_temporal(sched, cfg, true);

    auto* scale = app.add_subcommand("autoscale", "Carbon-aware autoscaling of daily jobs, scenario matrix per region");
    add_inputs(scale, cfg);
    add_attribution(scale, cfg);
    add_regions(scale, cfg);
    add_autoscale(scale, cfg);

    auto* sweep = app.add_subcommand("sweep", "Savings of every scenario cell across PPA fractions");
    add_inputs(sweep, cfg);
    add_regions(sweep, cfg);
    sweep->add_option("--consumer-f", cfg.consumer_f, "Fraction of the consumer's own demand met by PPAs, 0..1")
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--technique", cfg.technique, "spatial | temporal | autoscale")
        ->required()
        ->transform(CLI::CheckedTransformer(kTechniques, CLI::ignore_case));
    sweep->add_option("--fractions", cfg.fractions, "PPA fractions, comma separated, each 0..1")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    add_spatial(sweep, cfg, false);
    add_temporal(sweep, cfg, false);
    add_autoscale(sweep, cfg);

    auto* cdf = app.add_subcommand("cdf", "CDF over regions of per-day discrepancies (percentage points)");
    add_inputs(cdf, cfg);
    add_attribution(cdf, cfg);
    add_regions(cdf, cfg);
    cdf->add_option("--technique", cfg.technique, "temporal | autoscale")
        ->required()
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Technique>{{"temporal", Technique::temporal}, {"autoscale", Technique::autoscale}},
            CLI::ignore_case));
    add_temporal(cdf, cfg, false);
    add_autoscale(cdf, cfg);

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic generation CSV");
    synth->add_option("--preset", cfg.presets, "Bundled region shape: caiso | ercot | isone (repeatable)")
        ->check(CLI::IsMember({"caiso", "ercot", "isone"}));
    synth->add_option("--region", cfg.synth.region_id, "Region id for a custom grid");
    synth->add_option("--days", cfg.synth.days, "Length, days")->check(CLI::Range(1, 3660));
    synth->add_option("--utc-offset", cfg.synth.utc_offset_hours, "Local solar time offset from UTC, hours")
        ->check(CLI::Range(-12, 14));
    synth->add_option("--coal", cfg.synth.baseload_coal, "Coal baseload, MWh per hour")->check(CLI::NonNegativeNumber);
    synth->add_option("--gas-base", cfg.synth.gas_base, "Gas base generation, MWh per hour")->check(CLI::NonNegativeNumber);
    synth->add_option("--gas-peaker", cfg.synth.gas_peaker_amplitude, "Evening gas peaker amplitude, MWh per hour")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--solar-peak", cfg.synth.solar_peak, "Solar output at local noon, MWh per hour")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--wind-mean", cfg.synth.wind_mean, "Mean wind output, MWh per hour")->check(CLI::NonNegativeNumber);
    synth->add_option("--wind-jitter", cfg.synth.wind_jitter, "Uniform wind jitter half-width, MWh per hour")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", cfg.synth.rng_seed, "Random seed for wind (64-bit)");
    synth->add_option("--output", cfg.output_name, "Output file name inside --out");
    synth->add_option("--out", cfg.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        OutputBatch batch;
        if (*ci) {
            batch = cmd_ci(cfg);
        } else if (*div) {
            batch = cmd_divergence(cfg);
        } else if (*route) {
            cfg.technique = Technique::spatial;
            batch = cmd_matrix(cfg, route->count("--alpha") > 0);
        } else if (*sched) {
            cfg.technique = Technique::temporal;
            batch = cmd_matrix(cfg, false);
        } else if (*scale) {
            cfg.technique = Technique::autoscale;
            batch = cmd_matrix(cfg, false);
        } else if (*sweep) {
            batch = cmd_sweep(cfg, sweep->count("--alpha") > 0);
        } else if (*cdf) {
            batch = cmd_cdf(cfg);
        } else if (*synth) {
            batch = cmd_synth(cfg);
        }
        for (const auto& path : batch.commit(cfg.out_dir)) out << path.string() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gridci
