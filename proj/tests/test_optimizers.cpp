#include <catch_amalgamated.hpp>

#include <random>

#include "gridci/optimizers.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gridci;
using testing::code_of;

namespace {

ClientSite site(std::string id, std::map<std::string, double, std::less<>> distance, std::vector<double> requests) {
    return ClientSite{std::move(id), std::move(distance), std::move(requests)};
}

SignalMap two_regions(std::vector<double> a, std::vector<double> b) {
    SignalMap m;
    m.emplace("RA", make_signal("RA", std::move(a)));
    m.emplace("RB", make_signal("RB", std::move(b)));
    return m;
}

const std::vector<DataCenter> kTwoDcs{{"dc1", "RA", 1.0}, {"dc2", "RB", 1.0}};

}  // namespace

TEST_CASE("carbon-aware routing weighs normalized intensity against distance", "[optimizers][routing]") {
    const std::vector<ClientSite> sites{site("s", {{"dc1", 1000}, {"dc2", 100}}, {10})};
    const auto signals = two_regions({100}, {300});

    SECTION("default weight prefers the cleaner, farther data center") {
        const auto r = route_requests(sites, kTwoDcs, signals);
        CHECK(r.hours[0][0] == Route{"dc1", 10});
    }
    SECTION("zero carbon weight is the distance baseline") {
        RoutingOptions opt;
        opt.alpha = 0.0;
        CHECK(route_requests(sites, kTwoDcs, signals, opt) == route_baseline(sites, kTwoDcs));
        CHECK(route_baseline(sites, kTwoDcs).hours[0][0].dc_id == "dc2");
    }
    SECTION("a latency cap removes far data centers") {
        RoutingOptions opt;
        opt.latency_cap = 500.0;
        CHECK(route_requests(sites, kTwoDcs, signals, opt).hours[0][0].dc_id == "dc2");
        opt.latency_cap = 50.0;
        CHECK(code_of([&] { route_requests(sites, kTwoDcs, signals, opt); }) == ErrorCode::NoEligibleDc);
    }
    SECTION("missing and mis-sized signals") {
        SignalMap only_a;
        only_a.emplace("RA", make_signal("RA", {100}));
        CHECK(code_of([&] { route_requests(sites, kTwoDcs, only_a); }) == ErrorCode::MissingSignal);
        CHECK(code_of([&] { route_requests(sites, kTwoDcs, two_regions({1, 2}, {1, 2})); }) ==
              ErrorCode::SignalSpanMismatch);
    }
}

TEST_CASE("routing ties break by distance, then id", "[optimizers][routing]") {
    const std::vector<DataCenter> dcs{{"zeta", "RA", 1.0}, {"alpha", "RB", 1.0}};
    const auto signals = two_regions({100}, {100});
    const std::vector<ClientSite> sites{site("s", {{"zeta", 100}, {"alpha", 100}}, {1})};
    CHECK(route_requests(sites, dcs, signals).hours[0][0].dc_id == "alpha");
    CHECK(route_baseline(sites, dcs).hours[0][0].dc_id == "alpha");

    const std::vector<DataCenter> one{{"only", "RA", 1.0}};
    const std::vector<ClientSite> lone{site("s", {{"only", 900}}, {1})};
    CHECK(route_baseline(lone, one).hours[0][0].dc_id == "only");
}

TEST_CASE("routing input validation", "[optimizers][routing]") {
    const auto signals = two_regions({1}, {1});
    CHECK(code_of([&] { route_baseline({}, kTwoDcs); }) == ErrorCode::InvalidWorkload);
    const std::vector<ClientSite> no_distance{site("s", {{"dc1", 1}}, {1})};
    CHECK(code_of([&] { route_baseline(no_distance, kTwoDcs); }) == ErrorCode::InvalidWorkload);
    RoutingOptions bad;
    bad.alpha = 1.5;
    const std::vector<ClientSite> ok{site("s", {{"dc1", 1}, {"dc2", 2}}, {1})};
    CHECK(code_of([&] { route_requests(ok, kTwoDcs, signals, bad); }) == ErrorCode::InvalidWorkload);
}

TEST_CASE("routing with full carbon weight is emissions-optimal", "[optimizers][routing][property]") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> ci(0, 500), dist(1, 3000), req(0, 9);
    RoutingOptions opt;
    opt.alpha = 1.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t hours = 3;
        std::vector<DataCenter> dcs{{"a", "RA", 1.0}, {"b", "RB", 1.0}, {"c", "RC", 1.0}};
        SignalMap signals;
        for (const char* r : {"RA", "RB", "RC"}) {
            std::vector<double> v;
            for (std::size_t t = 0; t < hours; ++t) v.push_back(ci(rng));
            signals.emplace(r, make_signal(r, v));
        }
        std::vector<ClientSite> sites;
        for (int s = 0; s < 2; ++s) {
            ClientSite cs{"s" + std::to_string(s), {}, {}};
            for (const auto& dc : dcs) cs.distance[dc.dc_id] = dist(rng);
            for (std::size_t t = 0; t < hours; ++t) cs.hourly_requests.push_back(req(rng));
            sites.push_back(cs);
        }
        const auto r = route_requests(sites, dcs, signals, opt);
        double got = 0.0;
        std::vector<oracle::RoutingCell> cells;
        for (std::size_t t = 0; t < hours; ++t) {
            for (std::size_t s = 0; s < sites.size(); ++s) {
                oracle::RoutingCell cell{sites[s].hourly_requests[t], {}, {}};
                for (const auto& dc : dcs) {
                    cell.ci_times_energy.push_back(signals.at(dc.region_id)[t] * dc.per_request_energy_kwh);
                    cell.eligible.push_back(true);
                }
                cells.push_back(cell);
                const auto& route = r.hours[t][s];
                const auto& dc = *std::find_if(dcs.begin(), dcs.end(), [&](auto& d) { return d.dc_id == route.dc_id; });
                got += route.requests * dc.per_request_energy_kwh * signals.at(dc.region_id)[t];
            }
        }
        CHECK(got == oracle::best_routing_emissions(cells));
    }
}

TEST_CASE("temporal shifting picks the cleanest start in the window", "[optimizers][temporal]") {
    const auto signal = make_signal("R", {100, 50, 200, 50});
    CHECK(schedule_job(TemporalJob{0, 1, 3, 1.0}, signal) == 1);
    CHECK(schedule_job(TemporalJob{2, 1, 0, 1.0}, signal) == 2);
    CHECK(schedule_job(TemporalJob{2, 2, 2, 1.0}, signal) == 0);  // [100,50] vs [50,200] vs [200,50]

    const auto flat = make_signal("R", std::vector<double>(48, 300.0));
    CHECK(schedule_job(TemporalJob{}, flat) == kNightlyStartHour);
    CHECK(schedule_job(TemporalJob{20, 3, 8, 1.0}, flat) == 20);

    SECTION("equal sums on both sides prefer the earlier start") {
        const auto sym = make_signal("R", {10, 90, 10});
        CHECK(schedule_job(TemporalJob{1, 1, 1, 1.0}, sym) == 0);
    }
    SECTION("window is clipped to the signal") {
        const auto w = feasible_starts(TemporalJob{1, 2, 8, 1.0}, 4);
        CHECK(w.first == 0);
        CHECK(w.last == 2);
        CHECK(code_of([] { feasible_starts(TemporalJob{0, 5, 1, 1.0}, 4); }) == ErrorCode::EmptyWindow);
        CHECK(code_of([] { feasible_starts(TemporalJob{10, 1, 1, 1.0}, 4); }) == ErrorCode::EmptyWindow);
    }
}

TEST_CASE("temporal baseline runs at the nominal start", "[optimizers][temporal]") {
    for (std::size_t n : {0u, 1u, 23u}) CHECK(schedule_baseline(TemporalJob{n, 1, 8, 1.0}) == n);
}

TEST_CASE("daily jobs repeat at the same hour", "[optimizers][temporal]") {
    const auto jobs = daily_jobs(72, 1, 4, 8, 2.0);
    REQUIRE(jobs.size() == 3);
    CHECK(jobs[2].nominal_start == 49);
    CHECK(jobs[2].power_kw == 2.0);
    CHECK(daily_jobs(72, 23, 2, 8, 1.0).size() == 2);  // day 3 would overrun
}

TEST_CASE("temporal shifting matches exhaustive search", "[optimizers][temporal][property]") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> ci(0, 400), len(1, 8);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t hours = static_cast<std::size_t>(len(rng));
        std::vector<double> v;
        for (std::size_t t = 0; t < hours; ++t) v.push_back(ci(rng));
        const std::size_t duration = std::uniform_int_distribution<std::size_t>(1, hours)(rng);
        const std::size_t nominal = std::uniform_int_distribution<std::size_t>(0, hours - duration)(rng);
        const std::size_t flex = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
        const TemporalJob job{nominal, duration, flex, 3.0};
        const auto start = schedule_job(job, make_signal("R", v));
        CHECK(oracle::start_emissions(v, start, duration, 3.0) ==
              oracle::best_start_emissions(v, nominal, flex, duration, 3.0));
    }
}

TEST_CASE("autoscaling concentrates work in clean hours", "[optimizers][autoscale]") {
    const auto signal = make_signal("R", {100, 50, 200, 50});
    AutoscaleJob job;
    job.deadline = 4;
    job.work = 4;
    job.max_instances = 2;
    const auto plan = autoscale(job, signal);
    CHECK(plan.instances == std::vector<int>{0, 2, 0, 2});
    CHECK(oracle::plan_emissions(signal.values, plan.instances, 1.0) == 200.0);
    CHECK(oracle::plan_emissions(signal.values, autoscale_baseline(job).instances, 1.0) == 400.0);

    SECTION("constant signal and one instance leaves nothing to gain") {
        AutoscaleJob flat_job;
        flat_job.deadline = 6;
        flat_job.work = 6;
        flat_job.max_instances = 1;
        const auto flat = make_signal("R", std::vector<double>(6, 250.0));
        CHECK(autoscale(flat_job, flat).instances == std::vector<int>(6, 1));
    }
    SECTION("vacuous job") {
        job.work = 0;
        CHECK(autoscale(job, signal).instances == std::vector<int>(4, 0));
        CHECK(autoscale_baseline(job).instances == std::vector<int>(4, 0));
    }
    SECTION("partial last hour uses the fewest instances") {
        job.work = 3;
        CHECK(autoscale(job, signal).instances == std::vector<int>{0, 2, 0, 1});
    }
    SECTION("infeasible and mis-sized jobs") {
        job.work = 9;
        CHECK(code_of([&] { autoscale(job, signal); }) == ErrorCode::InfeasibleDeadline);
        job.work = 5;
        CHECK(code_of([&] { autoscale_baseline(job); }) == ErrorCode::InfeasibleDeadline);
        job.work = 1;
        job.deadline = 6;
        CHECK(code_of([&] { autoscale(job, signal); }) == ErrorCode::SignalSpanMismatch);
    }
}

TEST_CASE("autoscale baseline is one instance until done", "[optimizers][autoscale]") {
    AutoscaleJob job;
    CHECK(autoscale_baseline(job).instances == std::vector<int>(24, 1));
    job.work = 4;
    const auto plan = autoscale_baseline(job);
    CHECK(std::count(plan.instances.begin(), plan.instances.end(), 1) == 4);
    CHECK(plan.instances[3] == 1);
    CHECK(plan.instances[4] == 0);
}

TEST_CASE("concave profiles are solved exactly", "[optimizers][autoscale]") {
    // Cheapest-marginal-step greedy would pick [1, 1] here at cost 2.5.
    AutoscaleJob job;
    job.deadline = 2;
    job.work = 3;
    job.max_instances = 2;
    job.throughput = {0, 2, 3};
    const auto signal = make_signal("R", {1.0, 1.5});
    const auto plan = autoscale(job, signal);
    CHECK(plan.instances == std::vector<int>{2, 0});
    CHECK(work_done(plan, job) >= 3);
}

TEST_CASE("throughput profile validation", "[optimizers][autoscale]") {
    AutoscaleJob job;
    job.max_instances = 2;
    job.throughput = {0, 2};
    CHECK(code_of([&] { check_autoscale_job(job); }) == ErrorCode::InvalidWorkload);
    job.throughput = {0, 2, 1};
    CHECK(code_of([&] { check_autoscale_job(job); }) == ErrorCode::InvalidWorkload);
    job.throughput = {1, 2, 3};
    CHECK(code_of([&] { check_autoscale_job(job); }) == ErrorCode::InvalidWorkload);
}

TEST_CASE("autoscaling matches exhaustive search", "[optimizers][autoscale][property]") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> ci(0, 300), len(1, 6), maxi(1, 3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t hours = static_cast<std::size_t>(len(rng));
        std::vector<double> v;
        for (std::size_t t = 0; t < hours; ++t) v.push_back(ci(rng));
        AutoscaleJob job;
        job.deadline = hours;
        job.max_instances = maxi(rng);
        job.per_instance_power_kw = 2.0;
        std::vector<double> rate{0.0};
        const bool linear = trial % 2 == 0;
        for (int a = 1; a <= job.max_instances; ++a)
            rate.push_back(linear ? a : rate.back() + std::uniform_int_distribution<int>(0, 3)(rng));
        if (!linear) job.throughput = rate;
        const double capacity = static_cast<double>(hours) * rate.back();
        job.work = std::uniform_int_distribution<int>(0, static_cast<int>(capacity))(rng);
        const auto plan = autoscale(job, make_signal("R", v));
        CHECK(work_done(plan, job) >= job.work);
        CHECK(oracle::plan_emissions(v, plan.instances, 2.0) ==
              oracle::best_plan_emissions(v, job.work, job.max_instances, rate, 2.0));
    }
}

TEST_CASE("defaults follow the nightly and daily job setups", "[optimizers][config]") {
    CHECK(kDefaultCarbonWeight == 0.67);
    CHECK(RoutingOptions{}.alpha == 0.67);
    CHECK(1.0 - RoutingOptions{}.alpha == Catch::Approx(0.33));
    CHECK(TemporalJob{}.nominal_start == 1);
    CHECK(TemporalJob{}.flexibility == 8);
    CHECK(AutoscaleJob{}.work == 24.0);
    CHECK(AutoscaleJob{}.max_instances == 8);
    CHECK(AutoscaleJob{}.deadline - AutoscaleJob{}.release == 24);
}
