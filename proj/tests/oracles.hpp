#pragma once

// Test-only reference computations. These deliberately avoid the library's
// optimizers and evaluators: each one enumerates or sums directly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// Weighted average of emission factors, computed via generation shares.
inline double weighted_average_ci(const std::vector<std::pair<double, double>>& energy_and_cef) {
    double total = 0.0;
    for (const auto& [e, cef] : energy_and_cef) total += e;
    double ci = 0.0;
    for (const auto& [e, cef] : energy_and_cef) ci += (e / total) * cef;
    return ci;
}

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

/// Minimum emissions over every start within the clipped window.
inline double best_start_emissions(const std::vector<double>& ci, std::size_t nominal, std::size_t flex,
                                   std::size_t duration, double power) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + duration <= ci.size(); ++s) {
        const auto dist = s > nominal ? s - nominal : nominal - s;
        if (dist > flex) continue;
        double g = 0.0;
        for (std::size_t t = s; t < s + duration; ++t) g += power * ci[t];
        best = std::min(best, g);
    }
    return best;
}

inline double start_emissions(const std::vector<double>& ci, std::size_t start, std::size_t duration, double power) {
    double g = 0.0;
    for (std::size_t t = start; t < start + duration; ++t) g += power * ci[t];
    return g;
}

/// Exhaustive search over every plan in {0..max}^hours that finishes `work`.
/// `rate[a]` is the throughput with a instances.
inline double best_plan_emissions(const std::vector<double>& ci, double work, int max_instances,
                                  const std::vector<double>& rate, double power) {
    const std::size_t hours = ci.size();
    std::vector<int> plan(hours, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double done = 0.0, g = 0.0;
        for (std::size_t t = 0; t < hours; ++t) {
            done += rate[static_cast<std::size_t>(plan[t])];
            g += plan[t] * power * ci[t];
        }
        if (done >= work) best = std::min(best, g);
        std::size_t i = 0;
        while (i < hours && plan[i] == max_instances) plan[i++] = 0;
        if (i == hours) break;
        ++plan[i];
    }
    return best;
}

inline double plan_emissions(const std::vector<double>& ci, const std::vector<int>& plan, double power) {
    double g = 0.0;
    for (std::size_t t = 0; t < plan.size(); ++t) g += plan[t] * power * ci[t];
    return g;
}

/// One routing decision: `requests` served, per-DC intensities and
/// eligibility.
struct RoutingCell {
    double requests;
    std::vector<double> ci_times_energy;  // per DC, g per request
    std::vector<bool> eligible;
};

/// Exhaustive search over every joint assignment of cells to eligible DCs.
inline double best_routing_emissions(const std::vector<RoutingCell>& cells) {
    std::vector<std::size_t> choice(cells.size(), 0);
    auto valid = [&](std::size_t c) { return cells[c].eligible[choice[c]]; };
    double best = std::numeric_limits<double>::infinity();
    const std::size_t dcs = cells.empty() ? 0 : cells.front().eligible.size();
    while (true) {
        bool ok = true;
        double g = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!valid(c)) {
                ok = false;
                break;
            }
            g += cells[c].requests * cells[c].ci_times_energy[choice[c]];
        }
        if (ok) best = std::min(best, g);
        std::size_t i = 0;
        while (i < cells.size() && choice[i] + 1 == dcs) choice[i++] = 0;
        if (i == cells.size()) break;
        ++choice[i];
    }
    return best;
}

/// Empirical CDF by definition: F(x) = #{v <= x} / n at each distinct x.
inline std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    for (double x : values) {
        if (!out.empty() && out.back().first == x) continue;
        const auto le = std::count_if(values.begin(), values.end(), [&](double v) { return v <= x; });
        out.emplace_back(x, static_cast<double>(le) / static_cast<double>(values.size()));
    }
    return out;
}

}  // namespace oracle
