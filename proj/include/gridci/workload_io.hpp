#pragma once

// JSON description of a geo-distributed serving workload:
//
//   {
//     "alpha": 0.67,                      (optional)
//     "latency_cap_km": 3000,             (optional)
//     "data_centers": [ {"dc_id": "dc-west", "region_id": "CAISO",
//                        "per_request_energy_kwh": 0.002} ],
//     "sites": [ {"site_id": "seattle", "distance_km": {"dc-west": 1100},
//                 "requests_per_hour": 5000} ]      (or "hourly_requests": [...])
//   }

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "gridci/error.hpp"
#include "gridci/optimizers.hpp"

namespace gridci {

struct SpatialSpec {
    std::vector<DataCenter> dcs;
    std::vector<ClientSite> sites;
    std::optional<double> alpha;
    std::optional<double> latency_cap;
};

/// `hours` expands "requests_per_hour" into a constant trace of that length.
inline SpatialSpec parse_spatial_spec(const std::string& text, std::size_t hours) {
    SpatialSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
        if (j.contains("latency_cap_km") && !j.at("latency_cap_km").is_null())
            spec.latency_cap = j.at("latency_cap_km").get<double>();
        for (const auto& d : j.at("data_centers")) {
            DataCenter dc;
            dc.dc_id = d.at("dc_id").get<std::string>();
            dc.region_id = d.at("region_id").get<std::string>();
            dc.per_request_energy_kwh = d.value("per_request_energy_kwh", 1.0);
            spec.dcs.push_back(std::move(dc));
        }
        for (const auto& s : j.at("sites")) {
            ClientSite site;
            site.site_id = s.at("site_id").get<std::string>();
            for (const auto& [dc_id, km] : s.at("distance_km").items()) site.distance[dc_id] = km.get<double>();
            if (s.contains("hourly_requests")) {
                site.hourly_requests = s.at("hourly_requests").get<std::vector<double>>();
            } else {
                site.hourly_requests.assign(hours, s.at("requests_per_hour").get<double>());
            }
            spec.sites.push_back(std::move(site));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("workload file: ") + e.what());
    }
    return spec;
}

inline SpatialSpec load_spatial_spec(const std::string& path, std::size_t hours) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_spatial_spec(text, hours);
}

}  // namespace gridci
