/*
* Copyright (C) 2026 dayflow contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef DAYFLOW_GEO_HPP
#define DAYFLOW_GEO_HPP

#include "dayflow/csv.hpp"
#include "dayflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dayflow {

constexpr double kEarthRadiusM = 6371000.0;

// Great-circle distance on the mean-radius sphere. Symmetric, non-negative;
// at city scale the difference to a projected planar distance is negligible.
inline double haversine_m(LatLon a, LatLon b)
{
    constexpr double deg = 3.14159265358979323846 / 180.0;
    const double phi1    = a.lat * deg;
    const double phi2    = b.lat * deg;
    const double dphi    = (b.lat - a.lat) * deg;
    const double dlam    = (b.lon - a.lon) * deg;
    const double s1      = std::sin(dphi / 2.0);
    const double s2      = std::sin(dlam / 2.0);
    const double h       = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

// Empirical quantile with linear interpolation between the closest order
// statistics (index h = (n-1)q). Input must be sorted and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) {
        throw ArgumentError("quantile of empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw ArgumentError("quantile level outside [0,1]");
    }
    const double h   = static_cast<double>(sorted.size() - 1) * q;
    const size_t lo  = static_cast<size_t>(h);
    const size_t hi  = std::min(lo + 1, sorted.size() - 1);
    const double fra = h - static_cast<double>(lo);
    return sorted[lo] + fra * (sorted[hi] - sorted[lo]);
}

struct ZoneDistanceStats {
    std::string zone_id;
    int antenna_count = 0;
    double q_value_m  = 0.0;
};

using ZoneStatsMap = std::map<std::string, ZoneDistanceStats, std::less<>>;

// Per-zone quantile of the unordered pairwise antenna distances (upper
// triangle). Zones with fewer than two antennas fall back to the floor.
inline ZoneStatsMap zone_quantiles(const AntennaRegistry& registry, double q = 0.8,
                                   double fallback_floor_m = 500.0)
{
    if (q <= 0.0 || q >= 1.0) {
        throw ArgumentError("zone quantile level must lie in (0,1)");
    }
    std::map<std::string, std::vector<std::int32_t>, std::less<>> zones;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(registry.size()); ++i) {
        zones[registry.record(i).zone_id].push_back(i);
    }
    ZoneStatsMap stats;
    std::vector<double> dists;
    for (const auto& [zone_id, idxs] : zones) {
        ZoneDistanceStats s;
        s.zone_id       = zone_id;
        s.antenna_count = static_cast<int>(idxs.size());
        if (idxs.size() < 2) {
            s.q_value_m = fallback_floor_m;
        }
        else {
            dists.clear();
            for (size_t i = 0; i < idxs.size(); ++i) {
                for (size_t j = i + 1; j < idxs.size(); ++j) {
                    dists.push_back(
                        haversine_m(registry.position(idxs[i]), registry.position(idxs[j])));
                }
            }
            std::sort(dists.begin(), dists.end());
            s.q_value_m = quantile_sorted(dists, q);
        }
        stats.emplace(zone_id, std::move(s));
    }
    return stats;
}

// Minimum displacement for an activity between the two zones to count as a
// trip: the larger of the two zone quantiles.
inline double min_trip_distance(const ZoneStatsMap& stats, std::string_view zone_o,
                                std::string_view zone_d)
{
    const auto o = stats.find(zone_o);
    if (o == stats.end()) {
        throw Error("unknown zone: " + std::string(zone_o));
    }
    const auto d = stats.find(zone_d);
    if (d == stats.end()) {
        throw Error("unknown zone: " + std::string(zone_d));
    }
    return std::max(o->second.q_value_m, d->second.q_value_m);
}

inline std::string zone_stats_csv(const ZoneStatsMap& stats)
{
    std::string out = "zone_id,antenna_count,q_value_m\n";
    for (const auto& [zone_id, s] : stats) {
        out += zone_id;
        out += ',';
        out += std::to_string(s.antenna_count);
        out += ',';
        csv::append_number(out, s.q_value_m);
        out += '\n';
    }
    return out;
}

} // namespace dayflow

#endif // DAYFLOW_GEO_HPP
