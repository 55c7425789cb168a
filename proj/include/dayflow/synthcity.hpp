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
#ifndef DAYFLOW_SYNTHCITY_HPP
#define DAYFLOW_SYNTHCITY_HPP

#include "dayflow/csv.hpp"
#include "dayflow/geo.hpp"
#include "dayflow/journey.hpp"
#include "dayflow/odflow.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dayflow {

// Deterministic random stream with every derivation pinned so another
// implementation can reproduce it from the seed alone:
//   raw      = mt19937_64 output
//   uniform  = (raw >> 11) * 2^-53, in [0, 1)
//   below(n) = raw & mask rejected until < n, mask = smallest 2^k - 1 >= n - 1
//   bernoulli(p) = uniform() < p
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : gen_(seed)
    {
    }

    std::uint64_t next()
    {
        return gen_();
    }

    double uniform()
    {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t below(std::uint64_t n)
    {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
        for (;;) {
            const std::uint64_t v = gen_() & mask;
            if (v < n) {
                return v;
            }
        }
    }

    std::int64_t range_int(std::int64_t lo, std::int64_t hi) // inclusive bounds
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double range_double(double lo, double hi)
    {
        return lo + uniform() * (hi - lo);
    }

    bool bernoulli(double p)
    {
        return uniform() < p;
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct SynthConfig {
    std::uint64_t seed = 20240304;
    int municipalities = 9;
    int zones_per_municipality = 4;
    int antennas_per_zone = 3;
    double antenna_radius_m = 200.0; // antenna scatter around its zone center
    int users = 1000;
    int trips_min = 2;
    int trips_max = 4;
    double speed_kmh_min = 5.0;
    double speed_kmh_max = 25.0;
    // Dwells outlast the stay-duration cutoff of the classifier, so a stop
    // between two rides reads as a stay on duration alone even when antenna
    // jitter makes its endpoints look displaced.
    int dwell_min = 190; // minutes
    int dwell_max = 420; // minutes
    double cadence_min = 15.0;
    double jitter = 0.1; // probability an event reports a random same-zone antenna
    DayNumber day = make_day(2024, 3, 4);
    double municipality_spacing_m = 5000.0;
    double zone_radius_m = 1800.0; // zone center scatter around its municipality center
    double vehicle_fraction = 0.0;  // circuit drivers covering an implausible distance
    double wanderer_fraction = 0.0; // slow single movers exceeding the stay duration
};

inline void validate(const SynthConfig& c)
{
    if (c.municipalities < 1 || c.zones_per_municipality < 1 || c.antennas_per_zone < 1) {
        throw ArgumentError("city needs at least one municipality, zone, and antenna");
    }
    if (c.users < 1) {
        throw ArgumentError("at least one user required");
    }
    if (c.trips_min < 0 || c.trips_min > c.trips_max) {
        throw ArgumentError("trip count range is empty");
    }
    if (c.speed_kmh_min <= 0.0 || c.speed_kmh_min > c.speed_kmh_max) {
        throw ArgumentError("speed range is empty or non-positive");
    }
    if (c.dwell_min < 1 || c.dwell_min > c.dwell_max) {
        throw ArgumentError("dwell range is empty or shorter than one minute");
    }
    if (c.cadence_min <= 0.0) {
        throw ArgumentError("event cadence must be positive");
    }
    if (c.jitter < 0.0 || c.jitter > 1.0 || c.vehicle_fraction < 0.0 || c.vehicle_fraction > 1.0 ||
        c.wanderer_fraction < 0.0 || c.wanderer_fraction > 1.0 ||
        c.vehicle_fraction + c.wanderer_fraction > 1.0) {
        throw ArgumentError("probabilities must lie in [0,1]");
    }
    if (c.antenna_radius_m <= 0.0 || c.zone_radius_m <= 0.0 || c.municipality_spacing_m <= 0.0) {
        throw ArgumentError("placement radii must be positive");
    }
}

namespace synth_detail {

constexpr double kBaseLat = 40.0;
constexpr double kBaseLon = -3.0;
constexpr double kMetersPerDegLat = 111320.0;

inline double meters_per_deg_lon()
{
    constexpr double deg = 3.14159265358979323846 / 180.0;
    return kMetersPerDegLat * std::cos(kBaseLat * deg);
}

inline LatLon offset_m(LatLon base, double east_m, double north_m)
{
    return LatLon{base.lat + north_m / kMetersPerDegLat, base.lon + east_m / meters_per_deg_lon()};
}

inline std::string padded(char prefix, std::size_t value, int width)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, value);
    return std::string(buf);
}

inline int id_width(int count)
{
    int width = 1;
    for (int v = count - 1; v >= 10; v /= 10) {
        ++width;
    }
    return width;
}

} // namespace synth_detail

struct SynthCity {
    AntennaRegistry registry;
    std::vector<std::string> mun_ids;
    std::vector<LatLon> mun_centers;
    std::vector<std::string> zone_ids;
    std::vector<LatLon> zone_centers;
    std::vector<int> zone_municipality;            // zone index -> municipality index
    std::vector<std::vector<int>> municipality_zones;
    std::vector<std::vector<std::int32_t>> zone_antennas; // zone index -> registry indices
    std::vector<int> antenna_zone;                 // registry index -> zone index
};

// Municipalities on a square grid, zones scattered inside each municipality,
// antennas scattered around each zone center.
inline SynthCity build_city(const SynthConfig& cfg, Rng& rng)
{
    using namespace synth_detail;
    SynthCity city;
    const int side  = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.municipalities))));
    const int mw    = id_width(cfg.municipalities);
    const int zw    = id_width(cfg.zones_per_municipality);
    const int aw    = id_width(cfg.antennas_per_zone);
    const LatLon o{kBaseLat, kBaseLon};
    city.municipality_zones.resize(static_cast<std::size_t>(cfg.municipalities));
    for (int m = 0; m < cfg.municipalities; ++m) {
        const double gx = static_cast<double>(m % side) - static_cast<double>(side - 1) / 2.0;
        const double gy = static_cast<double>(m / side) - static_cast<double>(side - 1) / 2.0;
        const LatLon mc = offset_m(o, gx * cfg.municipality_spacing_m, gy * cfg.municipality_spacing_m);
        const std::string mid = padded('m', static_cast<std::size_t>(m), mw);
        city.mun_ids.push_back(mid);
        city.mun_centers.push_back(mc);
        for (int z = 0; z < cfg.zones_per_municipality; ++z) {
            const double ang = rng.uniform() * 2.0 * 3.14159265358979323846;
            const double rad = std::sqrt(rng.uniform()) * cfg.zone_radius_m;
            const LatLon zc  = offset_m(mc, rad * std::cos(ang), rad * std::sin(ang));
            const std::string zid = mid + padded('z', static_cast<std::size_t>(z), zw);
            const int zone_index  = static_cast<int>(city.zone_ids.size());
            city.zone_ids.push_back(zid);
            city.zone_centers.push_back(zc);
            city.zone_municipality.push_back(m);
            city.municipality_zones[static_cast<std::size_t>(m)].push_back(zone_index);
            city.zone_antennas.emplace_back();
            for (int a = 0; a < cfg.antennas_per_zone; ++a) {
                const double aang = rng.uniform() * 2.0 * 3.14159265358979323846;
                const double arad = std::sqrt(rng.uniform()) * cfg.antenna_radius_m;
                const LatLon ap   = offset_m(zc, arad * std::cos(aang), arad * std::sin(aang));
                const std::string aid = zid + padded('a', static_cast<std::size_t>(a), aw);
                city.zone_antennas.back().push_back(
                    static_cast<std::int32_t>(city.registry.size()));
                city.antenna_zone.push_back(zone_index);
                city.registry.add(AntennaRecord{aid, ap.lat, ap.lon, zid, mid});
            }
        }
    }
    return city;
}

// Planar cell index for nearest-antenna queries; ring search widens until the
// best hit provably beats anything in farther rings. Ties fall to the lowest
// antenna index.
class NearestAntenna {
public:
    NearestAntenna(const AntennaRegistry& registry, double cell_m = 1000.0)
        : registry_(&registry)
        , cell_m_(cell_m)
    {
        using namespace synth_detail;
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(registry.size()); ++i) {
            const auto p = registry.position(i);
            cells_[key(cell_x(p), cell_y(p))].push_back(i);
        }
    }

    std::int32_t nearest(LatLon p) const
    {
        const int cx = cell_x(p);
        const int cy = cell_y(p);
        double best       = std::numeric_limits<double>::infinity();
        std::int32_t best_idx = -1;
        for (int r = 0;; ++r) {
            if (best_idx >= 0 && best <= static_cast<double>(r - 1) * cell_m_) {
                break;
            }
            if (r > 4096) {
                break; // registry is non-empty, so the scan always terminates first
            }
            scan_ring(p, cx, cy, r, best, best_idx);
        }
        return best_idx;
    }

private:
    static std::int64_t key(int x, int y)
    {
        return (static_cast<std::int64_t>(x) << 32) ^ static_cast<std::uint32_t>(y);
    }

    int cell_x(LatLon p) const
    {
        using namespace synth_detail;
        return static_cast<int>(std::floor((p.lon - kBaseLon) * meters_per_deg_lon() / cell_m_));
    }

    int cell_y(LatLon p) const
    {
        using namespace synth_detail;
        return static_cast<int>(std::floor((p.lat - kBaseLat) * kMetersPerDegLat / cell_m_));
    }

    void consider(LatLon p, std::int32_t idx, double& best, std::int32_t& best_idx) const
    {
        using namespace synth_detail;
        const auto q    = registry_->position(idx);
        const double dx = (q.lon - p.lon) * meters_per_deg_lon();
        const double dy = (q.lat - p.lat) * kMetersPerDegLat;
        const double d  = std::hypot(dx, dy);
        if (d < best || (d == best && idx < best_idx)) {
            best     = d;
            best_idx = idx;
        }
    }

    void scan_cell(LatLon p, int x, int y, double& best, std::int32_t& best_idx) const
    {
        const auto it = cells_.find(key(x, y));
        if (it == cells_.end()) {
            return;
        }
        for (const auto idx : it->second) {
            consider(p, idx, best, best_idx);
        }
    }

    void scan_ring(LatLon p, int cx, int cy, int r, double& best, std::int32_t& best_idx) const
    {
        if (r == 0) {
            scan_cell(p, cx, cy, best, best_idx);
            return;
        }
        for (int x = cx - r; x <= cx + r; ++x) {
            scan_cell(p, x, cy - r, best, best_idx);
            scan_cell(p, x, cy + r, best, best_idx);
        }
        for (int y = cy - r + 1; y <= cy + r - 1; ++y) {
            scan_cell(p, cx - r, y, best, best_idx);
            scan_cell(p, cx + r, y, best, best_idx);
        }
    }

    const AntennaRegistry* registry_;
    double cell_m_;
    std::unordered_map<std::int64_t, std::vector<std::int32_t>> cells_;
};

struct TruthActivity {
    ActivityKind kind;
    LocalSeconds t_start;
    LocalSeconds t_end;
    LatLon a;
    LatLon b;
    std::string zone_a;
    std::string zone_b;
    std::string mun_a;
    std::string mun_b;
};

struct TruthJourney {
    std::string user_id;
    DayNumber day = 0;
    std::vector<TruthActivity> activities;
};

struct GroundTruth {
    std::vector<TruthJourney> journeys;
};

struct SynthOutput {
    SynthCity city;
    std::vector<CdrEvent> events;
    GroundTruth truth;
};

namespace synth_detail {

struct Placement {
    LatLon pos;
    int zone = 0;
};

inline Placement sample_place(const SynthCity& city, const SynthConfig& cfg, int mun, Rng& rng)
{
    const auto& zones = city.municipality_zones[static_cast<std::size_t>(mun)];
    const int zone    = zones[rng.below(zones.size())];
    const double ang  = rng.uniform() * 2.0 * 3.14159265358979323846;
    const double rad  = std::sqrt(rng.uniform()) * cfg.antenna_radius_m;
    const LatLon c    = city.zone_centers[static_cast<std::size_t>(zone)];
    return Placement{offset_m(c, rad * std::cos(ang), rad * std::sin(ang)), zone};
}

// destination municipality drawn with weight 1/(index+1), never the current one
inline int pick_destination(int count, int current, Rng& rng)
{
    double total = 0.0;
    for (int j = 0; j < count; ++j) {
        if (j != current) {
            total += 1.0 / static_cast<double>(j + 1);
        }
    }
    double x = rng.uniform() * total;
    for (int j = 0; j < count; ++j) {
        if (j == current) {
            continue;
        }
        x -= 1.0 / static_cast<double>(j + 1);
        if (x <= 0.0) {
            return j;
        }
    }
    return current == count - 1 ? count - 2 : count - 1;
}

} // namespace synth_detail

// Emit the CDR stream one activity would produce: one event per cadence step
// from the start (the end instant belongs to the next activity), reported
// from the nearest antenna to the true position, or with the configured
// probability from a random antenna of the same zone.
namespace synth_detail {

template <typename PosFn>
inline void emit_events(const SynthConfig& cfg, const SynthCity& city, const NearestAntenna& near,
                        Rng& rng, const std::string& user_id, double start_min, double end_min,
                        PosFn&& pos_at, std::vector<CdrEvent>& out)
{
    const LocalSeconds day_start = static_cast<LocalSeconds>(cfg.day) * kSecondsPerDay;
    for (double t = start_min; t < end_min; t += cfg.cadence_min) {
        const LatLon p   = pos_at(t);
        std::int32_t idx = near.nearest(p);
        if (cfg.jitter > 0.0 && rng.bernoulli(cfg.jitter)) {
            const auto zone  = static_cast<std::size_t>(city.antenna_zone[static_cast<std::size_t>(idx)]);
            const auto& ants = city.zone_antennas[zone];
            idx = ants[rng.below(ants.size())];
        }
        CdrEvent ev;
        ev.user_id    = user_id;
        ev.antenna_id = city.registry.record(idx).antenna_id;
        ev.timestamp  = day_start + static_cast<LocalSeconds>(std::llround(t * 60.0));
        ev.kind       = static_cast<EventKind>(rng.below(3));
        out.push_back(std::move(ev));
    }
}

} // namespace synth_detail

inline SynthOutput generate(const SynthConfig& cfg)
{
    using namespace synth_detail;
    validate(cfg);
    SynthOutput out;
    Rng city_rng(splitmix64(cfg.seed));
    out.city = build_city(cfg, city_rng);
    const SynthCity& city = out.city;
    const NearestAntenna near(city.registry);
    const LocalSeconds day_start = static_cast<LocalSeconds>(cfg.day) * kSecondsPerDay;
    const int uw = id_width(cfg.users);
    const double day_end_min = 1435.0;

    for (int u = 0; u < cfg.users; ++u) {
        Rng rng(splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(u) + 1))));
        TruthJourney tj;
        tj.user_id = padded('u', static_cast<std::size_t>(u), uw);
        tj.day     = cfg.day;

        const double archetype = rng.uniform();
        const int home         = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.municipalities)));
        double t               = static_cast<double>(rng.range_int(360, 540));
        Placement cur          = sample_place(city, cfg, home, rng);

        const auto push_activity = [&](ActivityKind kind, double t0, double t1, Placement from,
                                       Placement to) {
            TruthActivity ta;
            ta.kind    = kind;
            ta.t_start = day_start + static_cast<LocalSeconds>(std::llround(t0 * 60.0));
            ta.t_end   = day_start + static_cast<LocalSeconds>(std::llround(t1 * 60.0));
            ta.a       = from.pos;
            ta.b       = to.pos;
            ta.zone_a  = city.zone_ids[static_cast<std::size_t>(from.zone)];
            ta.zone_b  = city.zone_ids[static_cast<std::size_t>(to.zone)];
            ta.mun_a   = city.mun_ids[static_cast<std::size_t>(
                city.zone_municipality[static_cast<std::size_t>(from.zone)])];
            ta.mun_b   = city.mun_ids[static_cast<std::size_t>(
                city.zone_municipality[static_cast<std::size_t>(to.zone)])];
            tj.activities.push_back(std::move(ta));
        };
        const auto static_pos = [&](Placement at) {
            return [pos = at.pos](double) { return pos; };
        };
        const auto line_pos = [&](Placement from, Placement to, double t0, double t1) {
            return [=](double tm) {
                const double f = (tm - t0) / (t1 - t0);
                return LatLon{from.pos.lat + f * (to.pos.lat - from.pos.lat),
                              from.pos.lon + f * (to.pos.lon - from.pos.lon)};
            };
        };

        if (archetype < cfg.vehicle_fraction && cfg.municipalities >= 2) {
            // circuit driver: bounce between two far places until the covered
            // path exceeds any plausible daily distance
            const int dest_mun = pick_destination(cfg.municipalities, home, rng);
            Placement far      = sample_place(city, cfg, dest_mun, rng);
            const double leg_km = haversine_m(cur.pos, far.pos) / 1000.0;
            const int legs      = std::max(2, static_cast<int>(std::ceil(110.0 / leg_km)));
            const double speed  = 60.0;
            const double dur    = leg_km / speed * 60.0 * static_cast<double>(legs);
            const double t1     = std::min(t + dur, day_end_min);
            push_activity(ActivityKind::unknown, t, t1, cur, cur);
            emit_events(cfg, city, near, rng, tj.user_id, t, t1,
                        [&, t0 = t](double tm) {
                            const double f    = (tm - t0) / dur * static_cast<double>(legs);
                            const int leg     = std::min(static_cast<int>(f), legs - 1);
                            const double frac = f - static_cast<double>(leg);
                            const bool fwd    = leg % 2 == 0;
                            const double g    = fwd ? frac : 1.0 - frac;
                            return LatLon{cur.pos.lat + g * (far.pos.lat - cur.pos.lat),
                                          cur.pos.lon + g * (far.pos.lon - cur.pos.lon)};
                        },
                        out.events);
            out.truth.journeys.push_back(std::move(tj));
            continue;
        }

        if (archetype < cfg.vehicle_fraction + cfg.wanderer_fraction && cfg.municipalities >= 2) {
            // slow wanderer: one drawn-out move that overstays the trip window
            const int dest_mun = pick_destination(cfg.municipalities, home, rng);
            Placement dest     = sample_place(city, cfg, dest_mun, rng);
            const double km    = haversine_m(cur.pos, dest.pos) / 1000.0;
            const double dur   = std::max(200.0, km / 1.5 * 60.0);
            const double t1    = std::min(t + dur, day_end_min);
            push_activity(ActivityKind::non_trip, t, t1, cur, dest);
            emit_events(cfg, city, near, rng, tj.user_id, t, t1, line_pos(cur, dest, t, t1),
                        out.events);
            out.truth.journeys.push_back(std::move(tj));
            continue;
        }

        const int trips_target = static_cast<int>(rng.range_int(cfg.trips_min, cfg.trips_max));
        int cur_mun            = home;
        for (int k = 0; k < trips_target && cfg.municipalities >= 2; ++k) {
            const double dwell = static_cast<double>(rng.range_int(cfg.dwell_min, cfg.dwell_max));
            const int dest_mun = pick_destination(cfg.municipalities, cur_mun, rng);
            Placement dest     = sample_place(city, cfg, dest_mun, rng);
            const double km    = haversine_m(cur.pos, dest.pos) / 1000.0;
            // Rides last 32..150 minutes: long enough that at least two cadence
            // events fall inside every ride (so the moving phase is observable
            // between consecutive events), short enough to stay clear of the
            // stay-duration cutoff. The speed range is honored when the two
            // windows intersect.
            const double v_lo = std::max(cfg.speed_kmh_min, km * 60.0 / 150.0);
            const double v_hi = std::min(cfg.speed_kmh_max, km * 60.0 / 32.0);
            const double v    = v_lo <= v_hi ? rng.range_double(v_lo, v_hi) : km * 60.0 / 96.0;
            const double ride = km / v * 60.0;
            if (t + dwell + ride + 15.0 > day_end_min) {
                break;
            }
            push_activity(ActivityKind::non_trip, t, t + dwell, cur, cur);
            emit_events(cfg, city, near, rng, tj.user_id, t, t + dwell, static_pos(cur),
                        out.events);
            t += dwell;
            push_activity(ActivityKind::trip, t, t + ride, cur, dest);
            emit_events(cfg, city, near, rng, tj.user_id, t, t + ride,
                        line_pos(cur, dest, t, t + ride), out.events);
            t += ride;
            cur     = dest;
            cur_mun = dest_mun;
        }
        push_activity(ActivityKind::non_trip, t, day_end_min, cur, cur);
        emit_events(cfg, city, near, rng, tj.user_id, t, day_end_min, static_pos(cur), out.events);
        out.truth.journeys.push_back(std::move(tj));
    }
    return out;
}

inline std::string antennas_csv(const AntennaRegistry& registry)
{
    std::string out = "antenna_id,lat,lon,zone_id,municipality_id\n";
    for (const auto& r : registry.records()) {
        out += r.antenna_id;
        out += ',';
        csv::append_number(out, r.lat);
        out += ',';
        csv::append_number(out, r.lon);
        out += ',';
        out += r.zone_id;
        out += ',';
        out += r.municipality_id;
        out += '\n';
    }
    return out;
}

inline void append_cdr_csv(std::string& out, const CdrEvent& ev)
{
    out += ev.user_id;
    out += ',';
    out += ev.antenna_id;
    out += ',';
    out += format_datetime(ev.timestamp);
    out += ',';
    out += to_string(ev.kind);
    out += '\n';
}

inline std::string cdr_csv(std::span<const CdrEvent> events)
{
    std::string out = "user_id,antenna_id,timestamp,kind\n";
    out.reserve(out.size() + events.size() * 48);
    for (const auto& ev : events) {
        append_cdr_csv(out, ev);
    }
    return out;
}

inline nlohmann::json truth_json(const TruthJourney& tj)
{
    nlohmann::json acts = nlohmann::json::array();
    for (const auto& a : tj.activities) {
        acts.push_back({
            {"kind", std::string(to_string(a.kind))},
            {"t_o", format_datetime(a.t_start)},
            {"t_d", format_datetime(a.t_end)},
            {"lat_o", a.a.lat},
            {"lon_o", a.a.lon},
            {"lat_d", a.b.lat},
            {"lon_d", a.b.lon},
            {"zone_o", a.zone_a},
            {"zone_d", a.zone_b},
            {"mun_o", a.mun_a},
            {"mun_d", a.mun_b},
        });
    }
    return nlohmann::json{
        {"user_id", tj.user_id},
        {"day", format_date(tj.day)},
        {"activities", std::move(acts)},
    };
}

inline TruthJourney truth_from_json(const nlohmann::json& v)
{
    TruthJourney tj;
    tj.user_id     = v.at("user_id").get<std::string>();
    const auto day = parse_date(v.at("day").get<std::string>());
    if (!day) {
        throw Error("bad day in truth record: " + v.at("day").get<std::string>());
    }
    tj.day = *day;
    for (const auto& av : v.at("activities")) {
        TruthActivity a;
        const auto kind = parse_activity_kind(av.at("kind").get<std::string>());
        if (!kind) {
            throw Error("bad activity kind: " + av.at("kind").get<std::string>());
        }
        a.kind         = *kind;
        const auto t_o = parse_datetime(av.at("t_o").get<std::string>());
        const auto t_d = parse_datetime(av.at("t_d").get<std::string>());
        if (!t_o || !t_d) {
            throw Error("bad activity timestamp in truth record");
        }
        a.t_start = *t_o;
        a.t_end   = *t_d;
        a.a       = LatLon{av.at("lat_o").get<double>(), av.at("lon_o").get<double>()};
        a.b       = LatLon{av.at("lat_d").get<double>(), av.at("lon_d").get<double>()};
        a.zone_a  = av.at("zone_o").get<std::string>();
        a.zone_b  = av.at("zone_d").get<std::string>();
        a.mun_a   = av.at("mun_o").get<std::string>();
        a.mun_b   = av.at("mun_d").get<std::string>();
        tj.activities.push_back(std::move(a));
    }
    return tj;
}

struct RecoveryReport {
    std::size_t true_trips = 0;
    std::size_t recovered_trips = 0;
    std::size_t matched = 0;
    double recall = 1.0;
    double precision = 1.0;
    std::optional<SpearmanResult> od;
    std::optional<double> duration_mae_min;
    std::optional<double> distance_mae_km;
};

// A recovered trip matches a true trip when both endpoints' municipalities
// agree and the time spans overlap; matching is greedy in time order and
// one-to-one per user-day.
inline RecoveryReport score_recovery(const GroundTruth& truth,
                                     std::span<const DailyJourney> journeys,
                                     const std::vector<std::string>& municipality_labels)
{
    struct RecTrip {
        const Activity* act;
        bool matched = false;
    };
    std::unordered_map<std::string, std::vector<RecTrip>> recovered;
    std::vector<TripRecord> rec_records;
    for (const auto& j : journeys) {
        auto& list = recovered[j.user_id + '\n' + format_date(j.day)];
        for (const auto& a : j.activities) {
            if (a.kind != ActivityKind::trip) {
                continue;
            }
            list.push_back(RecTrip{&a});
            TripRecord r;
            r.municipality_origin      = a.municipality_origin;
            r.municipality_destination = a.municipality_destination;
            r.day                      = j.day;
            r.t_start                  = a.t_origin;
            r.duration_min             = a.duration_min();
            r.displacement_m           = haversine_m(a.p_origin, a.p_destination);
            rec_records.push_back(std::move(r));
        }
    }

    RecoveryReport rep;
    rep.recovered_trips = rec_records.size();
    std::vector<TripRecord> true_records;
    double dur_err  = 0.0;
    double dist_err = 0.0;
    for (const auto& tj : truth.journeys) {
        auto it = recovered.find(tj.user_id + '\n' + format_date(tj.day));
        for (const auto& ta : tj.activities) {
            if (ta.kind != ActivityKind::trip) {
                continue;
            }
            rep.true_trips += 1;
            TripRecord r;
            r.municipality_origin      = ta.mun_a;
            r.municipality_destination = ta.mun_b;
            r.day                      = tj.day;
            r.t_start                  = ta.t_start;
            r.duration_min             = static_cast<double>(ta.t_end - ta.t_start) / 60.0;
            r.displacement_m           = haversine_m(ta.a, ta.b);
            true_records.push_back(r);
            if (it == recovered.end()) {
                continue;
            }
            for (auto& rt : it->second) {
                if (rt.matched || rt.act->municipality_origin != ta.mun_a ||
                    rt.act->municipality_destination != ta.mun_b) {
                    continue;
                }
                if (rt.act->t_origin >= ta.t_end || rt.act->t_destination <= ta.t_start) {
                    continue;
                }
                rt.matched = true;
                rep.matched += 1;
                dur_err += std::abs(rt.act->duration_min() - r.duration_min);
                dist_err += std::abs(haversine_m(rt.act->p_origin, rt.act->p_destination) -
                                     r.displacement_m);
                break;
            }
        }
    }
    if (rep.true_trips > 0) {
        rep.recall = static_cast<double>(rep.matched) / static_cast<double>(rep.true_trips);
    }
    if (rep.recovered_trips > 0) {
        rep.precision = static_cast<double>(rep.matched) / static_cast<double>(rep.recovered_trips);
    }
    if (rep.matched > 0) {
        rep.duration_mae_min = dur_err / static_cast<double>(rep.matched);
        rep.distance_mae_km  = dist_err / static_cast<double>(rep.matched) / 1000.0;
    }
    try {
        const ODMatrix a = build_od(true_records, municipality_labels);
        const ODMatrix b = build_od(rec_records, municipality_labels);
        rep.od           = spearman(a, b);
    }
    catch (const Error&) {
        rep.od.reset(); // degenerate matrices leave the correlation unreported
    }
    return rep;
}

inline nlohmann::json recovery_json(const RecoveryReport& r)
{
    nlohmann::json j{
        {"true_trips", r.true_trips},
        {"recovered_trips", r.recovered_trips},
        {"matched", r.matched},
        {"recall", r.recall},
        {"precision", r.precision},
    };
    j["od_rho"]           = r.od ? nlohmann::json(r.od->rho) : nlohmann::json();
    j["od_p_value"]       = r.od ? nlohmann::json(r.od->p_value) : nlohmann::json();
    j["duration_mae_min"] = r.duration_mae_min ? nlohmann::json(*r.duration_mae_min) : nlohmann::json();
    j["distance_mae_km"]  = r.distance_mae_km ? nlohmann::json(*r.distance_mae_km) : nlohmann::json();
    return j;
}

} // namespace dayflow

#endif // DAYFLOW_SYNTHCITY_HPP
