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
#ifndef DAYFLOW_JOURNEY_HPP
#define DAYFLOW_JOURNEY_HPP

#include "dayflow/geo.hpp"
#include "dayflow/timetable.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dayflow {

enum class ActivityKind : std::uint8_t {
    trip,
    non_trip,
    unknown,
};

inline std::string_view to_string(ActivityKind k)
{
    switch (k) {
    case ActivityKind::trip:
        return "trip";
    case ActivityKind::non_trip:
        return "non_trip";
    default:
        return "unknown";
    }
}

inline std::optional<ActivityKind> parse_activity_kind(std::string_view s)
{
    if (s == "trip") {
        return ActivityKind::trip;
    }
    if (s == "non_trip") {
        return ActivityKind::non_trip;
    }
    if (s == "unknown") {
        return ActivityKind::unknown;
    }
    return std::nullopt;
}

struct ClassifierConfig {
    double unknown_km = 100.0;       // covered path above this cannot be a daily activity
    double non_trip_min = 180.0;     // minutes; longer stays put even when displaced
    double trip_min_duration = 15.0; // minutes
    double sandwich_min = 15.0;      // minutes; stay between trips at most this long is absorbed
};

// Candidate activity between two consecutive turning points. displacement is
// the endpoint chord, covered the accumulated path between them.
struct Segment {
    TimetablePoint start;
    TimetablePoint end;
    double duration_min;
    double displacement_m;
    double covered_m;
};

inline Segment make_segment(const TimetablePoint& start, const TimetablePoint& end,
                            const AntennaRegistry& registry)
{
    Segment s;
    s.start          = start;
    s.end            = end;
    s.duration_min   = static_cast<double>(end.timestamp - start.timestamp) / 60.0;
    s.displacement_m = haversine_m(registry.position(start.antenna), registry.position(end.antenna));
    s.covered_m      = end.d_m - start.d_m;
    return s;
}

// Fixed rule order: implausibly long paths are unknown; short displacements
// and over-long durations are stays; the 15..180 minute window with a real
// displacement is a trip; everything else stays unknown.
inline ActivityKind classify_segment(const Segment& seg, double d_min_m,
                                     const ClassifierConfig& limits = {})
{
    if (seg.covered_m > limits.unknown_km * 1000.0) {
        return ActivityKind::unknown;
    }
    if (seg.displacement_m < d_min_m) {
        return ActivityKind::non_trip;
    }
    if (seg.duration_min > limits.non_trip_min) {
        return ActivityKind::non_trip;
    }
    if (seg.duration_min >= limits.trip_min_duration) {
        return ActivityKind::trip;
    }
    return ActivityKind::unknown;
}

struct Activity {
    ActivityKind kind;
    LocalSeconds t_origin;
    LocalSeconds t_destination;
    std::string antenna_origin;
    std::string antenna_destination;
    std::string zone_origin;
    std::string zone_destination;
    std::string municipality_origin;
    std::string municipality_destination;
    LatLon p_origin;
    LatLon p_destination;

    double duration_min() const
    {
        return static_cast<double>(t_destination - t_origin) / 60.0;
    }

    friend bool operator==(const Activity&, const Activity&) = default;
};

struct DailyJourney {
    std::string user_id;
    DayNumber day = 0;
    std::vector<Activity> activities;
};

inline Activity make_activity(ActivityKind kind, const TimetablePoint& start,
                              const TimetablePoint& end, const AntennaRegistry& registry)
{
    const AntennaRecord& a = registry.record(start.antenna);
    const AntennaRecord& b = registry.record(end.antenna);
    Activity act;
    act.kind                     = kind;
    act.t_origin                 = start.timestamp;
    act.t_destination            = end.timestamp;
    act.antenna_origin           = a.antenna_id;
    act.antenna_destination      = b.antenna_id;
    act.zone_origin              = a.zone_id;
    act.zone_destination         = b.zone_id;
    act.municipality_origin      = a.municipality_id;
    act.municipality_destination = b.municipality_id;
    act.p_origin                 = LatLon{a.lat, a.lon};
    act.p_destination            = LatLon{b.lat, b.lon};
    return act;
}

// Classify every segment between consecutive turning points. d_min per
// segment is the larger zone quantile of its two endpoint zones.
inline std::vector<Activity> classified_activities(const Timetable& simplified,
                                                   const AntennaRegistry& registry,
                                                   const ZoneStatsMap& zones,
                                                   const ClassifierConfig& limits = {})
{
    std::vector<Activity> acts;
    if (simplified.points.size() < 2) {
        return acts;
    }
    acts.reserve(simplified.points.size() - 1);
    for (std::size_t i = 0; i + 1 < simplified.points.size(); ++i) {
        const Segment seg = make_segment(simplified.points[i], simplified.points[i + 1], registry);
        const double d_min =
            min_trip_distance(zones, registry.record(seg.start.antenna).zone_id,
                              registry.record(seg.end.antenna).zone_id);
        acts.push_back(
            make_activity(classify_segment(seg, d_min, limits), seg.start, seg.end, registry));
    }
    return acts;
}

// Canonical merge. Stays of at most sandwich_min minutes flanked by trips are
// absorbed into them, then maximal equal-kind runs collapse to one activity.
// The absorption test works on maximal runs, so a chain of short stays between
// two trips counts by its total duration; one pass reaches the fixpoint
// because absorbed runs only ever turn into trips and their neighbors already
// are trips.
inline std::vector<Activity> merge_activities(const std::vector<Activity>& classified,
                                              double sandwich_min = 15.0)
{
    std::vector<Activity> out;
    if (classified.empty()) {
        return out;
    }
    for (std::size_t i = 0; i + 1 < classified.size(); ++i) {
        if (classified[i].t_destination != classified[i + 1].t_origin) {
            throw Error("activities are not contiguous");
        }
    }
    // maximal runs of equal kind: [first, last] index pairs
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= classified.size(); ++i) {
        if (i == classified.size() || classified[i].kind != classified[start].kind) {
            runs.emplace_back(start, i - 1);
            start = i;
        }
    }
    std::vector<ActivityKind> kinds(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        kinds[r] = classified[runs[r].first].kind;
    }
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
        if (r == 0 || kinds[r] != ActivityKind::non_trip) {
            continue;
        }
        if (kinds[r - 1] != ActivityKind::trip || kinds[r + 1] != ActivityKind::trip) {
            continue;
        }
        const double total_min =
            static_cast<double>(classified[runs[r].second].t_destination -
                                classified[runs[r].first].t_origin) /
            60.0;
        if (total_min <= sandwich_min) {
            kinds[r] = ActivityKind::trip;
        }
    }
    for (std::size_t r = 0; r < runs.size(); ++r) {
        std::size_t last = r;
        while (last + 1 < runs.size() && kinds[last + 1] == kinds[r]) {
            ++last;
        }
        const Activity& first_act = classified[runs[r].first];
        const Activity& last_act  = classified[runs[last].second];
        Activity merged;
        merged.kind                     = kinds[r];
        merged.t_origin                 = first_act.t_origin;
        merged.t_destination            = last_act.t_destination;
        merged.antenna_origin           = first_act.antenna_origin;
        merged.antenna_destination      = last_act.antenna_destination;
        merged.zone_origin              = first_act.zone_origin;
        merged.zone_destination         = last_act.zone_destination;
        merged.municipality_origin      = first_act.municipality_origin;
        merged.municipality_destination = last_act.municipality_destination;
        merged.p_origin                 = first_act.p_origin;
        merged.p_destination            = last_act.p_destination;
        out.push_back(std::move(merged));
        r = last;
    }
    return out;
}

struct JourneyConfig {
    double epsilon_m = 500.0;
    double time_scale_m_per_min = 100.0;
    ClassifierConfig limits;
};

inline DailyJourney build_journey(const UserDayTrace& trace, const AntennaRegistry& registry,
                                  const ZoneStatsMap& zones, const JourneyConfig& cfg = {})
{
    const Timetable tt   = build_timetable(trace, registry);
    const Timetable simp = simplify_rdp(tt, cfg.epsilon_m, cfg.time_scale_m_per_min);
    DailyJourney j;
    j.user_id    = trace.user_id;
    j.day        = trace.day;
    j.activities = merge_activities(classified_activities(simp, registry, zones, cfg.limits),
                                    cfg.limits.sandwich_min);
    return j;
}

struct TripRecord {
    std::string municipality_origin;
    std::string municipality_destination;
    DayNumber day = 0;
    LocalSeconds t_start = 0;
    double duration_min = 0.0;
    double displacement_m = 0.0;
};

struct TripExtract {
    std::vector<TripRecord> trips;
    // true when the journey holds neither trips nor stays, only unknowns
    bool exclude_user = false;
};

inline TripExtract extract_trips(const DailyJourney& j)
{
    TripExtract out;
    bool any_known = false;
    for (const auto& act : j.activities) {
        if (act.kind == ActivityKind::unknown) {
            continue;
        }
        any_known = true;
        if (act.kind != ActivityKind::trip) {
            continue;
        }
        TripRecord rec;
        rec.municipality_origin      = act.municipality_origin;
        rec.municipality_destination = act.municipality_destination;
        rec.day                      = j.day;
        rec.t_start                  = act.t_origin;
        rec.duration_min             = act.duration_min();
        rec.displacement_m           = haversine_m(act.p_origin, act.p_destination);
        out.trips.push_back(std::move(rec));
    }
    out.exclude_user = !any_known;
    return out;
}

inline nlohmann::json journey_json(const DailyJourney& j)
{
    nlohmann::json acts = nlohmann::json::array();
    for (const auto& a : j.activities) {
        acts.push_back({
            {"kind", std::string(to_string(a.kind))},
            {"t_o", format_datetime(a.t_origin)},
            {"t_d", format_datetime(a.t_destination)},
            {"antenna_o", a.antenna_origin},
            {"antenna_d", a.antenna_destination},
            {"zone_o", a.zone_origin},
            {"zone_d", a.zone_destination},
            {"mun_o", a.municipality_origin},
            {"mun_d", a.municipality_destination},
        });
    }
    return nlohmann::json{
        {"user_id", j.user_id},
        {"day", format_date(j.day)},
        {"activities", std::move(acts)},
    };
}

// Restore a journey from its serialized form; endpoint positions come from
// the registry since the line format stores antenna ids only.
inline DailyJourney journey_from_json(const nlohmann::json& v, const AntennaRegistry& registry)
{
    DailyJourney j;
    j.user_id      = v.at("user_id").get<std::string>();
    const auto day = parse_date(v.at("day").get<std::string>());
    if (!day) {
        throw Error("bad day in journey record: " + v.at("day").get<std::string>());
    }
    j.day = *day;
    for (const auto& av : v.at("activities")) {
        Activity a;
        const auto kind = parse_activity_kind(av.at("kind").get<std::string>());
        if (!kind) {
            throw Error("bad activity kind: " + av.at("kind").get<std::string>());
        }
        a.kind          = *kind;
        const auto t_o  = parse_datetime(av.at("t_o").get<std::string>());
        const auto t_d  = parse_datetime(av.at("t_d").get<std::string>());
        if (!t_o || !t_d) {
            throw Error("bad activity timestamp in journey record");
        }
        a.t_origin                 = *t_o;
        a.t_destination            = *t_d;
        a.antenna_origin           = av.at("antenna_o").get<std::string>();
        a.antenna_destination      = av.at("antenna_d").get<std::string>();
        a.zone_origin              = av.at("zone_o").get<std::string>();
        a.zone_destination         = av.at("zone_d").get<std::string>();
        a.municipality_origin      = av.at("mun_o").get<std::string>();
        a.municipality_destination = av.at("mun_d").get<std::string>();
        const auto* ra             = registry.find(a.antenna_origin);
        const auto* rb             = registry.find(a.antenna_destination);
        if (!ra || !rb) {
            throw Error("unknown antenna in journey record");
        }
        a.p_origin      = LatLon{ra->lat, ra->lon};
        a.p_destination = LatLon{rb->lat, rb->lon};
        j.activities.push_back(std::move(a));
    }
    return j;
}

} // namespace dayflow

#endif // DAYFLOW_JOURNEY_HPP
