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
#ifndef DAYFLOW_TIMETABLE_HPP
#define DAYFLOW_TIMETABLE_HPP

#include "dayflow/csv.hpp"
#include "dayflow/geo.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dayflow {

// One vertex of a user-day movement diagram: x is the time of day in minutes,
// y the distance accumulated along the antenna path since the first event.
struct TimetablePoint {
    double t_min;
    double d_m;
    std::int32_t antenna; // registry index
    LocalSeconds timestamp;

    friend bool operator==(const TimetablePoint&, const TimetablePoint&) = default;
};

struct Timetable {
    std::string user_id;
    DayNumber day = 0;
    std::vector<TimetablePoint> points;
};

// One point per event; d is the running sum of consecutive inter-antenna
// great-circle distances, so repeats on one antenna add 0 but stay as points.
inline Timetable build_timetable(const UserDayTrace& trace, const AntennaRegistry& registry)
{
    if (trace.events.empty()) {
        throw ArgumentError("timetable of empty trace");
    }
    Timetable tt;
    tt.user_id = trace.user_id;
    tt.day     = trace.day;
    tt.points.reserve(trace.events.size());
    const LocalSeconds day_start = static_cast<LocalSeconds>(trace.day) * kSecondsPerDay;
    double d          = 0.0;
    std::int32_t prev = -1;
    for (const auto& ev : trace.events) {
        const std::int32_t idx = registry.index_of(ev.antenna_id);
        if (idx < 0) {
            throw Error("unknown antenna: " + ev.antenna_id);
        }
        if (prev >= 0) {
            d += haversine_m(registry.position(prev), registry.position(idx));
        }
        const double t = static_cast<double>(ev.timestamp - day_start) / 60.0;
        tt.points.push_back(TimetablePoint{t, d, idx, ev.timestamp});
        prev = idx;
    }
    return tt;
}

// Distance from p to the segment [a,b]; the projection is clamped to the
// segment so deviations beyond either end are measured to the nearer endpoint.
inline double point_segment_distance(double px, double py, double ax, double ay, double bx,
                                     double by)
{
    const double dx   = bx - ax;
    const double dy   = by - ay;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) {
        return std::hypot(px - ax, py - ay);
    }
    double u = ((px - ax) * dx + (py - ay) * dy) / len2;
    u        = std::min(1.0, std::max(0.0, u));
    return std::hypot(px - (ax + u * dx), py - (ay + u * dy));
}

// Ramer-Douglas-Peucker vertex selection. Returns the sorted indices of the
// retained points; endpoints are always kept. On each chord the vertex with
// the largest deviation splits the range when it exceeds epsilon; equal
// deviations keep the lowest index.
inline std::vector<std::size_t> rdp_indices(std::span<const double> xs, std::span<const double> ys,
                                            double epsilon)
{
    if (xs.size() != ys.size()) {
        throw ArgumentError("coordinate arrays differ in length");
    }
    if (epsilon <= 0.0) {
        throw ArgumentError("simplification tolerance must be positive");
    }
    const std::size_t n = xs.size();
    std::vector<std::size_t> out;
    if (n <= 2) {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(i);
        }
        return out;
    }
    std::vector<char> keep(n, 0);
    keep.front() = 1;
    keep.back()  = 1;
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    stack.emplace_back(0, n - 1);
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (j - i < 2) {
            continue;
        }
        double best          = 0.0;
        std::size_t best_idx = i;
        for (std::size_t k = i + 1; k < j; ++k) {
            const double dist = point_segment_distance(xs[k], ys[k], xs[i], ys[i], xs[j], ys[j]);
            if (dist > best) {
                best     = dist;
                best_idx = k;
            }
        }
        if (best > epsilon) {
            keep[best_idx] = 1;
            stack.emplace_back(i, best_idx);
            stack.emplace_back(best_idx, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) {
            out.push_back(i);
        }
    }
    return out;
}

// Simplify in the scaled plane x = t * time_scale, y = d so the tolerance is
// a single length in meters. Points at identical (t, d) collapse to their
// first occurrence beforehand to avoid zero-length chords.
inline Timetable simplify_rdp(const Timetable& tt, double epsilon_m, double time_scale_m_per_min)
{
    if (epsilon_m <= 0.0) {
        throw ArgumentError("simplification tolerance must be positive");
    }
    if (time_scale_m_per_min <= 0.0) {
        throw ArgumentError("time scale must be positive");
    }
    if (tt.points.empty()) {
        throw ArgumentError("simplification of empty timetable");
    }
    std::vector<TimetablePoint> collapsed;
    collapsed.reserve(tt.points.size());
    for (const auto& p : tt.points) {
        if (!collapsed.empty() && collapsed.back().t_min == p.t_min &&
            collapsed.back().d_m == p.d_m) {
            continue;
        }
        collapsed.push_back(p);
    }
    std::vector<double> xs(collapsed.size());
    std::vector<double> ys(collapsed.size());
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        xs[i] = collapsed[i].t_min * time_scale_m_per_min;
        ys[i] = collapsed[i].d_m;
    }
    const auto idxs = rdp_indices(xs, ys, epsilon_m);
    Timetable out;
    out.user_id = tt.user_id;
    out.day     = tt.day;
    out.points.reserve(idxs.size());
    for (const auto i : idxs) {
        out.points.push_back(collapsed[i]);
    }
    return out;
}

// Plot-ready dump of a full timetable with a 0/1 marker on the points the
// simplified version kept.
inline std::string timetable_csv(const Timetable& full, const Timetable& simplified,
                                 const AntennaRegistry& registry)
{
    std::string out = "t_min,d_m,antenna_id,retained\n";
    std::size_t next = 0;
    for (const auto& p : full.points) {
        const bool kept = next < simplified.points.size() && simplified.points[next] == p;
        if (kept) {
            ++next;
        }
        csv::append_number(out, p.t_min);
        out += ',';
        csv::append_number(out, p.d_m);
        out += ',';
        out += registry.record(p.antenna).antenna_id;
        out += ',';
        out += kept ? '1' : '0';
        out += '\n';
    }
    return out;
}

} // namespace dayflow

#endif // DAYFLOW_TIMETABLE_HPP
