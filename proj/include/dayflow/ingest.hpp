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
#ifndef DAYFLOW_INGEST_HPP
#define DAYFLOW_INGEST_HPP

#include "dayflow/csv.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dayflow {

struct ParseOptions {
    // Fatal "corrupt input" when more than this fraction of data rows is
    // rejected (strictly greater; empty files never trip it).
    double corrupt_threshold = 0.5;
};

// Registry CSV: antenna_id,lat,lon,zone_id,municipality_id. A first line whose
// leading field is the literal column name is treated as a header.
inline AntennaRegistry parse_registry(std::string_view buffer)
{
    AntennaRegistry reg;
    csv::LineCursor cursor(buffer);
    std::vector<std::string_view> fields;
    bool first = true;
    size_t line_no = 0;
    while (auto line = cursor.next()) {
        ++line_no;
        if (line->empty()) {
            continue;
        }
        csv::split(*line, fields);
        if (first) {
            first = false;
            if (!fields.empty() && fields[0] == "antenna_id") {
                continue;
            }
        }
        if (fields.size() != 5) {
            throw Error("registry line " + std::to_string(line_no) + ": expected 5 fields, got " +
                        std::to_string(fields.size()));
        }
        const auto lat = csv::parse_double(fields[1]);
        const auto lon = csv::parse_double(fields[2]);
        if (!lat || !lon) {
            throw Error("registry line " + std::to_string(line_no) + ": bad coordinates");
        }
        if (fields[3].empty() || fields[4].empty()) {
            throw Error("registry line " + std::to_string(line_no) + ": empty zone or municipality");
        }
        reg.add(AntennaRecord{std::string(fields[0]), *lat, *lon, std::string(fields[3]),
                              std::string(fields[4])});
    }
    return reg;
}

inline AntennaRegistry load_registry(const std::string& path)
{
    return parse_registry(csv::read_file(path));
}

// CDR CSV: user_id,antenna_id,timestamp,kind. Returns every parseable event in
// input order plus per-reason rejection counts. Unknown antennas are rejected,
// never guessed.
inline std::pair<std::vector<CdrEvent>, IngestReport>
parse_cdr(std::string_view buffer, const AntennaRegistry& registry, const ParseOptions& opts = {})
{
    std::vector<CdrEvent> events;
    IngestReport report;
    csv::LineCursor cursor(buffer);
    std::vector<std::string_view> fields;
    bool first = true;
    while (auto line = cursor.next()) {
        if (line->empty()) {
            continue;
        }
        csv::split(*line, fields);
        if (first) {
            first = false;
            if (!fields.empty() && fields[0] == "user_id") {
                continue;
            }
        }
        ++report.rows_total;
        if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
            ++report.malformed;
            continue;
        }
        const auto kind = parse_event_kind(fields[3]);
        if (!kind) {
            ++report.malformed;
            continue;
        }
        const auto ts = parse_datetime(fields[2]);
        if (!ts) {
            ++report.bad_timestamp;
            continue;
        }
        if (registry.index_of(fields[1]) < 0) {
            ++report.unknown_antenna;
            continue;
        }
        ++report.rows_ok;
        events.push_back(CdrEvent{std::string(fields[0]), std::string(fields[1]), *ts, *kind});
    }
    if (report.rows_total > 0 &&
        static_cast<double>(report.rejected()) >
            opts.corrupt_threshold * static_cast<double>(report.rows_total)) {
        throw Error("corrupt input: " + std::to_string(report.rejected()) + " of " +
                    std::to_string(report.rows_total) + " rows rejected");
    }
    return {std::move(events), report};
}

inline std::pair<std::vector<CdrEvent>, IngestReport>
load_cdr(const std::string& path, const AntennaRegistry& registry, const ParseOptions& opts = {})
{
    return parse_cdr(csv::read_file(path), registry, opts);
}

// One trace per (user, local calendar day). Events within a trace are sorted
// by timestamp; equal timestamps keep input order. Traces come out sorted by
// (user_id, day) so downstream output is reproducible.
inline std::vector<UserDayTrace> group_user_days(std::span<const CdrEvent> events)
{
    struct Key {
        std::string_view user;
        DayNumber day;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const
        {
            const size_t h = std::hash<std::string_view>{}(k.user);
            return h ^ (static_cast<size_t>(static_cast<std::uint32_t>(k.day)) * 0x9E3779B97F4A7C15ULL);
        }
    };

    std::vector<UserDayTrace> traces;
    std::unordered_map<Key, size_t, KeyHash> slots;
    slots.reserve(events.size() / 8 + 16);
    for (const CdrEvent& ev : events) {
        const Key key{ev.user_id, day_of(ev.timestamp)};
        const auto [it, inserted] = slots.try_emplace(key, traces.size());
        if (inserted) {
            traces.push_back(UserDayTrace{ev.user_id, key.day, {}});
        }
        traces[it->second].events.push_back(TraceEvent{ev.timestamp, ev.antenna_id});
    }
    for (auto& trace : traces) {
        std::stable_sort(trace.events.begin(), trace.events.end(),
                         [](const TraceEvent& a, const TraceEvent& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
    std::sort(traces.begin(), traces.end(), [](const UserDayTrace& a, const UserDayTrace& b) {
        if (a.user_id != b.user_id) {
            return a.user_id < b.user_id;
        }
        return a.day < b.day;
    });
    return traces;
}

inline nlohmann::json ingest_report_json(const IngestReport& r)
{
    return nlohmann::json{
        {"rows_total", r.rows_total},         {"rows_ok", r.rows_ok},
        {"bad_timestamp", r.bad_timestamp},   {"unknown_antenna", r.unknown_antenna},
        {"malformed", r.malformed},           {"rejected", r.rejected()},
    };
}

} // namespace dayflow

#endif // DAYFLOW_INGEST_HPP
