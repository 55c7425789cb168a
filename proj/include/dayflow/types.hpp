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
#ifndef DAYFLOW_TYPES_HPP
#define DAYFLOW_TYPES_HPP

#include "dayflow/csv.hpp"
#include "dayflow/timeutil.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dayflow {

enum class EventKind : std::uint8_t {
    call,
    sms,
    data,
};

inline std::optional<EventKind> parse_event_kind(std::string_view s)
{
    if (s == "call") {
        return EventKind::call;
    }
    if (s == "sms") {
        return EventKind::sms;
    }
    if (s == "data") {
        return EventKind::data;
    }
    return std::nullopt;
}

inline std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::call:
        return "call";
    case EventKind::sms:
        return "sms";
    default:
        return "data";
    }
}

// One anonymized log row. Duplicates are kept as-is; timetable construction
// collapses zero-displacement repeats later.
struct CdrEvent {
    std::string user_id;
    std::string antenna_id;
    LocalSeconds timestamp;
    EventKind kind;
};

struct LatLon {
    double lat;
    double lon;

    friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct AntennaRecord {
    std::string antenna_id;
    double lat;
    double lon;
    std::string zone_id;
    std::string municipality_id;
};

namespace detail {

struct StringHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const
    {
        return std::hash<std::string_view>{}(s);
    }
    size_t operator()(const std::string& s) const
    {
        return std::hash<std::string_view>{}(s);
    }
};

struct StringEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const
    {
        return a == b;
    }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, StringEq>;

} // namespace detail

// Read-only after load; shared freely across worker threads.
class AntennaRegistry {
public:
    // Throws on duplicate antenna ids, out-of-range coordinates, or a zone
    // claimed by more than one municipality.
    void add(AntennaRecord rec)
    {
        if (rec.antenna_id.empty()) {
            throw Error("antenna record with empty antenna_id");
        }
        if (rec.lat < -90.0 || rec.lat > 90.0 || rec.lon < -180.0 || rec.lon > 180.0) {
            throw Error("antenna " + rec.antenna_id + " has out-of-range coordinates");
        }
        if (index_.contains(rec.antenna_id)) {
            throw Error("duplicate antenna id: " + rec.antenna_id);
        }
        const auto zit = zone_municipality_.find(rec.zone_id);
        if (zit == zone_municipality_.end()) {
            zone_municipality_.emplace(rec.zone_id, rec.municipality_id);
        }
        else if (zit->second != rec.municipality_id) {
            throw Error("zone " + rec.zone_id + " mapped to municipalities " + zit->second +
                        " and " + rec.municipality_id);
        }
        index_.emplace(rec.antenna_id, static_cast<std::int32_t>(records_.size()));
        records_.push_back(std::move(rec));
        municipalities_dirty_ = true;
    }

    std::int32_t index_of(std::string_view antenna_id) const
    {
        const auto it = index_.find(antenna_id);
        return it == index_.end() ? -1 : it->second;
    }

    const AntennaRecord& record(std::int32_t idx) const
    {
        return records_[static_cast<size_t>(idx)];
    }

    const AntennaRecord* find(std::string_view antenna_id) const
    {
        const auto idx = index_of(antenna_id);
        return idx < 0 ? nullptr : &records_[static_cast<size_t>(idx)];
    }

    LatLon position(std::int32_t idx) const
    {
        const auto& r = records_[static_cast<size_t>(idx)];
        return {r.lat, r.lon};
    }

    size_t size() const
    {
        return records_.size();
    }

    bool empty() const
    {
        return records_.empty();
    }

    const std::vector<AntennaRecord>& records() const
    {
        return records_;
    }

    std::string_view municipality_of_zone(std::string_view zone_id) const
    {
        const auto it = zone_municipality_.find(zone_id);
        if (it == zone_municipality_.end()) {
            throw Error("unknown zone: " + std::string(zone_id));
        }
        return it->second;
    }

    // Sorted unique municipality ids; fixed label order for OD matrices.
    const std::vector<std::string>& municipalities() const
    {
        if (municipalities_dirty_) {
            municipalities_.clear();
            for (const auto& r : records_) {
                municipalities_.push_back(r.municipality_id);
            }
            std::sort(municipalities_.begin(), municipalities_.end());
            municipalities_.erase(std::unique(municipalities_.begin(), municipalities_.end()),
                                  municipalities_.end());
            municipalities_dirty_ = false;
        }
        return municipalities_;
    }

private:
    std::vector<AntennaRecord> records_;
    detail::StringMap<std::int32_t> index_;
    detail::StringMap<std::string> zone_municipality_;
    mutable std::vector<std::string> municipalities_;
    mutable bool municipalities_dirty_ = true;
};

struct TraceEvent {
    LocalSeconds timestamp;
    std::string antenna_id;

    bool operator==(const TraceEvent&) const = default;
};

// All events of one user within one local calendar day, time-sorted.
struct UserDayTrace {
    std::string user_id;
    DayNumber day;
    std::vector<TraceEvent> events;

    bool operator==(const UserDayTrace&) const = default;
};

struct IngestReport {
    std::uint64_t rows_total    = 0;
    std::uint64_t rows_ok       = 0;
    std::uint64_t bad_timestamp = 0;
    std::uint64_t unknown_antenna = 0;
    std::uint64_t malformed     = 0;

    std::uint64_t rejected() const
    {
        return bad_timestamp + unknown_antenna + malformed;
    }

    IngestReport& operator+=(const IngestReport& o)
    {
        rows_total += o.rows_total;
        rows_ok += o.rows_ok;
        bad_timestamp += o.bad_timestamp;
        unknown_antenna += o.unknown_antenna;
        malformed += o.malformed;
        return *this;
    }
};

} // namespace dayflow

#endif // DAYFLOW_TYPES_HPP
