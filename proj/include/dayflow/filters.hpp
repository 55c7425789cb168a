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
#ifndef DAYFLOW_FILTERS_HPP
#define DAYFLOW_FILTERS_HPP

#include "dayflow/csv.hpp"
#include "dayflow/geo.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace dayflow {

struct UserEntropy {
    std::string user_id;
    DayNumber day = 0;
    double h = 0.0; // nats, in [0, ln 24]
    std::size_t event_count = 0;
};

// Shannon entropy of the event distribution over the 24 hours of the day.
// Zero-count bins contribute nothing (0 ln 0 := 0).
inline UserEntropy hourly_entropy(const UserDayTrace& trace)
{
    if (trace.events.empty()) {
        throw ArgumentError("entropy of empty trace");
    }
    std::array<std::size_t, 24> bins{};
    const LocalSeconds day_start = static_cast<LocalSeconds>(trace.day) * kSecondsPerDay;
    for (const auto& ev : trace.events) {
        const auto hour = static_cast<std::size_t>((ev.timestamp - day_start) / 3600);
        bins[std::min<std::size_t>(hour, 23)] += 1;
    }
    const double total = static_cast<double>(trace.events.size());
    double h           = 0.0;
    for (const auto count : bins) {
        if (count == 0) {
            continue;
        }
        const double p = static_cast<double>(count) / total;
        h -= p * std::log(p);
    }
    return UserEntropy{trace.user_id, trace.day, h, trace.events.size()};
}

enum class FilterMode : std::uint8_t {
    fixed,
    quantile,
};

inline std::optional<FilterMode> parse_filter_mode(std::string_view s)
{
    if (s == "fixed") {
        return FilterMode::fixed;
    }
    if (s == "quantile") {
        return FilterMode::quantile;
    }
    return std::nullopt;
}

inline std::string_view to_string(FilterMode m)
{
    return m == FilterMode::fixed ? "fixed" : "quantile";
}

struct EntropyFilterResult {
    double cut_low = 0.0;
    double cut_high = 0.0;
    std::vector<char> retained; // parallel to the input sequence
    std::size_t retained_count = 0;
};

// Keep users with cut_low <= h <= cut_high. In fixed mode the cuts are the
// given entropy values; in quantile mode they are the empirical quantiles of
// the input at the given levels.
inline EntropyFilterResult entropy_filter(std::span<const UserEntropy> entropies, FilterMode mode,
                                          double low = 0.4, double high = 0.9)
{
    if (low >= high) {
        throw ArgumentError("lower entropy cut must lie below the upper cut");
    }
    EntropyFilterResult res;
    if (mode == FilterMode::fixed) {
        res.cut_low  = low;
        res.cut_high = high;
    }
    else {
        std::vector<double> hs;
        hs.reserve(entropies.size());
        for (const auto& e : entropies) {
            hs.push_back(e.h);
        }
        std::sort(hs.begin(), hs.end());
        res.cut_low  = quantile_sorted(hs, low);
        res.cut_high = quantile_sorted(hs, high);
    }
    res.retained.resize(entropies.size(), 0);
    for (std::size_t i = 0; i < entropies.size(); ++i) {
        if (entropies[i].h >= res.cut_low && entropies[i].h <= res.cut_high) {
            res.retained[i]    = 1;
            res.retained_count += 1;
        }
    }
    return res;
}

inline std::string entropy_csv(std::span<const UserEntropy> entropies)
{
    std::string out = "user_id,day,h,event_count\n";
    for (const auto& e : entropies) {
        out += e.user_id;
        out += ',';
        out += format_date(e.day);
        out += ',';
        csv::append_number(out, e.h);
        out += ',';
        out += std::to_string(e.event_count);
        out += '\n';
    }
    return out;
}

inline nlohmann::json filter_report_json(FilterMode mode, const EntropyFilterResult& res)
{
    return nlohmann::json{
        {"mode", std::string(to_string(mode))},
        {"cut_low", res.cut_low},
        {"cut_high", res.cut_high},
        {"total", res.retained.size()},
        {"retained", res.retained_count},
        {"discarded", res.retained.size() - res.retained_count},
    };
}

} // namespace dayflow

#endif // DAYFLOW_FILTERS_HPP
