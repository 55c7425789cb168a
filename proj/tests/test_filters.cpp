/* Copyright (C) 2026 dayflow contributors
*
* Authors: dayflow contributors
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
#include "dayflow/filters.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace dayflow;

namespace
{

UserDayTrace trace_with_hour_counts(const std::vector<std::size_t>& counts_by_hour)
{
    UserDayTrace trace;
    trace.user_id = "u1";
    trace.day = make_day(2024, 3, 4);
    const LocalSeconds base = static_cast<LocalSeconds>(trace.day) * kSecondsPerDay;
    for (std::size_t hour = 0; hour < counts_by_hour.size(); ++hour) {
        for (std::size_t i = 0; i < counts_by_hour[hour]; ++i) {
            trace.events.push_back(
                {base + static_cast<LocalSeconds>(hour) * 3600 + static_cast<LocalSeconds>(i) * 60,
                 "a1"});
        }
    }
    return trace;
}

std::vector<UserEntropy> entropies_of(const std::vector<double>& hs)
{
    std::vector<UserEntropy> out;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        out.push_back({"u" + std::to_string(i), 0, hs[i], 1});
    }
    return out;
}

std::vector<char> retained_ids(const EntropyFilterResult& res)
{
    return res.retained;
}

} // namespace

TEST_CASE("hourly entropy")
{
    SECTION("all events in one hour give zero")
    {
        const auto e = hourly_entropy(trace_with_hour_counts({0, 0, 5}));
        REQUIRE(e.h == 0.0);
        REQUIRE(e.event_count == 5);
        REQUIRE(e.user_id == "u1");
    }

    SECTION("even spread over k hours gives ln k")
    {
        for (std::size_t k : {2, 3, 4, 6, 8, 12, 24}) {
            std::vector<std::size_t> counts(k, 3);
            const auto e = hourly_entropy(trace_with_hour_counts(counts));
            REQUIRE(e.h == Catch::Approx(std::log(static_cast<double>(k))).margin(1e-12));
        }
    }

    SECTION("uneven split matches the direct formula")
    {
        const auto e = hourly_entropy(trace_with_hour_counts({3, 1}));
        const double expected = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
        REQUIRE(e.h == Catch::Approx(expected).margin(1e-12));
        REQUIRE(e.h == Catch::Approx(oracles::direct_entropy({3, 1})).margin(1e-15));
    }

    SECTION("entropy is invariant under hour permutation and count scaling")
    {
        const auto a = hourly_entropy(trace_with_hour_counts({4, 0, 2, 1}));
        const auto b = hourly_entropy(trace_with_hour_counts({1, 2, 0, 4}));
        REQUIRE(a.h == Catch::Approx(b.h).margin(1e-12));
        const auto doubled = hourly_entropy(trace_with_hour_counts({8, 0, 4, 2}));
        REQUIRE(a.h == Catch::Approx(doubled.h).margin(1e-12));
    }

    SECTION("bins are hours of the trace's own day")
    {
        UserDayTrace trace;
        trace.user_id = "u1";
        trace.day = make_day(2024, 3, 4);
        const LocalSeconds base = static_cast<LocalSeconds>(trace.day) * kSecondsPerDay;
        trace.events.push_back({base, "a1"});
        trace.events.push_back({base + 3599, "a1"});
        trace.events.push_back({base + 86399, "a1"});
        const auto e = hourly_entropy(trace);
        // Two events in hour 0, one in hour 23.
        const double expected = -(2.0 / 3.0 * std::log(2.0 / 3.0) + 1.0 / 3.0 * std::log(1.0 / 3.0));
        REQUIRE(e.h == Catch::Approx(expected).margin(1e-12));
    }

    SECTION("empty trace is fatal")
    {
        REQUIRE_THROWS_AS(hourly_entropy(UserDayTrace{"u1", 0, {}}), ArgumentError);
    }
}

TEST_CASE("entropy filter with fixed cuts")
{
    const auto entropies = entropies_of({0.0, 0.3, 0.4, 0.65, 0.9, 0.95, 3.0});
    const auto res = entropy_filter(entropies, FilterMode::fixed, 0.4, 0.9);

    SECTION("cuts are taken verbatim and both ends are inclusive")
    {
        REQUIRE(res.cut_low == 0.4);
        REQUIRE(res.cut_high == 0.9);
        REQUIRE(retained_ids(res) == std::vector<char>{0, 0, 1, 1, 1, 0, 0});
        REQUIRE(res.retained_count == 3);
    }

    SECTION("degenerate cut ordering is fatal")
    {
        REQUIRE_THROWS_AS(entropy_filter(entropies, FilterMode::fixed, 0.9, 0.4), ArgumentError);
        REQUIRE_THROWS_AS(entropy_filter(entropies, FilterMode::fixed, 0.5, 0.5), ArgumentError);
    }
}

TEST_CASE("entropy filter with quantile cuts")
{
    SECTION("fixture: deciles with levels 0.25 and 0.90")
    {
        const auto entropies =
            entropies_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
        const auto res = entropy_filter(entropies, FilterMode::quantile, 0.25, 0.90);
        // h = (10-1)*0.25 = 2.25 -> 0.3 + 0.25*0.1; h = 9*0.9 = 8.1 -> 0.9 + 0.1*0.1.
        REQUIRE(res.cut_low == Catch::Approx(0.325).margin(1e-12));
        REQUIRE(res.cut_high == Catch::Approx(0.91).margin(1e-12));
        REQUIRE(retained_ids(res) == std::vector<char>{0, 0, 0, 1, 1, 1, 1, 1, 1, 0});
        REQUIRE(res.retained_count == 6);
    }

    SECTION("random populations match the sort-and-slice reference")
    {
        std::mt19937 rng(71);
        std::uniform_real_distribution<double> level_lo(0.05, 0.4);
        std::uniform_real_distribution<double> level_hi(0.6, 0.95);
        std::uniform_real_distribution<double> val(0.0, 3.2);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> hs(2 + rng() % 200);
            for (std::size_t i = 0; i < hs.size(); ++i) {
                // duplicates on purpose every few draws
                hs[i] = (i > 0 && rng() % 4 == 0) ? hs[rng() % i] : val(rng);
            }
            const double lo = level_lo(rng);
            const double hi = level_hi(rng);
            const auto res = entropy_filter(entropies_of(hs), FilterMode::quantile, lo, hi);
            REQUIRE(res.retained == oracles::quantile_retention(hs, lo, hi));
        }
    }

    SECTION("empty population is fatal in quantile mode")
    {
        REQUIRE_THROWS_AS(entropy_filter({}, FilterMode::quantile, 0.25, 0.9), ArgumentError);
    }
}

TEST_CASE("filter mode names")
{
    REQUIRE(parse_filter_mode("fixed") == FilterMode::fixed);
    REQUIRE(parse_filter_mode("quantile") == FilterMode::quantile);
    REQUIRE_FALSE(parse_filter_mode("auto").has_value());
    REQUIRE(to_string(FilterMode::fixed) == "fixed");
    REQUIRE(to_string(FilterMode::quantile) == "quantile");
}

TEST_CASE("entropy artifacts")
{
    SECTION("csv layout")
    {
        std::vector<UserEntropy> entropies{{"u1", make_day(2024, 3, 4), 0.5, 12}};
        const auto text = entropy_csv(entropies);
        REQUIRE(text == "user_id,day,h,event_count\nu1,2024-03-04,0.5,12\n");
    }

    SECTION("report json counts discarded users")
    {
        const auto entropies = entropies_of({0.1, 0.5, 0.8, 2.0});
        const auto res = entropy_filter(entropies, FilterMode::fixed, 0.4, 0.9);
        const auto j = filter_report_json(FilterMode::fixed, res);
        REQUIRE(j["mode"] == "fixed");
        REQUIRE(j["cut_low"] == 0.4);
        REQUIRE(j["cut_high"] == 0.9);
        REQUIRE(j["total"] == 4);
        REQUIRE(j["retained"] == 2);
        REQUIRE(j["discarded"] == 2);
    }
}
