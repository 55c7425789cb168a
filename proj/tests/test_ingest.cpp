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
#include "dayflow/ingest.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace dayflow;

namespace
{

const char* kRegistryCsv = "antenna_id,lat,lon,zone_id,municipality_id\n"
                           "a1,40.0,-3.0,z1,m1\n"
                           "a2,40.01,-3.0,z1,m1\n"
                           "a3,40.5,-3.5,z2,m2\n";

AntennaRegistry small_registry()
{
    return parse_registry(kRegistryCsv);
}

} // namespace

TEST_CASE("registry parsing")
{
    SECTION("header plus rows")
    {
        const auto reg = small_registry();
        REQUIRE(reg.size() == 3);
        REQUIRE(reg.index_of("a1") == 0);
        REQUIRE(reg.index_of("a3") == 2);
        REQUIRE(reg.index_of("nope") == -1);
        REQUIRE(reg.find("a2") != nullptr);
        REQUIRE(reg.find("a2")->zone_id == "z1");
        REQUIRE(reg.find("missing") == nullptr);
        REQUIRE(reg.position(0).lat == 40.0);
        REQUIRE(reg.position(0).lon == -3.0);
    }

    SECTION("headerless input parses the same")
    {
        const auto reg = parse_registry("a1,40.0,-3.0,z1,m1\na2,41.0,-3.0,z2,m2\n");
        REQUIRE(reg.size() == 2);
    }

    SECTION("municipality list is sorted and unique")
    {
        const auto reg = parse_registry("a1,40,0,z1,mB\n"
                                        "a2,40,1,z2,mA\n"
                                        "a3,40,2,z3,mB\n");
        REQUIRE(reg.municipalities() == std::vector<std::string>{"mA", "mB"});
    }

    SECTION("zone to municipality lookup")
    {
        const auto reg = small_registry();
        REQUIRE(reg.municipality_of_zone("z1") == "m1");
        REQUIRE(reg.municipality_of_zone("z2") == "m2");
        REQUIRE_THROWS_AS(reg.municipality_of_zone("z9"), Error);
    }

    SECTION("duplicate antenna id is fatal")
    {
        REQUIRE_THROWS_WITH(parse_registry("a1,40,0,z1,m1\na1,41,0,z2,m2\n"),
                            Catch::Matchers::ContainsSubstring("duplicate antenna id: a1"));
    }

    SECTION("zone claimed by two municipalities is fatal")
    {
        REQUIRE_THROWS_WITH(parse_registry("a1,40,0,z1,m1\na2,41,0,z1,m2\n"),
                            Catch::Matchers::ContainsSubstring("zone z1"));
    }

    SECTION("bad coordinates are fatal")
    {
        REQUIRE_THROWS_AS(parse_registry("a1,abc,0,z1,m1\n"), Error);
        REQUIRE_THROWS_AS(parse_registry("a1,95.0,0,z1,m1\n"), Error);
        REQUIRE_THROWS_AS(parse_registry("a1,40.0,181.0,z1,m1\n"), Error);
    }

    SECTION("wrong field count is fatal and names the line")
    {
        REQUIRE_THROWS_WITH(parse_registry("a1,40,0,z1,m1\na2,40,0,z1\n"),
                            Catch::Matchers::ContainsSubstring("line 2"));
    }

    SECTION("empty zone or municipality is fatal")
    {
        REQUIRE_THROWS_AS(parse_registry("a1,40,0,,m1\n"), Error);
        REQUIRE_THROWS_AS(parse_registry("a1,40,0,z1,\n"), Error);
    }
}

TEST_CASE("timestamp parsing")
{
    SECTION("round trips")
    {
        const auto ts = parse_datetime("2024-03-04T08:15:30");
        REQUIRE(ts.has_value());
        REQUIRE(format_datetime(*ts) == "2024-03-04T08:15:30");
        REQUIRE(day_of(*ts) == make_day(2024, 3, 4));
        REQUIRE(minutes_of_day(*ts) == Catch::Approx(8 * 60 + 15.5));
    }

    SECTION("space separator is tolerated")
    {
        REQUIRE(parse_datetime("2024-03-04 08:15:30") == parse_datetime("2024-03-04T08:15:30"));
    }

    SECTION("calendar validation")
    {
        REQUIRE(parse_datetime("2024-02-29T00:00:00").has_value());
        REQUIRE_FALSE(parse_datetime("2023-02-29T00:00:00").has_value());
        REQUIRE_FALSE(parse_datetime("2024-02-30T00:00:00").has_value());
        REQUIRE_FALSE(parse_datetime("2024-13-01T00:00:00").has_value());
        REQUIRE_FALSE(parse_datetime("2024-03-04T25:00:00").has_value());
        REQUIRE_FALSE(parse_datetime("2024-03-04T10:61:00").has_value());
        REQUIRE_FALSE(parse_datetime("2024-03-04").has_value());
        REQUIRE_FALSE(parse_datetime("2024-03-04X08:15:30").has_value());
    }

    SECTION("dates")
    {
        REQUIRE(parse_date("1970-01-01") == DayNumber{0});
        REQUIRE(parse_date("1970-01-02") == DayNumber{1});
        REQUIRE(format_date(*parse_date("2024-03-04")) == "2024-03-04");
        REQUIRE_FALSE(parse_date("2024-3-4").has_value());
    }

    SECTION("pre-epoch timestamps floor toward earlier days")
    {
        const auto ts = parse_datetime("1969-12-31T23:00:00");
        REQUIRE(ts.has_value());
        REQUIRE(*ts < 0);
        REQUIRE(day_of(*ts) == DayNumber{-1});
        REQUIRE(minutes_of_day(*ts) == Catch::Approx(23 * 60));
    }
}

TEST_CASE("cdr parsing")
{
    const auto reg = small_registry();

    SECTION("valid rows of every kind")
    {
        const auto [events, report] = parse_cdr("user_id,antenna_id,timestamp,kind\n"
                                                "u1,a1,2024-03-04T08:00:00,call\n"
                                                "u1,a2,2024-03-04T08:10:00,sms\n"
                                                "u2,a3,2024-03-04T09:00:00,data\n",
                                                reg);
        REQUIRE(report.rows_total == 3);
        REQUIRE(report.rows_ok == 3);
        REQUIRE(report.rejected() == 0);
        REQUIRE(events.size() == 3);
        REQUIRE(events[0].user_id == "u1");
        REQUIRE(events[0].kind == EventKind::call);
        REQUIRE(events[2].antenna_id == "a3");
    }

    SECTION("headerless and CRLF input")
    {
        const auto [events, report] =
            parse_cdr("u1,a1,2024-03-04T08:00:00,call\r\nu1,a2,2024-03-04T08:10:00,sms\r\n", reg);
        REQUIRE(report.rows_ok == 2);
        REQUIRE(events.size() == 2);
    }

    SECTION("blank lines are skipped without counting")
    {
        const auto [events, report] = parse_cdr("\nu1,a1,2024-03-04T08:00:00,call\n\n", reg);
        REQUIRE(report.rows_total == 1);
        REQUIRE(events.size() == 1);
    }

    SECTION("rejection reasons are counted separately")
    {
        const auto [events, report] = parse_cdr("u1,a1,2024-03-04T08:00:00,call\n"
                                                "u1,a1,2024-02-30T08:00:00,call\n"
                                                "u1,zz,2024-03-04T08:00:00,call\n"
                                                "u1,a1,2024-03-04T08:00:00,fax\n"
                                                "u1,a1,2024-03-04T08:00:00\n"
                                                "u1,a1,2024-03-04T08:00:00,call,extra\n",
                                                reg, ParseOptions{.corrupt_threshold = 0.99});
        REQUIRE(report.rows_total == 6);
        REQUIRE(report.rows_ok == 1);
        REQUIRE(report.bad_timestamp == 1);
        REQUIRE(report.unknown_antenna == 1);
        REQUIRE(report.malformed == 3);
        REQUIRE(events.size() == 1);
    }

    SECTION("a malformed row with a bad timestamp counts as malformed")
    {
        const auto [events, report] = parse_cdr("u1,a1,2024-03-04T08:00:00,call\n"
                                                "u1,a1,2024-99-99T08:00:00\n",
                                                reg, ParseOptions{.corrupt_threshold = 0.99});
        REQUIRE(report.malformed == 1);
        REQUIRE(report.bad_timestamp == 0);
        REQUIRE(events.size() == 1);
    }

    SECTION("corrupt threshold is strictly greater")
    {
        const std::string two_bad_two_good = "u1,a1,2024-03-04T08:00:00,call\n"
                                             "u1,a1,2024-03-04T08:01:00,call\n"
                                             "u1,zz,2024-03-04T08:02:00,call\n"
                                             "u1,zz,2024-03-04T08:03:00,call\n";
        REQUIRE_NOTHROW(parse_cdr(two_bad_two_good, reg));
        const std::string three_bad_one_good = "u1,a1,2024-03-04T08:00:00,call\n"
                                               "u1,zz,2024-03-04T08:01:00,call\n"
                                               "u1,zz,2024-03-04T08:02:00,call\n"
                                               "u1,zz,2024-03-04T08:03:00,call\n";
        REQUIRE_THROWS_WITH(parse_cdr(three_bad_one_good, reg),
                            Catch::Matchers::ContainsSubstring("corrupt input"));
    }

    SECTION("empty input yields an empty report without error")
    {
        const auto [events, report] = parse_cdr("", reg);
        REQUIRE(events.empty());
        REQUIRE(report.rows_total == 0);
    }

    SECTION("report json carries every counter")
    {
        IngestReport r;
        r.rows_total = 10;
        r.rows_ok = 7;
        r.bad_timestamp = 1;
        r.unknown_antenna = 2;
        const auto j = ingest_report_json(r);
        REQUIRE(j["rows_total"] == 10);
        REQUIRE(j["rows_ok"] == 7);
        REQUIRE(j["bad_timestamp"] == 1);
        REQUIRE(j["unknown_antenna"] == 2);
        REQUIRE(j["malformed"] == 0);
        REQUIRE(j["rejected"] == 3);
    }
}

TEST_CASE("grouping events into user-day traces")
{
    const auto reg = small_registry();

    SECTION("traces sorted by user then day, events sorted by time")
    {
        const auto [events, report] = parse_cdr("u2,a1,2024-03-05T08:00:00,call\n"
                                                "u1,a2,2024-03-04T09:00:00,call\n"
                                                "u1,a1,2024-03-04T08:00:00,call\n"
                                                "u1,a3,2024-03-05T10:00:00,call\n",
                                                reg);
        const auto traces = group_user_days(events);
        REQUIRE(traces.size() == 3);
        REQUIRE(traces[0].user_id == "u1");
        REQUIRE(traces[0].day == make_day(2024, 3, 4));
        REQUIRE(traces[0].events.size() == 2);
        REQUIRE(traces[0].events[0].antenna_id == "a1");
        REQUIRE(traces[0].events[1].antenna_id == "a2");
        REQUIRE(traces[1].user_id == "u1");
        REQUIRE(traces[1].day == make_day(2024, 3, 5));
        REQUIRE(traces[2].user_id == "u2");
    }

    SECTION("midnight splits a user's stream into separate days")
    {
        const auto [events, report] = parse_cdr("u1,a1,2024-03-04T23:59:59,call\n"
                                                "u1,a2,2024-03-05T00:00:00,call\n",
                                                reg);
        const auto traces = group_user_days(events);
        REQUIRE(traces.size() == 2);
        REQUIRE(traces[0].day + 1 == traces[1].day);
    }

    SECTION("equal timestamps keep input order")
    {
        const auto [events, report] = parse_cdr("u1,a3,2024-03-04T08:00:00,call\n"
                                                "u1,a1,2024-03-04T08:00:00,call\n"
                                                "u1,a2,2024-03-04T07:00:00,call\n",
                                                reg);
        const auto traces = group_user_days(events);
        REQUIRE(traces.size() == 1);
        REQUIRE(traces[0].events[0].antenna_id == "a2");
        REQUIRE(traces[0].events[1].antenna_id == "a3");
        REQUIRE(traces[0].events[2].antenna_id == "a1");
    }

    SECTION("random streams match a map-based reference grouping")
    {
        std::mt19937 rng(99);
        std::vector<CdrEvent> events;
        const LocalSeconds base = static_cast<LocalSeconds>(make_day(2024, 3, 4)) * kSecondsPerDay;
        for (int i = 0; i < 500; ++i) {
            CdrEvent ev;
            ev.user_id = "u" + std::to_string(rng() % 7);
            ev.antenna_id = "a" + std::to_string(1 + rng() % 3);
            ev.timestamp = base + static_cast<LocalSeconds>(rng() % (3 * kSecondsPerDay));
            ev.kind = EventKind::data;
            events.push_back(ev);
        }

        std::map<std::pair<std::string, DayNumber>, std::vector<LocalSeconds>> expected;
        for (const auto& ev : events) {
            expected[{ev.user_id, day_of(ev.timestamp)}].push_back(ev.timestamp);
        }
        for (auto& [key, times] : expected) {
            std::sort(times.begin(), times.end());
        }

        const auto traces = group_user_days(events);
        REQUIRE(traces.size() == expected.size());
        auto it = expected.begin();
        for (const auto& trace : traces) {
            REQUIRE(trace.user_id == it->first.first);
            REQUIRE(trace.day == it->first.second);
            REQUIRE(trace.events.size() == it->second.size());
            for (size_t i = 0; i < trace.events.size(); ++i) {
                REQUIRE(trace.events[i].timestamp == it->second[i]);
                REQUIRE(day_of(trace.events[i].timestamp) == trace.day);
            }
            ++it;
        }
    }
}
