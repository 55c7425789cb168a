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
#ifndef DAYFLOW_PIPELINE_HPP
#define DAYFLOW_PIPELINE_HPP

#include "dayflow/csv.hpp"
#include "dayflow/filters.hpp"
#include "dayflow/geo.hpp"
#include "dayflow/ingest.hpp"
#include "dayflow/journey.hpp"
#include "dayflow/odflow.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace dayflow {

struct PipelineConfig {
    double timezone_offset_min = 0.0; // added to every event timestamp at load
    double epsilon_m = 500.0;
    double time_scale_m_per_min = 100.0;
    double quantile = 0.8;
    double d_min_floor_m = 500.0;
    double unknown_km = 100.0;
    double non_trip_min = 180.0;
    double trip_min_duration = 15.0;
    double sandwich_min = 15.0;
    FilterMode entropy_mode = FilterMode::fixed;
    double entropy_low = 0.4;
    double entropy_high = 0.9;
    std::vector<DayNumber> days; // empty keeps every day present in the data
    int workers = 0;             // 0 picks the hardware thread count
    double corrupt_threshold = 0.5;

    ClassifierConfig classifier() const
    {
        return ClassifierConfig{unknown_km, non_trip_min, trip_min_duration, sandwich_min};
    }

    JourneyConfig journey() const
    {
        return JourneyConfig{epsilon_m, time_scale_m_per_min, classifier()};
    }
};

inline std::vector<DayNumber> parse_day_list(std::string_view text)
{
    std::vector<DayNumber> days;
    std::vector<std::string_view> fields;
    csv::split(text, fields);
    for (const auto f : fields) {
        if (f.empty()) {
            continue;
        }
        const auto day = parse_date(f);
        if (!day) {
            throw Error("bad date: " + std::string(f));
        }
        days.push_back(*day);
    }
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    return days;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline double config_double(std::string_view key, std::string_view value)
{
    const auto v = csv::parse_double(value);
    if (!v) {
        throw Error("bad value for " + std::string(key) + ": " + std::string(value));
    }
    return *v;
}

} // namespace detail

// Plain key = value lines; # starts a comment; every key is optional and
// overrides the current value.
inline void apply_config_text(PipelineConfig& cfg, std::string_view text)
{
    csv::LineCursor cursor(text);
    std::size_t line_no = 0;
    while (const auto raw = cursor.next()) {
        ++line_no;
        std::string_view line = *raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error("config line " + std::to_string(line_no) + " is not key = value");
        }
        const std::string_view key   = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key == "timezone_offset_min") {
            cfg.timezone_offset_min = detail::config_double(key, value);
        }
        else if (key == "epsilon_m") {
            cfg.epsilon_m = detail::config_double(key, value);
        }
        else if (key == "time_scale") {
            cfg.time_scale_m_per_min = detail::config_double(key, value);
        }
        else if (key == "quantile") {
            cfg.quantile = detail::config_double(key, value);
        }
        else if (key == "d_min_floor_m") {
            cfg.d_min_floor_m = detail::config_double(key, value);
        }
        else if (key == "unknown_km") {
            cfg.unknown_km = detail::config_double(key, value);
        }
        else if (key == "non_trip_min") {
            cfg.non_trip_min = detail::config_double(key, value);
        }
        else if (key == "trip_min_duration") {
            cfg.trip_min_duration = detail::config_double(key, value);
        }
        else if (key == "sandwich_min") {
            cfg.sandwich_min = detail::config_double(key, value);
        }
        else if (key == "entropy_mode") {
            const auto mode = parse_filter_mode(value);
            if (!mode) {
                throw Error("bad entropy_mode: " + std::string(value));
            }
            cfg.entropy_mode = *mode;
        }
        else if (key == "entropy_low") {
            cfg.entropy_low = detail::config_double(key, value);
        }
        else if (key == "entropy_high") {
            cfg.entropy_high = detail::config_double(key, value);
        }
        else if (key == "days") {
            cfg.days = parse_day_list(value);
        }
        else if (key == "workers") {
            const auto v = csv::parse_int(value);
            if (!v || *v < 0) {
                throw Error("bad value for workers: " + std::string(value));
            }
            cfg.workers = static_cast<int>(*v);
        }
        else if (key == "corrupt_threshold") {
            cfg.corrupt_threshold = detail::config_double(key, value);
        }
        else {
            throw Error("unknown config key: " + std::string(key));
        }
    }
}

inline PipelineConfig load_config(const std::string& path)
{
    PipelineConfig cfg;
    apply_config_text(cfg, csv::read_file(path));
    return cfg;
}

// Runs fn(0..n-1) on up to `workers` threads. Each index writes only its own
// results, so scheduling cannot change any output.
template <typename Fn>
inline void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers           = hw > 0 ? static_cast<int>(hw) : 1;
    }
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) {
                    return;
                }
                try {
                    fn(i);
                }
                catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

struct StageSelect {
    bool journeys = true;
    bool od = true;
    bool stats = true;
};

struct PipelineResult {
    IngestReport ingest;
    std::size_t traces_total = 0;
    std::size_t traces_retained = 0;
    std::size_t users_excluded = 0;
    std::size_t trips_total = 0;
    std::vector<DayNumber> days;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg,
                                   const std::vector<std::string>& cdr_paths,
                                   const std::string& registry_path, const std::string& out_dir,
                                   const StageSelect& select = {})
{
    namespace fs = std::filesystem;
    if (!fs::exists(registry_path)) {
        throw Error("registry not found: " + registry_path);
    }
    const AntennaRegistry registry = load_registry(registry_path);
    PipelineResult result;
    std::vector<CdrEvent> events;
    for (const auto& path : cdr_paths) {
        if (!fs::exists(path)) {
            throw Error("CDR file not found: " + path);
        }
        auto [evs, report] = parse_cdr(csv::read_file(path), registry,
                                       ParseOptions{cfg.corrupt_threshold});
        result.ingest += report;
        if (events.empty()) {
            events = std::move(evs);
        }
        else {
            events.insert(events.end(), std::make_move_iterator(evs.begin()),
                          std::make_move_iterator(evs.end()));
        }
    }
    if (cfg.timezone_offset_min != 0.0) {
        const auto shift = static_cast<LocalSeconds>(std::llround(cfg.timezone_offset_min * 60.0));
        for (auto& ev : events) {
            ev.timestamp += shift;
        }
    }

    std::vector<UserDayTrace> traces = group_user_days(events);
    events.clear();
    events.shrink_to_fit();
    result.traces_total = traces.size();
    if (!cfg.days.empty()) {
        std::erase_if(traces, [&](const UserDayTrace& t) {
            return !std::binary_search(cfg.days.begin(), cfg.days.end(), t.day);
        });
    }

    fs::create_directories(out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    // per-trace entropy, then the diversity filter
    std::vector<UserEntropy> entropies(traces.size());
    parallel_for(traces.size(), cfg.workers,
                 [&](std::size_t i) { entropies[i] = hourly_entropy(traces[i]); });
    EntropyFilterResult filter;
    if (!traces.empty()) {
        filter = entropy_filter(entropies, cfg.entropy_mode, cfg.entropy_low, cfg.entropy_high);
    }
    else {
        filter.cut_low  = cfg.entropy_low;
        filter.cut_high = cfg.entropy_high;
    }
    if (select.journeys) {
        csv::write_file(out_path("entropy.csv"), entropy_csv(entropies));
        csv::write_file(out_path("entropy_filter.json"),
                        filter_report_json(cfg.entropy_mode, filter).dump(2) + "\n");
    }
    std::vector<UserDayTrace> retained;
    retained.reserve(filter.retained_count);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (filter.retained[i]) {
            retained.push_back(std::move(traces[i]));
        }
    }
    traces.clear();
    result.traces_retained = retained.size();

    const ZoneStatsMap zones = zone_quantiles(registry, cfg.quantile, cfg.d_min_floor_m);
    if (select.journeys) {
        csv::write_file(out_path("zone_stats.csv"), zone_stats_csv(zones));
    }

    // journey per retained trace, in (user, day) order
    const JourneyConfig jcfg = cfg.journey();
    std::vector<DailyJourney> journeys(retained.size());
    parallel_for(retained.size(), cfg.workers, [&](std::size_t i) {
        journeys[i] = build_journey(retained[i], registry, zones, jcfg);
    });
    if (select.journeys) {
        std::string lines;
        for (const auto& j : journeys) {
            lines += journey_json(j).dump();
            lines += '\n';
        }
        csv::write_file(out_path("journeys.jsonl"), lines);
    }

    std::map<DayNumber, std::vector<TripRecord>> trips_by_day;
    for (const auto& j : journeys) {
        auto extract = extract_trips(j);
        if (extract.exclude_user) {
            result.users_excluded += 1;
            continue;
        }
        auto& bucket = trips_by_day[j.day];
        for (auto& t : extract.trips) {
            result.trips_total += 1;
            bucket.push_back(std::move(t));
        }
    }
    std::map<DayNumber, std::vector<LocalSeconds>> events_by_day;
    for (const auto& tr : retained) {
        auto& bucket = events_by_day[tr.day];
        for (const auto& ev : tr.events) {
            bucket.push_back(ev.timestamp);
        }
    }
    for (const auto& [day, unused] : events_by_day) {
        (void)unused;
        result.days.push_back(day);
    }

    const std::vector<std::string> labels = registry.municipalities();
    std::vector<ODMatrix> daily;
    for (const auto& day : result.days) {
        const auto it = trips_by_day.find(day);
        static const std::vector<TripRecord> kNoTrips;
        const auto& trips = it != trips_by_day.end() ? it->second : kNoTrips;
        ODMatrix od       = build_od(trips, labels, day);
        if (select.od) {
            csv::write_file(out_path("od_" + format_date(day) + ".csv"), od_csv(od));
        }
        if (select.stats) {
            const TripStats stats = trip_stats(trips, events_by_day[day]);
            const std::string tag = format_date(day);
            csv::write_file(out_path(tag + "_start_time_hist.csv"), hist_csv(stats.start_time));
            csv::write_file(out_path(tag + "_start_time_cdf.csv"), cdf_csv(stats.start_cdf));
            csv::write_file(out_path(tag + "_duration_hist.csv"), hist_csv(stats.duration));
            csv::write_file(out_path(tag + "_duration_cdf.csv"), cdf_csv(stats.duration_cdf));
            csv::write_file(out_path(tag + "_distance_hist.csv"), hist_csv(stats.distance));
            csv::write_file(out_path(tag + "_distance_cdf.csv"), cdf_csv(stats.distance_cdf));
            csv::write_file(out_path(tag + "_event_frequency.csv"),
                            event_frequency_csv(stats.event_minute_fraction));
        }
        daily.push_back(std::move(od));
    }
    if (select.od && !daily.empty()) {
        csv::write_file(out_path("od_average.csv"), od_csv(average_matrices(daily)));
    }

    csv::write_file(out_path("ingest_report.json"), ingest_report_json(result.ingest).dump(2) + "\n");
    nlohmann::json days_json = nlohmann::json::array();
    for (const auto& day : result.days) {
        days_json.push_back(format_date(day));
    }
    const nlohmann::json run_report{
        {"traces_total", result.traces_total},     {"traces_retained", result.traces_retained},
        {"users_excluded", result.users_excluded}, {"trips_total", result.trips_total},
        {"days", days_json},
    };
    csv::write_file(out_path("run_report.json"), run_report.dump(2) + "\n");
    return result;
}

} // namespace dayflow

#endif // DAYFLOW_PIPELINE_HPP
