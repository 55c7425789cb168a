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
#ifndef DAYFLOW_ODFLOW_HPP
#define DAYFLOW_ODFLOW_HPP

#include "dayflow/csv.hpp"
#include "dayflow/geo.hpp"
#include "dayflow/journey.hpp"
#include "dayflow/timeutil.hpp"
#include "dayflow/types.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dayflow {

// Square trip-count matrix; rows are origins, columns destinations, both in
// label order.
struct ODMatrix {
    std::vector<std::string> labels;
    std::vector<double> counts; // row-major
    std::optional<DayNumber> day;

    std::size_t size() const
    {
        return labels.size();
    }
    double& at(std::size_t i, std::size_t j)
    {
        return counts[i * labels.size() + j];
    }
    double at(std::size_t i, std::size_t j) const
    {
        return counts[i * labels.size() + j];
    }
};

inline ODMatrix make_od(std::vector<std::string> labels, std::optional<DayNumber> day = {})
{
    ODMatrix m;
    m.labels = std::move(labels);
    m.counts.assign(m.labels.size() * m.labels.size(), 0.0);
    m.day = day;
    return m;
}

inline ODMatrix build_od(std::span<const TripRecord> trips, std::vector<std::string> labels,
                         std::optional<DayNumber> day = {})
{
    ODMatrix m = make_od(std::move(labels), day);
    detail::StringMap<std::size_t> index;
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        index.emplace(m.labels[i], i);
    }
    for (const auto& t : trips) {
        const auto o = index.find(t.municipality_origin);
        if (o == index.end()) {
            throw Error("municipality not in label set: " + t.municipality_origin);
        }
        const auto d = index.find(t.municipality_destination);
        if (d == index.end()) {
            throw Error("municipality not in label set: " + t.municipality_destination);
        }
        m.at(o->second, d->second) += 1.0;
    }
    return m;
}

inline ODMatrix average_matrices(std::span<const ODMatrix> matrices)
{
    if (matrices.empty()) {
        throw ArgumentError("average of zero matrices");
    }
    for (const auto& m : matrices) {
        if (m.labels != matrices.front().labels) {
            throw Error("matrices carry different municipality labels");
        }
    }
    ODMatrix avg = make_od(matrices.front().labels);
    for (const auto& m : matrices) {
        for (std::size_t i = 0; i < avg.counts.size(); ++i) {
            avg.counts[i] += m.counts[i];
        }
    }
    const double k = static_cast<double>(matrices.size());
    for (auto& c : avg.counts) {
        c /= k;
    }
    return avg;
}

// Scale each row to unit Euclidean norm; all-zero rows stay zero.
inline ODMatrix l2_normalize_rows(const ODMatrix& m)
{
    ODMatrix out = m;
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            norm2 += m.at(i, j) * m.at(i, j);
        }
        if (norm2 == 0.0) {
            continue;
        }
        const double norm = std::sqrt(norm2);
        for (std::size_t j = 0; j < n; ++j) {
            out.at(i, j) = m.at(i, j) / norm;
        }
    }
    return out;
}

// Ranks starting at 1; tied values share the mean of the positions they span.
inline std::vector<double> average_ranks(std::span<const double> xs)
{
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) {
            ++j;
        }
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
};

// Rank correlation over matching cells, with a two-sided p-value from the
// large-sample t approximation t = rho * sqrt((n-2)/(1-rho^2)).
inline SpearmanResult spearman(const ODMatrix& a, const ODMatrix& b, bool include_diagonal = true)
{
    if (a.labels != b.labels) {
        throw Error("matrices carry different municipality labels");
    }
    std::vector<double> va;
    std::vector<double> vb;
    const std::size_t m = a.size();
    va.reserve(m * m);
    vb.reserve(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!include_diagonal && i == j) {
                continue;
            }
            va.push_back(a.at(i, j));
            vb.push_back(b.at(i, j));
        }
    }
    if (va.size() < 3) {
        throw Error("fewer than 3 comparable cells");
    }
    const auto ra = average_ranks(va);
    const auto rb = average_ranks(vb);
    const double n    = static_cast<double>(ra.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double dx = ra[i] - mean;
        const double dy = rb[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error("rank vector is constant, correlation undefined");
    }
    SpearmanResult res;
    res.n   = ra.size();
    res.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (std::abs(res.rho) >= 1.0) {
        res.p_value = 0.0;
    }
    else {
        const double df = n - 2.0;
        const double t  = res.rho * std::sqrt(df / (1.0 - res.rho * res.rho));
        const boost::math::students_t_distribution<double> dist(df);
        res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return res;
}

inline nlohmann::json spearman_json(const SpearmanResult& r)
{
    return nlohmann::json{{"rho", r.rho}, {"p_value", r.p_value}, {"n", r.n}};
}

inline std::string od_csv(const ODMatrix& m)
{
    std::string out;
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
        if (j > 0) {
            out += ',';
        }
        out += m.labels[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j > 0) {
                out += ',';
            }
            csv::append_number(out, m.at(i, j));
        }
        out += '\n';
    }
    return out;
}

inline ODMatrix od_from_csv(std::string_view text)
{
    csv::LineCursor cursor(text);
    std::vector<std::string_view> fields;
    const auto header = cursor.next();
    if (!header) {
        throw Error("matrix file is empty");
    }
    csv::split(*header, fields);
    std::vector<std::string> labels;
    for (const auto f : fields) {
        if (f.empty()) {
            throw Error("matrix header holds an empty label");
        }
        labels.emplace_back(f);
    }
    ODMatrix m = make_od(std::move(labels));
    std::size_t row = 0;
    while (const auto line = cursor.next()) {
        if (line->empty()) {
            continue;
        }
        if (row >= m.size()) {
            throw Error("matrix has more rows than labels");
        }
        csv::split(*line, fields);
        if (fields.size() != m.size()) {
            throw Error("matrix row " + std::to_string(row + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(m.size()));
        }
        for (std::size_t j = 0; j < m.size(); ++j) {
            const auto v = csv::parse_double(fields[j]);
            if (!v) {
                throw Error("bad matrix value: " + std::string(fields[j]));
            }
            m.at(row, j) = *v;
        }
        ++row;
    }
    if (row != m.size()) {
        throw Error("matrix has " + std::to_string(row) + " rows, expected " +
                    std::to_string(m.size()));
    }
    return m;
}

// Histogram over fixed-width bins indexed from zero; each bin also keeps the
// raw value sum so weighted means stay exact for fractional values.
struct Histogram {
    double bin_width = 1.0;
    std::vector<std::size_t> counts;
    std::vector<double> sums;
    std::size_t total = 0;
    double value_sum = 0.0;

    void add(double v)
    {
        const auto idx = static_cast<std::size_t>(v / bin_width);
        if (idx >= counts.size()) {
            counts.resize(idx + 1, 0);
            sums.resize(idx + 1, 0.0);
        }
        counts[idx] += 1;
        sums[idx] += v;
        total += 1;
        value_sum += v;
    }

    std::optional<double> mean() const
    {
        if (total == 0) {
            return std::nullopt;
        }
        return value_sum / static_cast<double>(total);
    }
};

struct TripStats {
    Histogram start_time{1.0, {}, {}, 0, 0.0};   // minute-of-day bins
    Histogram duration{1.0, {}, {}, 0, 0.0};     // 1-minute bins
    Histogram distance{100.0, {}, {}, 0, 0.0};   // 100 m bins
    std::optional<double> mean_duration_min;
    std::optional<double> mean_distance_km;
    std::vector<double> start_cdf;    // value at levels 0.00, 0.01, ..., 1.00
    std::vector<double> duration_cdf;
    std::vector<double> distance_cdf;
    std::vector<double> event_minute_fraction; // 1440 bins
    std::size_t trip_count = 0;
};

inline std::vector<double> percent_grid_cdf(std::vector<double> values)
{
    std::vector<double> grid;
    if (values.empty()) {
        return grid;
    }
    std::sort(values.begin(), values.end());
    grid.reserve(101);
    for (int p = 0; p <= 100; ++p) {
        grid.push_back(quantile_sorted(values, static_cast<double>(p) / 100.0));
    }
    return grid;
}

inline TripStats trip_stats(std::span<const TripRecord> trips,
                            std::span<const LocalSeconds> event_times)
{
    TripStats s;
    s.trip_count = trips.size();
    std::vector<double> starts;
    std::vector<double> durations;
    std::vector<double> distances;
    starts.reserve(trips.size());
    durations.reserve(trips.size());
    distances.reserve(trips.size());
    for (const auto& t : trips) {
        const double start_min = minutes_of_day(t.t_start);
        s.start_time.add(start_min);
        s.duration.add(t.duration_min);
        s.distance.add(t.displacement_m);
        starts.push_back(start_min);
        durations.push_back(t.duration_min);
        distances.push_back(t.displacement_m);
    }
    s.mean_duration_min = s.duration.mean();
    if (const auto md = s.distance.mean()) {
        s.mean_distance_km = *md / 1000.0;
    }
    s.start_cdf    = percent_grid_cdf(std::move(starts));
    s.duration_cdf = percent_grid_cdf(std::move(durations));
    s.distance_cdf = percent_grid_cdf(std::move(distances));
    s.event_minute_fraction.assign(1440, 0.0);
    if (!event_times.empty()) {
        const double total = static_cast<double>(event_times.size());
        for (const auto ts : event_times) {
            const auto minute = static_cast<std::size_t>(minutes_of_day(ts));
            s.event_minute_fraction[std::min<std::size_t>(minute, 1439)] += 1.0;
        }
        for (auto& f : s.event_minute_fraction) {
            f /= total;
        }
    }
    return s;
}

inline std::string hist_csv(const Histogram& h)
{
    std::string out = "bin_low,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        csv::append_number(out, static_cast<double>(i) * h.bin_width);
        out += ',';
        out += std::to_string(h.counts[i]);
        out += '\n';
    }
    return out;
}

inline std::string cdf_csv(std::span<const double> grid)
{
    std::string out = "p,value\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv::append_number(out, static_cast<double>(i) / 100.0);
        out += ',';
        csv::append_number(out, grid[i]);
        out += '\n';
    }
    return out;
}

inline std::string event_frequency_csv(std::span<const double> fraction)
{
    std::string out = "minute,fraction\n";
    for (std::size_t i = 0; i < fraction.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        csv::append_number(out, fraction[i]);
        out += '\n';
    }
    return out;
}

} // namespace dayflow

#endif // DAYFLOW_ODFLOW_HPP
