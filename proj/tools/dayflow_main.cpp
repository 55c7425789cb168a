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
#include "dayflow/csv.hpp"
#include "dayflow/ingest.hpp"
#include "dayflow/journey.hpp"
#include "dayflow/odflow.hpp"
#include "dayflow/pipeline.hpp"
#include "dayflow/synthcity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

struct PipelineArgs {
    std::vector<std::string> cdr;
    std::string antennas;
    std::string out;
    std::string config_path;
    std::string days;
    double epsilon_m = 0.0;
    double time_scale = 0.0;
    double quantile = 0.0;
    std::string entropy_mode;
    int workers = 0;
};

void add_input_options(CLI::App* cmd, PipelineArgs& a)
{
    cmd->add_option("--config", a.config_path, "configuration file (key = value lines)");
    cmd->add_option("--cdr", a.cdr, "CDR event csv, repeatable")->required();
    cmd->add_option("--antennas", a.antennas, "antenna registry csv")->required();
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a)
{
    cmd->add_option("--out", a.out, "output directory")->required();
    cmd->add_option("--days", a.days, "comma-separated dates to keep");
    cmd->add_option("--epsilon-m", a.epsilon_m, "simplification tolerance in meters");
    cmd->add_option("--time-scale", a.time_scale, "meters one minute maps to");
    cmd->add_option("--quantile", a.quantile, "zone distance quantile level");
    cmd->add_option("--entropy-mode", a.entropy_mode, "fixed or quantile")
        ->check(CLI::IsMember({"fixed", "quantile"}));
    cmd->add_option("--workers", a.workers, "worker thread count, 0 = all cores");
}

dayflow::PipelineConfig make_config(const CLI::App* cmd, const PipelineArgs& a)
{
    dayflow::PipelineConfig cfg;
    if (!a.config_path.empty()) {
        cfg = dayflow::load_config(a.config_path);
    }
    // not every subcommand defines every pipeline flag
    const auto given = [&](const std::string& name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--days")) {
        cfg.days = dayflow::parse_day_list(a.days);
    }
    if (given("--epsilon-m")) {
        cfg.epsilon_m = a.epsilon_m;
    }
    if (given("--time-scale")) {
        cfg.time_scale_m_per_min = a.time_scale;
    }
    if (given("--quantile")) {
        cfg.quantile = a.quantile;
    }
    if (given("--entropy-mode")) {
        cfg.entropy_mode = *dayflow::parse_filter_mode(a.entropy_mode);
    }
    if (given("--workers")) {
        cfg.workers = a.workers;
    }
    return cfg;
}

int run_stages(const CLI::App* cmd, const PipelineArgs& args, const dayflow::StageSelect& select)
{
    const dayflow::PipelineConfig cfg = make_config(cmd, args);
    const dayflow::PipelineResult res =
        dayflow::run_pipeline(cfg, args.cdr, args.antennas, args.out, select);
    if (res.ingest.rows_total == 0) {
        std::fprintf(stderr, "dayflow: warning: no rows ingested\n");
    }
    std::printf("traces %zu retained %zu excluded %zu trips %zu days %zu\n", res.traces_total,
                res.traces_retained, res.users_excluded, res.trips_total, res.days.size());
    return 0;
}

void stream_lines(const std::string& path, const std::string& content)
{
    dayflow::csv::write_file(path, content);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"daily journey and origin-destination estimation from CDR event logs"};
    app.require_subcommand(1);

    PipelineArgs ingest_args;
    bool ingest_json = false;
    auto* ingest_cmd = app.add_subcommand("ingest-check", "parse inputs and report row quality");
    add_input_options(ingest_cmd, ingest_args);
    ingest_cmd->add_flag("--json", ingest_json, "machine-readable output");

    PipelineArgs journeys_args;
    auto* journeys_cmd = app.add_subcommand("journeys", "reconstruct daily journeys");
    add_input_options(journeys_cmd, journeys_args);
    add_pipeline_options(journeys_cmd, journeys_args);

    PipelineArgs od_args;
    auto* od_cmd = app.add_subcommand("od", "build origin-destination matrices");
    add_input_options(od_cmd, od_args);
    add_pipeline_options(od_cmd, od_args);

    PipelineArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats", "trip variable distributions");
    add_input_options(stats_cmd, stats_args);
    add_pipeline_options(stats_cmd, stats_args);

    PipelineArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "full pipeline, all artifacts");
    add_input_options(run_cmd, run_args);
    add_pipeline_options(run_cmd, run_args);

    std::string cmp_a;
    std::string cmp_b;
    bool cmp_no_diagonal = false;
    bool cmp_json        = false;
    auto* cmp_cmd = app.add_subcommand("compare", "rank-correlate two matrices");
    cmp_cmd->add_option("matrix_a", cmp_a, "first matrix csv")->required();
    cmp_cmd->add_option("matrix_b", cmp_b, "second matrix csv")->required();
    cmp_cmd->add_flag("--no-diagonal", cmp_no_diagonal, "drop intra-municipal cells");
    cmp_cmd->add_flag("--json", cmp_json, "machine-readable output");

    dayflow::SynthConfig synth_cfg;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic city and its event log");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--seed", synth_cfg.seed, "generator seed");
    synth_cmd->add_option("--users", synth_cfg.users, "number of users");
    synth_cmd->add_option("--municipalities", synth_cfg.municipalities, "municipality count");
    synth_cmd->add_option("--zones", synth_cfg.zones_per_municipality, "zones per municipality");
    synth_cmd->add_option("--antennas-per-zone", synth_cfg.antennas_per_zone,
                          "antennas per zone");
    synth_cmd->add_option("--trips-min", synth_cfg.trips_min, "fewest trips per user");
    synth_cmd->add_option("--trips-max", synth_cfg.trips_max, "most trips per user");
    synth_cmd->add_option("--cadence", synth_cfg.cadence_min, "minutes between events");
    synth_cmd->add_option("--jitter", synth_cfg.jitter, "same-zone antenna swap probability");

    std::string score_truth;
    std::string score_journeys;
    std::string score_antennas;
    bool score_json = false;
    auto* score_cmd = app.add_subcommand("score", "compare recovered journeys to ground truth");
    score_cmd->add_option("--truth", score_truth, "truth jsonl from synth")->required();
    score_cmd->add_option("--journeys", score_journeys, "recovered journeys jsonl")->required();
    score_cmd->add_option("--antennas", score_antennas, "antenna registry csv")->required();
    score_cmd->add_flag("--json", score_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest_cmd->parsed()) {
            dayflow::PipelineConfig cfg = make_config(ingest_cmd, ingest_args);
            const dayflow::AntennaRegistry registry = dayflow::load_registry(ingest_args.antennas);
            dayflow::IngestReport report;
            for (const auto& path : ingest_args.cdr) {
                auto [events, part] = dayflow::parse_cdr(dayflow::csv::read_file(path), registry,
                                                         dayflow::ParseOptions{cfg.corrupt_threshold});
                report += part;
            }
            if (ingest_json) {
                std::printf("%s\n", dayflow::ingest_report_json(report).dump(2).c_str());
            }
            else {
                std::printf("rows %zu ok %zu bad_timestamp %zu unknown_antenna %zu malformed %zu\n",
                            report.rows_total, report.rows_ok, report.bad_timestamp,
                            report.unknown_antenna, report.malformed);
            }
            return 0;
        }
        if (journeys_cmd->parsed()) {
            return run_stages(journeys_cmd, journeys_args,
                              dayflow::StageSelect{true, false, false});
        }
        if (od_cmd->parsed()) {
            return run_stages(od_cmd, od_args, dayflow::StageSelect{false, true, false});
        }
        if (stats_cmd->parsed()) {
            return run_stages(stats_cmd, stats_args, dayflow::StageSelect{false, false, true});
        }
        if (run_cmd->parsed()) {
            return run_stages(run_cmd, run_args, dayflow::StageSelect{true, true, true});
        }
        if (cmp_cmd->parsed()) {
            const dayflow::ODMatrix a = dayflow::od_from_csv(dayflow::csv::read_file(cmp_a));
            const dayflow::ODMatrix b = dayflow::od_from_csv(dayflow::csv::read_file(cmp_b));
            const auto without        = dayflow::spearman(a, b, false);
            nlohmann::json out;
            out["without_diagonal"] = dayflow::spearman_json(without);
            if (!cmp_no_diagonal) {
                out["with_diagonal"] = dayflow::spearman_json(dayflow::spearman(a, b, true));
            }
            if (cmp_json) {
                std::printf("%s\n", out.dump(2).c_str());
            }
            else {
                if (!cmp_no_diagonal) {
                    const auto& w = out["with_diagonal"];
                    std::printf("with_diagonal rho %.6f p %.6g n %zu\n",
                                w["rho"].get<double>(), w["p_value"].get<double>(),
                                w["n"].get<std::size_t>());
                }
                std::printf("without_diagonal rho %.6f p %.6g n %zu\n", without.rho,
                            without.p_value, without.n);
            }
            return 0;
        }
        if (synth_cmd->parsed()) {
            const dayflow::SynthOutput out = dayflow::generate(synth_cfg);
            std::filesystem::create_directories(synth_out);
            const auto path = [&](const char* name) {
                return (std::filesystem::path(synth_out) / name).string();
            };
            stream_lines(path("antennas.csv"), dayflow::antennas_csv(out.city.registry));
            stream_lines(path("cdr.csv"), dayflow::cdr_csv(out.events));
            std::string truth_lines;
            for (const auto& tj : out.truth.journeys) {
                truth_lines += dayflow::truth_json(tj).dump();
                truth_lines += '\n';
            }
            stream_lines(path("truth.jsonl"), truth_lines);
            // synthetic users visit more places per hour than typical phone
            // users, so ship retention cuts that keep them
            stream_lines(path("pipeline.conf"), "entropy_low = 0.0\nentropy_high = 10.0\n");
            std::printf("users %zu events %zu antennas %zu\n", out.truth.journeys.size(),
                        out.events.size(), out.city.registry.size());
            return 0;
        }
        if (score_cmd->parsed()) {
            const dayflow::AntennaRegistry registry = dayflow::load_registry(score_antennas);
            dayflow::GroundTruth truth;
            {
                const std::string text = dayflow::csv::read_file(score_truth);
                dayflow::csv::LineCursor cursor(text);
                while (const auto line = cursor.next()) {
                    if (line->empty()) {
                        continue;
                    }
                    truth.journeys.push_back(
                        dayflow::truth_from_json(nlohmann::json::parse(*line)));
                }
            }
            std::vector<dayflow::DailyJourney> journeys;
            {
                const std::string text = dayflow::csv::read_file(score_journeys);
                dayflow::csv::LineCursor cursor(text);
                while (const auto line = cursor.next()) {
                    if (line->empty()) {
                        continue;
                    }
                    journeys.push_back(
                        dayflow::journey_from_json(nlohmann::json::parse(*line), registry));
                }
            }
            const dayflow::RecoveryReport rep =
                dayflow::score_recovery(truth, journeys, registry.municipalities());
            if (score_json) {
                std::printf("%s\n", dayflow::recovery_json(rep).dump(2).c_str());
            }
            else {
                std::printf("true %zu recovered %zu matched %zu recall %.4f precision %.4f\n",
                            rep.true_trips, rep.recovered_trips, rep.matched, rep.recall,
                            rep.precision);
                if (rep.od) {
                    std::printf("od_rho %.4f p %.6g n %zu\n", rep.od->rho, rep.od->p_value,
                                rep.od->n);
                }
            }
            return 0;
        }
    }
    catch (const std::exception& e) {
        std::fprintf(stderr, "dayflow: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
