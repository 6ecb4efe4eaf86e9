#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

#include "sediment/clock.hpp"
#include "sediment/engine.hpp"
#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/layout.hpp"
#include "sediment/ledger.hpp"
#include "sediment/oracle.hpp"
#include "sediment/replay.hpp"
#include "sediment/roisim.hpp"

namespace fs = std::filesystem;
using namespace sediment;

namespace {

struct EngineFlags {
    std::string root;
    std::string fixtures = std::string(SEDIMENT_FIXTURES_DIR) + "/oracle.jsonl";
    std::string config_file;
    std::string clock_start;
    std::string rates_file;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& flags) {
    cmd->add_option("root", flags.root, "vault root directory")->required();
    cmd->add_option("--fixtures", flags.fixtures, "oracle fixture corpus (JSONL)");
    cmd->add_option("--config", flags.config_file, "engine tuning config (JSON)");
    cmd->add_option("--clock", flags.clock_start,
                    "deterministic clock start (ISO-8601 or epoch seconds)");
    cmd->add_option("--rates", flags.rates_file, "token rate card (JSON)");
}

// Engine borrows the oracle and clock, so the session owns everything at a
// stable address for the lifetime of the command.
struct EngineSession {
    VaultLayout vault;
    FixtureOracle oracle;
    std::unique_ptr<Clock> clock;
    EngineConfig config;
    RateCard rates;
    std::unique_ptr<Engine> engine;
};

std::unique_ptr<EngineSession> open_session(const EngineFlags& flags) {
    auto session = std::make_unique<EngineSession>();
    session->vault = open_vault(flags.root);
    session->oracle = FixtureOracle::from_file(flags.fixtures);
    if (flags.clock_start.empty()) {
        session->clock = std::make_unique<SystemClock>();
    } else {
        session->clock = std::make_unique<SteppingClock>(parse_epoch(flags.clock_start));
    }
    if (!flags.config_file.empty()) session->config = EngineConfig::load(flags.config_file);
    session->rates =
        flags.rates_file.empty() ? RateCard::default_rates() : RateCard::load(flags.rates_file);
    session->engine = std::make_unique<Engine>(session->vault, session->oracle, *session->clock,
                                               session->config);
    return session;
}

std::string compact_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

std::string replay_summary(const ReplayResult& result) {
    std::string out;
    std::int64_t total = 0;
    std::int64_t query_total = 0;
    std::int64_t synthesis = 0;
    std::int64_t facts = 0;
    for (const ReplayRow& row : result.rows) {
        out += row.step_id + ": " + row.task_id + " " + row.kind + ", " +
               (row.kind == "query" ? (row.cache_hit ? "cache hit, " : "cache miss, ")
                                    : std::string()) +
               std::to_string(row.total_tokens) + " tokens\n";
        total += row.total_tokens;
        if (row.kind == "query") query_total += row.total_tokens;
        synthesis += row.synthesis_pages;
        facts += row.entity_facts_merged;
    }
    out += "total " + std::to_string(total) + " tokens (queries " +
           std::to_string(query_total) + "); +" + std::to_string(synthesis) + " synthesis, +" +
           std::to_string(facts) + " facts\n";
    out += "wrote " + result.report_csv.string() + " and " + result.ledger_csv.string() + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sediment: a self-cultivating wiki engine with cost accounting"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto* init_cmd = app.add_subcommand("init", "create or re-open a vault scaffold");
    std::string init_root;
    init_cmd->add_option("root", init_root, "vault root directory")->required();
    init_cmd->callback([&] {
        action = [&]() {
            VaultLayout vault = init_vault(init_root);
            std::cout << "vault ready at " << vault.root.string() << "\n";
            return 0;
        };
    });

    auto* ingest_cmd = app.add_subcommand("ingest", "ingest one raw source into the wiki");
    EngineFlags ingest_flags;
    std::string ingest_source;
    add_engine_flags(ingest_cmd, ingest_flags);
    ingest_cmd->add_option("source", ingest_source, "vault-relative path under raw/")
        ->required();
    ingest_cmd->callback([&] {
        action = [&]() {
            auto session = open_session(ingest_flags);
            IngestOutcome outcome = session->engine->ingest(ingest_source);
            if (outcome.skipped) {
                std::cout << "skipped (content unchanged): " << ingest_source << "\n";
            } else {
                std::cout << "ingested " << ingest_source << ": " << outcome.pages.size()
                          << " pages (" << outcome.trace.task_id << ")\n";
                write_ledger_outputs(session->vault, session->rates);
            }
            return 0;
        };
    });

    auto* query_cmd = app.add_subcommand("query", "answer one question against the vault");
    EngineFlags query_flags;
    std::string question;
    bool query_json = false;
    add_engine_flags(query_cmd, query_flags);
    query_cmd->add_option("question", question, "the question text")->required();
    query_cmd->add_flag("--json", query_json, "emit the full task trace as JSON");
    query_cmd->callback([&] {
        action = [&]() {
            auto session = open_session(query_flags);
            QueryOutcome outcome = session->engine->query(question);
            write_ledger_outputs(session->vault, session->rates);
            if (query_json) {
                std::cout << task_trace_json(outcome.trace);
            } else {
                std::cout << outcome.answer << "\n\n"
                          << outcome.trace.task_id << ": "
                          << (outcome.trace.cache_hit ? "cache hit" : "cache miss") << ", "
                          << outcome.trace.total_usage().total_tokens() << " tokens\n";
            }
            return 0;
        };
    });

    auto* cron_cmd = app.add_subcommand("cron", "run one scheduled maintenance pass");
    EngineFlags cron_flags;
    std::string cron_kind;
    add_engine_flags(cron_cmd, cron_flags);
    cron_cmd->add_option("kind", cron_kind, "daily_ingest_scan, daily_lint, or weekly_merge")
        ->required()
        ->check(CLI::IsMember({"daily_ingest_scan", "daily_lint", "weekly_merge"}));
    cron_cmd->callback([&] {
        action = [&]() {
            auto session = open_session(cron_flags);
            CronOutcome outcome = session->engine->run_scheduled(cron_kind_from_name(cron_kind));
            write_ledger_outputs(session->vault, session->rates);
            std::cout << outcome.trace.task_id << ": " << outcome.trace.answer << "\n";
            return 0;
        };
    });

    auto* replay_cmd = app.add_subcommand("replay", "run a scenario on a brand-new vault");
    EngineFlags replay_flags;
    std::string scenario_name;
    add_engine_flags(replay_cmd, replay_flags);
    replay_cmd->add_option("--scenario", scenario_name, "scenario file or short name")
        ->required();
    replay_cmd->callback([&] {
        action = [&]() {
            fs::path scenario_path = scenario_name;
            if (!fs::exists(scenario_path)) {
                fs::path fixtures_dir = fs::path(replay_flags.fixtures).parent_path();
                for (const std::string& candidate :
                     {"replay_" + scenario_name + ".json", scenario_name + ".json"}) {
                    if (fs::exists(fixtures_dir / candidate)) {
                        scenario_path = fixtures_dir / candidate;
                        break;
                    }
                }
            }
            if (!fs::exists(scenario_path)) {
                throw ConfigError("scenario not found: " + scenario_name);
            }
            Scenario scenario = Scenario::load(scenario_path);
            FixtureOracle oracle = FixtureOracle::from_file(replay_flags.fixtures);
            EngineConfig config;
            if (!replay_flags.config_file.empty()) {
                config = EngineConfig::load(replay_flags.config_file);
            }
            RateCard rates = replay_flags.rates_file.empty()
                                 ? RateCard::default_rates()
                                 : RateCard::load(replay_flags.rates_file);
            ReplayResult result = run_replay(replay_flags.root, scenario,
                                             scenario_path.parent_path(), oracle, rates, config);
            std::cout << replay_summary(result);
            return 0;
        };
    });

    auto* sim_cmd = app.add_subcommand("simulate", "project cumulative cost trajectories");
    std::string sim_config = std::string(SEDIMENT_DATA_DIR) + "/projection.json";
    std::string sim_out = "30day_projection.csv";
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--config", sim_config, "projection config (JSON)");
    sim_cmd->add_option("--out", sim_out, "output CSV path");
    auto* seed_opt = sim_cmd->add_option("--seed", sim_seed, "override the configured seed");
    sim_cmd->callback([&] {
        action = [&]() {
            ProjectionConfig config = ProjectionConfig::load(sim_config);
            if (seed_opt->count() > 0) config.options.seed = sim_seed;
            std::vector<SimTrace> traces = run_projection(config);
            write_file(sim_out, projection_csv(projection_rows(traces)));
            std::cout << "wrote " << sim_out << ": " << traces.size() << " trajectories over "
                      << config.options.days << " days\n";
            return 0;
        };
    });

    auto* cal_cmd = app.add_subcommand("calibrate", "fit compounding cost constants to targets");
    std::string cal_targets = std::string(SEDIMENT_DATA_DIR) + "/projection_targets.csv";
    std::string cal_out = "calibration.json";
    cal_cmd->add_option("--targets", cal_targets, "target transcription CSV");
    cal_cmd->add_option("--out", cal_out, "fit report path (JSON)");
    cal_cmd->callback([&] {
        action = [&]() {
            CalibrationTargets targets = CalibrationTargets::load(cal_targets);
            CalibrationResult result =
                calibrate(targets, SearchSpace::default_space(), CoverageParams());
            write_file(cal_out, fit_report_json(result));
            std::cout << "best fit: c_generate=" << compact_number(result.params.c_generate)
                      << " c_retrieve=" << compact_number(result.params.c_retrieve)
                      << " c_writeback=" << compact_number(result.params.c_writeback) << " ("
                      << hit_model_name(result.params.hit_model) << ", "
                      << writeback_mode_name(result.params.writeback) << ")\n"
                      << "worst cell error " << format_ratio(result.worst_rel_error * 100.0)
                      << "%, ranking " << (result.ranking_ok ? "preserved" : "violated")
                      << "; wrote " << cal_out << "\n";
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return action ? action() : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
