#include "sediment/replay.hpp"

#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sediment/clock.hpp"
#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

Scenario Scenario::load(const fs::path& file) {
    ordered_json j = ordered_json::parse(read_file(file), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("malformed scenario: " + file.string());
    }
    Scenario s;
    s.name = j.value("name", file.stem().string());
    if (j.contains("clock")) {
        const auto& c = j.at("clock");
        s.clock_start = parse_epoch(c.value("start", "1970-01-01T00:00:00Z"));
        s.clock_step = c.value("step_seconds", std::int64_t{1});
    }
    for (const auto& src : j.value("sources", ordered_json::array())) {
        s.sources.emplace_back(src.at("fixture").get<std::string>(),
                               src.at("target").get<std::string>());
    }
    for (const auto& st : j.value("steps", ordered_json::array())) {
        ScenarioStep step;
        step.op = st.at("op").get<std::string>();
        step.id = st.value("id", step.op);
        step.question = st.value("question", "");
        if (step.op != "ingest" && step.op != "query" && step.op != "restart") {
            throw ConfigError("scenario step with unknown op: " + step.op);
        }
        if (step.op == "query" && step.question.empty()) {
            throw ConfigError("scenario query step without a question");
        }
        s.steps.push_back(std::move(step));
    }
    if (s.steps.empty()) throw ConfigError("scenario has no steps: " + file.string());
    return s;
}

namespace {

ReplayRow row_from_trace(const std::string& step_id, const TaskTrace& trace) {
    ReplayRow row;
    row.step_id = step_id;
    row.task_id = trace.task_id;
    row.kind = trace.kind;
    row.cache_hit = trace.cache_hit;
    for (const TraceStep& step : trace.steps) {
        if (classify(step.phase) == CostClass::capital) {
            row.capital_tokens += step.usage.total_tokens();
            row.t_capital_ms += step.usage.latency_ms;
        } else {
            row.operating_tokens += step.usage.total_tokens();
            row.t_user_ms += step.usage.latency_ms;
        }
    }
    row.total_tokens = row.operating_tokens + row.capital_tokens;
    row.synthesis_pages = trace.artifacts_created.synthesis_pages;
    row.entity_facts_merged = trace.artifacts_created.entity_facts_merged;
    return row;
}

constexpr const char* kReplayHeader =
    "step,task_id,kind,cache_hit,total_tokens,operating_tokens,capital_tokens,t_user_ms,"
    "t_capital_ms,synthesis_pages,entity_facts_merged";

}  // namespace

std::string replay_rows_csv(const std::vector<ReplayRow>& rows) {
    std::ostringstream out;
    out << kReplayHeader << '\n';
    ReplayRow total;
    total.step_id = "total";
    total.task_id = "-";
    total.kind = "-";
    for (const ReplayRow& row : rows) {
        out << row.step_id << ',' << row.task_id << ',' << row.kind << ','
            << (row.cache_hit ? "true" : "false") << ',' << row.total_tokens << ','
            << row.operating_tokens << ',' << row.capital_tokens << ',' << row.t_user_ms << ','
            << row.t_capital_ms << ',' << row.synthesis_pages << ','
            << row.entity_facts_merged << '\n';
        total.total_tokens += row.total_tokens;
        total.operating_tokens += row.operating_tokens;
        total.capital_tokens += row.capital_tokens;
        total.t_user_ms += row.t_user_ms;
        total.t_capital_ms += row.t_capital_ms;
        total.synthesis_pages += row.synthesis_pages;
        total.entity_facts_merged += row.entity_facts_merged;
    }
    out << total.step_id << ',' << total.task_id << ',' << total.kind << ",false,"
        << total.total_tokens << ',' << total.operating_tokens << ',' << total.capital_tokens
        << ',' << total.t_user_ms << ',' << total.t_capital_ms << ',' << total.synthesis_pages
        << ',' << total.entity_facts_merged << '\n';
    return out.str();
}

std::vector<ReplayRow> parse_replay_rows_csv(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || lines.front() != kReplayHeader) {
        throw PipelineError("replay CSV missing header");
    }
    std::vector<ReplayRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream line(lines[i]);
        while (std::getline(line, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) {
            throw PipelineError("replay CSV row " + std::to_string(i + 1) + " malformed");
        }
        ReplayRow row;
        row.step_id = cells[0];
        row.task_id = cells[1];
        row.kind = cells[2];
        row.cache_hit = cells[3] == "true";
        try {
            row.total_tokens = std::stoll(cells[4]);
            row.operating_tokens = std::stoll(cells[5]);
            row.capital_tokens = std::stoll(cells[6]);
            row.t_user_ms = std::stoll(cells[7]);
            row.t_capital_ms = std::stoll(cells[8]);
            row.synthesis_pages = std::stoll(cells[9]);
            row.entity_facts_merged = std::stoll(cells[10]);
        } catch (const std::exception&) {
            throw PipelineError("replay CSV row " + std::to_string(i + 1) + " malformed");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.back().step_id != "total") {
        throw PipelineError("replay CSV missing total row");
    }
    rows.pop_back();
    return rows;
}

LedgerReport write_ledger_outputs(const VaultLayout& vault, const RateCard& rates) {
    CostLedger ledger(rates);
    fs::path traces = vault.output_dir / "traces";
    if (fs::is_directory(traces)) {
        for (const fs::path& file : list_files_sorted(traces)) {
            if (file.extension() != ".json") continue;
            ledger.record(parse_task_trace_json(read_file(file)));
        }
    }
    LedgerReport report = ledger.report();
    write_file_atomic(vault.output_dir / "ledger.csv", ledger_report_csv(report));
    write_file_atomic(vault.output_dir / "ledger.json", ledger_report_json(report));
    return report;
}

ReplayResult run_replay(const fs::path& vault_root, const Scenario& scenario,
                        const fs::path& fixtures_dir, Oracle& oracle, const RateCard& rates,
                        const EngineConfig& config) {
    if (fs::exists(vault_root) && !fs::is_empty(vault_root)) {
        throw PipelineError("scenario requires fresh vault: " + vault_root.string());
    }
    VaultLayout vault = init_vault(vault_root);
    for (const auto& [fixture, target] : scenario.sources) {
        if (fs::path(target).generic_string().rfind("raw/", 0) != 0) {
            throw ConfigError("scenario source target must live under raw/: " + target);
        }
        write_file(vault.abs(target), read_file(fixtures_dir / fixture));
    }

    SteppingClock clock(scenario.clock_start, scenario.clock_step);
    auto engine = std::make_unique<Engine>(vault, oracle, clock, config);

    ReplayResult result;
    for (const ScenarioStep& step : scenario.steps) {
        if (step.op == "restart") {
            engine.reset();
            engine = std::make_unique<Engine>(vault, oracle, clock, config);
            continue;
        }
        if (step.op == "ingest") {
            for (const auto& [fixture, target] : scenario.sources) {
                IngestOutcome outcome = engine->ingest(target);
                if (outcome.skipped) continue;
                result.rows.push_back(row_from_trace(step.id, outcome.trace));
                result.traces.push_back(std::move(outcome.trace));
            }
            continue;
        }
        QueryOutcome outcome = engine->query(step.question);
        result.rows.push_back(row_from_trace(step.id, outcome.trace));
        result.traces.push_back(std::move(outcome.trace));
    }

    result.report_csv = vault.output_dir / "replay.csv";
    write_file_atomic(result.report_csv, replay_rows_csv(result.rows));
    result.ledger = write_ledger_outputs(vault, rates);
    result.ledger_csv = vault.output_dir / "ledger.csv";
    return result;
}

}  // namespace sediment
