#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sediment/engine.hpp"
#include "sediment/ledger.hpp"

namespace sediment {

struct ScenarioStep {
    std::string op;  // "ingest", "query", or "restart"
    std::string id;
    std::string question;
};

struct Scenario {
    std::string name;
    std::int64_t clock_start = 0;
    std::int64_t clock_step = 1;
    std::vector<std::pair<std::string, std::string>> sources;  // fixture file -> raw target
    std::vector<ScenarioStep> steps;

    static Scenario load(const std::filesystem::path& file);
};

struct ReplayRow {
    std::string step_id;
    std::string task_id;
    std::string kind;
    bool cache_hit = false;
    std::int64_t total_tokens = 0;
    std::int64_t operating_tokens = 0;
    std::int64_t capital_tokens = 0;
    std::int64_t t_user_ms = 0;
    std::int64_t t_capital_ms = 0;
    std::int64_t synthesis_pages = 0;
    std::int64_t entity_facts_merged = 0;

    bool operator==(const ReplayRow&) const = default;
};

struct ReplayResult {
    std::vector<ReplayRow> rows;
    std::vector<TaskTrace> traces;
    LedgerReport ledger;
    std::filesystem::path report_csv;  // output/replay.csv
    std::filesystem::path ledger_csv;  // output/ledger.csv
};

// Runs one scenario on a brand-new vault at vault_root: seeds raw sources,
// executes the steps (a restart drops the engine and reloads all state from
// disk against the same clock), and writes replay + ledger reports.
ReplayResult run_replay(const std::filesystem::path& vault_root, const Scenario& scenario,
                        const std::filesystem::path& fixtures_dir, Oracle& oracle,
                        const RateCard& rates, const EngineConfig& config = EngineConfig());

std::string replay_rows_csv(const std::vector<ReplayRow>& rows);
std::vector<ReplayRow> parse_replay_rows_csv(const std::string& text);

// Rebuilds the cost ledger from every persisted trace under output/traces
// and rewrites output/ledger.csv and output/ledger.json.
LedgerReport write_ledger_outputs(const VaultLayout& vault, const RateCard& rates);

}  // namespace sediment
