#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sediment/oracle.hpp"

namespace sediment {

// Every cost-bearing phase a task can pass through, across ingest, query,
// and maintenance flows.
enum class Phase {
    memory_recall,
    wiki_read,
    ceo_reasoning,
    web_search,
    answer_synthesis,
    memory_distill,
    writeback,
    ingest_extract,
};

const char* phase_name(Phase phase);
Phase phase_from_name(const std::string& name);

enum class CostClass { operating, capital };

// Capital phases are exactly the artifact-producing ones; everything else is
// transient spend. Unknown phases fail loudly, never default-classify.
CostClass classify(Phase phase);

struct TraceStep {
    Phase phase = Phase::memory_recall;
    Usage usage;
    std::vector<std::string> artifacts;  // vault-relative paths written, capital steps only
    std::string detail;

    bool operator==(const TraceStep&) const = default;
};

struct ArtifactCounts {
    std::int64_t synthesis_pages = 0;
    std::int64_t entity_facts_merged = 0;

    bool operator==(const ArtifactCounts&) const = default;
};

struct TaskTrace {
    std::string task_id;
    std::string kind;  // "ingest", "query", or "cron"
    std::string query_text;
    std::vector<TraceStep> steps;
    std::string answer;
    bool cache_hit = false;
    ArtifactCounts artifacts_created;
    std::vector<std::string> journal_tasks;

    Usage total_usage() const;
    bool operator==(const TaskTrace&) const = default;
};

std::string task_trace_json(const TaskTrace& trace);
TaskTrace parse_task_trace_json(const std::string& text);

struct CostEvent {
    std::string task_id;
    Phase phase = Phase::memory_recall;
    Usage usage;
    CostClass cost_class = CostClass::operating;
    std::vector<std::string> artifacts;
};

struct LatencyPartition {
    std::int64_t t_user_ms = 0;
    std::int64_t t_capital_ms = 0;
    std::int64_t total_ms = 0;
};

LatencyPartition latency_partition(const TaskTrace& trace);

// Amortized per-task cost after the one-time ingest investment is spread
// over n subsequent queries: (c_ingest + n * c_query) / (n + 1).
double amortized_avg(double c_ingest, double c_query, std::int64_t n);

// Dollar amounts are carried as integers in units of 1e-8 dollars so that
// conservation checks are exact; rendering rounds to 4 decimal places.
inline constexpr std::int64_t kDollarUnitScale = 100'000'000;

struct RateCard {
    std::int64_t input_rate = 0;   // dollar units per token
    std::int64_t output_rate = 0;  // dollar units per token
    std::int64_t cached_input_rate = 0;
    std::string currency = "USD";

    // Rates are configured in dollars per million tokens.
    static RateCard from_per_million(double input, double output, double cached_input,
                                     const std::string& currency = "USD");
    static RateCard load(const std::filesystem::path& config_file);
    static RateCard default_rates();
};

std::int64_t dollar_cost_units(std::int64_t input_tokens, std::int64_t output_tokens,
                               std::int64_t cached_prefix_tokens, const RateCard& rates);
std::string format_dollars(std::int64_t units);

struct TaskCostRow {
    std::string task_id;
    std::int64_t total_tokens = 0;
    std::int64_t operating_tokens = 0;
    std::int64_t capital_tokens = 0;
    std::int64_t t_user_ms = 0;
    std::int64_t t_capital_ms = 0;
    std::int64_t total_ms = 0;
    std::int64_t operating_dollar_units = 0;
    std::int64_t capital_dollar_units = 0;
    std::int64_t total_dollar_units = 0;

    bool operator==(const TaskCostRow&) const = default;
};

struct LedgerReport {
    std::vector<TaskCostRow> per_task;
    TaskCostRow cumulative;  // task_id "total"
    ArtifactCounts artifacts;
};

// In-memory event log for one pipeline run; reports are pure functions of it.
class CostLedger {
  public:
    explicit CostLedger(RateCard rates = RateCard::default_rates());

    // Classifies every step of the trace and appends the events to the log.
    std::vector<CostEvent> record(const TaskTrace& trace);

    LedgerReport report() const;
    // Report over [first_task, first_task + count) in recording order.
    LedgerReport report(std::size_t first_task, std::size_t count) const;

    const std::vector<CostEvent>& events() const { return events_; }
    std::size_t task_count() const { return traces_.size(); }
    const RateCard& rates() const { return rates_; }

  private:
    RateCard rates_;
    std::vector<TaskTrace> traces_;
    std::vector<CostEvent> events_;
};

std::string ledger_report_csv(const LedgerReport& report);
LedgerReport parse_ledger_report_csv(const std::string& text);
std::string ledger_report_json(const LedgerReport& report);

}  // namespace sediment
