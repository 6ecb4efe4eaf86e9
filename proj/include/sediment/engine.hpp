#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sediment/clock.hpp"
#include "sediment/journal.hpp"
#include "sediment/layout.hpp"
#include "sediment/ledger.hpp"
#include "sediment/lint.hpp"
#include "sediment/memory_index.hpp"
#include "sediment/merge.hpp"
#include "sediment/oracle.hpp"

namespace sediment {

struct EngineConfig {
    // Fixed bookkeeping costs for index recall and page reads; token-free,
    // latency only.
    Usage recall_cost{0, 0, 9};
    Usage wiki_read_cost{0, 0, 3};
    // A synthesis page serves a query directly when its stored question
    // covers this share of the query's tokens.
    double coverage_threshold = 0.8;
    int recall_limit = 5;
    JournalOptions journal;

    static EngineConfig load(const std::filesystem::path& config_file);
};

enum class Route { wiki_first, search_allowed_after_wiki_miss, direct_answer };
const char* route_name(Route route);

struct RoutingDecision {
    std::vector<RecallHit> recalled;
    Route route = Route::direct_answer;
    std::string reason;
};

enum class CronKind { daily_ingest_scan, daily_lint, weekly_merge };
const char* cron_kind_name(CronKind kind);
CronKind cron_kind_from_name(const std::string& name);

struct IngestOutcome {
    bool skipped = false;  // manifest hash unchanged; nothing written
    TaskTrace trace;
    std::vector<std::string> pages;  // vault-relative paths written
};

struct QueryOutcome {
    std::string answer;
    TaskTrace trace;
    RoutingDecision routing;  // carries the final route after any escalation
};

struct CronOutcome {
    TaskTrace trace;
    std::vector<IngestOutcome> ingests;
    std::optional<LintReport> lint;
    std::string lint_report_path;  // vault-relative
    std::optional<MergeReport> merge;
};

// One task at a time against one vault: recall, route, read, reason, answer,
// then capitalize (write-back and distill happen after the answer is out).
class Engine {
  public:
    using AnswerCallback = std::function<void(const std::string&)>;

    Engine(const VaultLayout& vault, Oracle& oracle, Clock& clock,
           EngineConfig config = EngineConfig());

    const VaultLayout& vault() const { return vault_; }
    const EngineConfig& config() const { return config_; }
    MemoryStore& memory() { return store_; }

    RoutingDecision route(const std::string& query_text) const;
    IngestOutcome ingest(const std::filesystem::path& raw_relative);
    QueryOutcome query(const std::string& question, const AnswerCallback& on_answer = nullptr);
    CronOutcome run_scheduled(CronKind kind);

    // The write-back half of the search path, public so idempotence is
    // directly testable. Returns the net-new fact count.
    int apply_search_writeback(const SearchResult& result, TaskTrace& trace);

  private:
    std::string next_task_id();
    void persist_trace(const TaskTrace& trace);
    WikiPage draft_to_page(const PageDraft& draft);
    void distill(const std::string& question, const std::string& answer, TaskTrace& trace);
    std::optional<WikiPage> load_if_exists(const std::filesystem::path& vault_relative) const;
    void deliver(const AnswerCallback& on_answer, const std::string& answer);

    VaultLayout vault_;
    Oracle& oracle_;
    Clock& clock_;
    EngineConfig config_;
    MemoryStore store_;
    std::int64_t next_task_number_ = 1;
};

// Share of the query's tokens covered by the synthesis page's stored
// question; exposed for direct testing.
double coverage_score(const std::string& question, const std::string& stored_question);
std::string question_section(const std::string& body);

}  // namespace sediment
