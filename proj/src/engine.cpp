#include "sediment/engine.hpp"

#include <algorithm>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "sediment/error.hpp"
#include "sediment/facts.hpp"
#include "sediment/hash.hpp"
#include "sediment/index.hpp"
#include "sediment/io.hpp"
#include "sediment/manifest.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

EngineConfig EngineConfig::load(const fs::path& config_file) {
    ordered_json j = ordered_json::parse(read_file(config_file), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("malformed engine config: " + config_file.string());
    }
    EngineConfig cfg;
    cfg.recall_cost.latency_ms = j.value("recall_latency_ms", cfg.recall_cost.latency_ms);
    cfg.wiki_read_cost.latency_ms = j.value("wiki_read_latency_ms", cfg.wiki_read_cost.latency_ms);
    cfg.coverage_threshold = j.value("coverage_threshold", cfg.coverage_threshold);
    cfg.recall_limit = j.value("recall_limit", cfg.recall_limit);
    cfg.journal.write_budget = j.value("write_budget", cfg.journal.write_budget);
    cfg.journal.max_write_attempts = j.value("max_write_attempts", cfg.journal.max_write_attempts);
    if (cfg.coverage_threshold < 0.0 || cfg.coverage_threshold > 1.0 || cfg.recall_limit < 1 ||
        cfg.journal.write_budget < 3 || cfg.journal.max_write_attempts < 1) {
        throw ConfigError("engine config values out of range: " + config_file.string());
    }
    return cfg;
}

const char* route_name(Route route) {
    switch (route) {
        case Route::wiki_first: return "wiki_first";
        case Route::search_allowed_after_wiki_miss: return "search_allowed_after_wiki_miss";
        case Route::direct_answer: return "direct_answer";
    }
    throw PipelineError("unknown route");
}

const char* cron_kind_name(CronKind kind) {
    switch (kind) {
        case CronKind::daily_ingest_scan: return "daily_ingest_scan";
        case CronKind::daily_lint: return "daily_lint";
        case CronKind::weekly_merge: return "weekly_merge";
    }
    throw PipelineError("unknown cron kind");
}

CronKind cron_kind_from_name(const std::string& name) {
    if (name == "daily_ingest_scan") return CronKind::daily_ingest_scan;
    if (name == "daily_lint") return CronKind::daily_lint;
    if (name == "weekly_merge") return CronKind::weekly_merge;
    throw PipelineError("unknown cron kind: " + name);
}

std::string question_section(const std::string& body) {
    bool in_section = false;
    std::string out;
    for (const std::string& line : split_lines(body)) {
        if (line.rfind("## ", 0) == 0) {
            if (in_section) break;
            in_section = trim(line) == "## Question";
            continue;
        }
        if (in_section) out += line + "\n";
    }
    return out;
}

double coverage_score(const std::string& question, const std::string& stored_question) {
    std::vector<std::string> q = token_set(question);
    if (q.empty()) return 0.0;
    std::vector<std::string> s = token_set(stored_question);
    std::vector<std::string> shared;
    std::set_intersection(q.begin(), q.end(), s.begin(), s.end(), std::back_inserter(shared));
    return static_cast<double>(shared.size()) / static_cast<double>(q.size());
}

namespace {

OracleRequest make_request(OraclePhase phase, std::vector<NamedBlob> inputs) {
    OracleRequest r;
    r.phase = phase;
    r.inputs = std::move(inputs);
    return r;
}

TraceStep make_step(Phase phase, Usage usage, std::string detail = "") {
    TraceStep s;
    s.phase = phase;
    s.usage = usage;
    s.detail = std::move(detail);
    return s;
}

std::string pages_blob(const std::vector<WikiPage>& pages) {
    std::string blob;
    for (const WikiPage& p : pages) {
        blob += "# " + p.title + "\n\n" + p.body + "\n\n";
    }
    return blob;
}

}  // namespace

Engine::Engine(const VaultLayout& vault, Oracle& oracle, Clock& clock, EngineConfig config)
    : vault_(vault), oracle_(oracle), clock_(clock), config_(std::move(config)),
      store_(vault.memory_path) {
    if (!is_vault(vault_.root)) {
        throw VaultError("not a vault: " + vault_.root.string());
    }
    // A crash mid-commit leaves an intent journal behind; repair before any
    // new task takes the lock.
    if (TaskJournal::needs_recovery(vault_)) TaskJournal::recover(vault_);
    store_.load();
    fs::path traces = vault_.output_dir / "traces";
    if (fs::is_directory(traces)) {
        for (const fs::path& f : list_files_sorted(traces)) {
            std::string name = f.filename().string();
            if (name.rfind("task-", 0) != 0 || f.extension() != ".json") continue;
            std::int64_t n = 0;
            try {
                n = std::stoll(name.substr(5, name.size() - 5 - 5));
            } catch (const std::exception&) {
                continue;
            }
            next_task_number_ = std::max(next_task_number_, n + 1);
        }
    }
}

std::string Engine::next_task_id() {
    std::string digits = std::to_string(next_task_number_++);
    return "task-" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

void Engine::persist_trace(const TaskTrace& trace) {
    write_file_atomic(vault_.output_dir / "traces" / (trace.task_id + ".json"),
                      task_trace_json(trace));
}

WikiPage Engine::draft_to_page(const PageDraft& draft) {
    if (trim(draft.title).empty()) throw PipelineError("page draft with empty title");
    if (draft.importance < 1 || draft.importance > 5) {
        throw PipelineError("page draft importance out of range: " + draft.title);
    }
    WikiPage page;
    page.path = vault_.default_page_path(draft.kind, draft.title);
    page.kind = draft.kind;
    page.title = draft.title;
    page.importance = draft.importance;
    page.created_at = clock_.now_iso8601();
    page.updated_at = page.created_at;
    page.body = draft.body;
    refresh_links(page);
    return page;
}

std::optional<WikiPage> Engine::load_if_exists(const fs::path& vault_relative) const {
    if (!fs::exists(vault_.abs(vault_relative))) return std::nullopt;
    return load_page(vault_, vault_relative);
}

void Engine::deliver(const AnswerCallback& on_answer, const std::string& answer) {
    if (on_answer) on_answer(answer);
}

IngestOutcome Engine::ingest(const fs::path& raw_relative) {
    std::string source = raw_relative.generic_string();
    if (source.rfind("raw/", 0) != 0) {
        throw PipelineError("ingest source must live under raw/: " + source);
    }
    fs::path abs = vault_.abs(raw_relative);
    if (!fs::is_regular_file(abs)) throw PipelineError("ingest source missing: " + source);

    IngestOutcome outcome;
    outcome.trace.kind = "ingest";
    outcome.trace.query_text = source;

    std::string content_hash = sha256_file(abs);
    VaultManifest manifest = load_manifest(vault_);
    if (!manifest.needs_ingest(source, content_hash)) {
        outcome.skipped = true;
        return outcome;
    }

    std::string content = read_file(abs);
    OracleResponse resp =
        oracle_.process(make_request(OraclePhase::ingest_extract, {{"source", content}}));
    if (resp.proposed_pages.empty()) {
        throw PipelineError("ingest extraction proposed no pages for " + source);
    }

    TaskTrace& trace = outcome.trace;
    trace.task_id = next_task_id();

    std::vector<WikiPage> pages;
    pages.reserve(resp.proposed_pages.size());
    for (const PageDraft& draft : resp.proposed_pages) pages.push_back(draft_to_page(draft));

    ManifestEntry entry;
    entry.source = source;
    entry.content_hash = content_hash;
    entry.ingested_at = clock_.now_iso8601();
    for (const WikiPage& p : pages) entry.produced_pages.push_back(p.path.generic_string());

    // Chunk the page writes so each journaled task keeps room for the index
    // and, in the final task, the manifest. The manifest lands last: a crash
    // between tasks leaves the delta check failing, so re-ingest is safe.
    std::size_t per_task = static_cast<std::size_t>(std::max(1, config_.journal.write_budget - 2));
    std::size_t done = 0;
    int chunk_no = 0;
    while (done < pages.size()) {
        ++chunk_no;
        std::string journal_id = trace.task_id + "/" + std::to_string(chunk_no);
        TaskJournal journal(vault_, journal_id, config_.journal);
        std::size_t end = std::min(pages.size(), done + per_task);
        for (std::size_t i = done; i < end; ++i) {
            journal.stage_page(pages[i]);
            update_index(vault_, journal, pages[i]);
        }
        if (end == pages.size()) {
            std::string existing = journal.read_through("manifest.jsonl").value_or("");
            journal.stage_write("manifest.jsonl", existing + manifest_entry_line(entry));
        }
        journal.commit();
        trace.journal_tasks.push_back(journal_id);
        for (std::size_t i = done; i < end; ++i) store_.notify(vault_, pages[i], clock_);
        done = end;
    }

    TraceStep step = make_step(Phase::ingest_extract, resp.usage,
                               "extracted " + std::to_string(pages.size()) + " pages");
    for (const WikiPage& p : pages) {
        step.artifacts.push_back(p.path.generic_string());
        outcome.pages.push_back(p.path.generic_string());
    }
    trace.steps.push_back(std::move(step));
    persist_trace(trace);
    return outcome;
}

RoutingDecision Engine::route(const std::string& query_text) const {
    RoutingDecision decision;
    decision.recalled = store_.recall(query_text, config_.recall_limit);
    if (decision.recalled.empty()) {
        decision.route = Route::direct_answer;
        decision.reason = "memory recall returned nothing; cold start";
    } else {
        decision.route = Route::wiki_first;
        decision.reason = "recall returned wiki sediment; wiki before any search";
    }
    return decision;
}

QueryOutcome Engine::query(const std::string& question, const AnswerCallback& on_answer) {
    QueryOutcome out;
    TaskTrace& trace = out.trace;
    trace.task_id = next_task_id();
    trace.kind = "query";
    trace.query_text = question;

    out.routing = route(question);
    trace.steps.push_back(make_step(Phase::memory_recall, config_.recall_cost,
                                    std::to_string(out.routing.recalled.size()) + " hits; " +
                                        route_name(out.routing.route)));

    // Records can outlive their pages (the store is append-only; merge may
    // absorb a page). Reads skip those tombstones.
    std::vector<WikiPage> read_pages;
    read_pages.reserve(static_cast<std::size_t>(config_.recall_limit) + 1);
    std::set<std::string> seen_paths;
    auto read_page = [&](const MemoryRecord& record) -> bool {
        if (!seen_paths.insert(record.page_path).second) return false;
        std::optional<WikiPage> page = load_if_exists(record.page_path);
        if (!page) return false;
        read_pages.push_back(std::move(*page));
        trace.steps.push_back(
            make_step(Phase::wiki_read, config_.wiki_read_cost, record.page_path));
        return true;
    };

    std::size_t next_hit = 0;
    const WikiPage* top = nullptr;
    while (next_hit < out.routing.recalled.size()) {
        if (read_page(out.routing.recalled[next_hit++].record)) {
            top = &read_pages.back();
            break;
        }
    }

    if (!top) {
        if (!out.routing.recalled.empty()) {
            out.routing.reason = "recalled records all point at absorbed pages";
        }
        out.routing.route = Route::direct_answer;
        OracleResponse resp =
            oracle_.process(make_request(OraclePhase::ceo_reasoning, {{"question", question}}));
        trace.steps.push_back(make_step(Phase::ceo_reasoning, resp.usage));
        out.answer = resp.text;
        deliver(on_answer, out.answer);
        distill(question, out.answer, trace);
        persist_trace(trace);
        return out;
    }

    // Layer one of the cache: a synthesis page whose stored question covers
    // this query is reshaped and returned without any reasoning pass.
    if (top->kind == PageKind::synthesis) {
        double cov = coverage_score(question, question_section(top->body));
        if (cov >= config_.coverage_threshold) {
            OracleResponse resp = oracle_.process(make_request(
                OraclePhase::answer_synthesis, {{"question", question}, {"synthesis", top->body}}));
            trace.steps.push_back(make_step(Phase::answer_synthesis, resp.usage, "synthesis hit"));
            trace.cache_hit = true;
            out.answer = resp.text;
            deliver(on_answer, out.answer);
            persist_trace(trace);
            return out;
        }
    }

    // Layer two: probe whether the top page alone answers.
    OracleResponse probe = oracle_.process(
        make_request(OraclePhase::answer_synthesis, {{"question", question}, {"page", top->body}}));
    trace.steps.push_back(make_step(Phase::answer_synthesis, probe.usage, "page probe"));
    OracleVerdict verdict = probe.verdict;
    out.answer = probe.text;

    if (verdict == OracleVerdict::answered || verdict == OracleVerdict::answered_from_page) {
        trace.cache_hit = true;
        deliver(on_answer, out.answer);
        persist_trace(trace);
        return out;
    }

    if (verdict == OracleVerdict::needs_more_context) {
        while (next_hit < out.routing.recalled.size()) {
            read_page(out.routing.recalled[next_hit++].record);
        }
        OracleResponse reasoned = oracle_.process(make_request(
            OraclePhase::ceo_reasoning, {{"question", question}, {"pages", pages_blob(read_pages)}}));
        trace.steps.push_back(make_step(Phase::ceo_reasoning, reasoned.usage));
        verdict = reasoned.verdict;
        out.answer = reasoned.text;
        if (verdict == OracleVerdict::answered || verdict == OracleVerdict::answered_from_page) {
            deliver(on_answer, out.answer);
            distill(question, out.answer, trace);
            persist_trace(trace);
            return out;
        }
    }

    if (verdict != OracleVerdict::not_in_wiki) {
        throw PipelineError(std::string("query cannot proceed from verdict ") +
                            oracle_verdict_name(verdict));
    }

    // Explicit miss reported by the wiki pass; only now is search permitted.
    out.routing.route = Route::search_allowed_after_wiki_miss;
    out.routing.reason = "wiki pass explicitly reported the answer is not in the wiki";
    SearchResult found = oracle_.search(question);
    trace.steps.push_back(make_step(Phase::web_search, found.usage,
                                    std::to_string(found.facts.size()) + " facts"));

    std::string facts_text;
    for (const SearchFact& f : found.facts) {
        FactLine line;
        line.date = f.date;
        line.statement = f.statement;
        facts_text += render_fact_line(line) + "\n";
    }
    OracleResponse final_resp = oracle_.process(
        make_request(OraclePhase::answer_synthesis,
                     {{"question", question}, {"pages", pages_blob(read_pages)},
                      {"facts", facts_text}}));
    trace.steps.push_back(make_step(Phase::answer_synthesis, final_resp.usage, "search merge"));
    out.answer = final_resp.text;

    // The user gets the answer before any capital work begins.
    deliver(on_answer, out.answer);
    apply_search_writeback(found, trace);
    distill(question, out.answer, trace);
    persist_trace(trace);
    return out;
}

int Engine::apply_search_writeback(const SearchResult& result, TaskTrace& trace) {
    if (result.facts.empty()) throw PipelineError("write-back requires at least one fact");
    const std::string& title = result.writeback.entity_title;
    if (trim(title).empty()) throw PipelineError("write-back directive without an entity title");

    fs::path rel = vault_.default_page_path(PageKind::entity, title);
    std::optional<WikiPage> existing = load_if_exists(rel);
    WikiPage page;
    if (existing) {
        page = std::move(*existing);
    } else {
        page.path = rel;
        page.kind = PageKind::entity;
        page.title = title;
        page.importance = 1;
        page.created_at = clock_.now_iso8601();
        page.updated_at = page.created_at;
        page.body = title + " is tracked from searched facts.";
    }

    std::vector<FactLine> incoming;
    for (const SearchFact& f : result.facts) {
        if (f.date && !is_fact_date(*f.date)) {
            throw PipelineError("search fact with malformed date: " + *f.date);
        }
        FactLine line;
        line.date = f.date;
        line.statement = f.statement;
        incoming.push_back(std::move(line));
    }

    int added = 0;
    std::vector<FactLine> merged = merge_facts(extract_facts(page.body), incoming, &added);
    std::string new_body = replace_facts_section(page.body, merged);
    int importance = std::max(page.importance, result.writeback.importance);
    bool changed = new_body != page.body || importance != page.importance || !existing;

    TraceStep step = make_step(Phase::writeback, result.writeback.usage,
                               "+" + std::to_string(added) + " facts -> " + title);
    if (changed) {
        page.body = std::move(new_body);
        page.importance = importance;
        page.updated_at = clock_.now_iso8601();
        refresh_links(page);
        std::string journal_id = trace.task_id + "/writeback";
        TaskJournal journal(vault_, journal_id, config_.journal);
        journal.stage_page(page);
        update_index(vault_, journal, page);
        journal.commit();
        trace.journal_tasks.push_back(journal_id);
        step.artifacts.push_back(page.path.generic_string());
        store_.notify(vault_, page, clock_);
    } else {
        step.detail = "no-op; page already carries these facts";
    }
    trace.steps.push_back(std::move(step));
    trace.artifacts_created.entity_facts_merged += added;
    return added;
}

void Engine::distill(const std::string& question, const std::string& answer, TaskTrace& trace) {
    OracleResponse resp = oracle_.process(make_request(
        OraclePhase::distill_judgement, {{"question", question}, {"answer", answer}}));
    TraceStep step = make_step(Phase::memory_distill, resp.usage, "nothing worth keeping");
    if (!resp.proposed_pages.empty()) {
        std::string journal_id = trace.task_id + "/distill";
        TaskJournal journal(vault_, journal_id, config_.journal);
        std::vector<WikiPage> pages;
        for (const PageDraft& draft : resp.proposed_pages) {
            WikiPage page = draft_to_page(draft);
            journal.stage_page(page);
            update_index(vault_, journal, page);
            pages.push_back(std::move(page));
        }
        journal.commit();
        trace.journal_tasks.push_back(journal_id);
        step.detail = std::to_string(pages.size()) + " pages distilled";
        for (const WikiPage& page : pages) {
            step.artifacts.push_back(page.path.generic_string());
            if (page.kind == PageKind::synthesis) ++trace.artifacts_created.synthesis_pages;
            store_.notify(vault_, page, clock_);
        }
    }
    trace.steps.push_back(std::move(step));
}

CronOutcome Engine::run_scheduled(CronKind kind) {
    CronOutcome out;
    TaskTrace& trace = out.trace;
    trace.task_id = next_task_id();
    trace.kind = "cron";
    trace.query_text = cron_kind_name(kind);

    switch (kind) {
        case CronKind::daily_ingest_scan: {
            int scanned = 0;
            for (const fs::path& file : list_files_recursive_sorted(vault_.raw_dir)) {
                ++scanned;
                IngestOutcome o = ingest(vault_.rel(file));
                if (!o.skipped) out.ingests.push_back(std::move(o));
            }
            trace.answer = std::to_string(out.ingests.size()) + " of " +
                           std::to_string(scanned) + " sources ingested";
            break;
        }
        case CronKind::daily_lint: {
            LintReport report = lint_vault(vault_);
            std::string stamp = clock_.now_iso8601();
            std::erase(stamp, ':');
            fs::path rel = fs::path("output") / "lint" / (stamp + ".md");
            write_file_atomic(vault_.abs(rel), format_lint_report(report));
            out.lint_report_path = rel.generic_string();
            trace.answer = (report.clean() ? "clean; " : "issues found; ") +
                           out.lint_report_path;
            out.lint = std::move(report);
            break;
        }
        case CronKind::weekly_merge: {
            std::string journal_id = trace.task_id + "/merge";
            TaskJournal journal(vault_, journal_id, config_.journal);
            MergeReport report = merge_duplicates(vault_, journal, clock_);
            if (!report.rolled_back) {
                journal.commit();
                trace.journal_tasks.push_back(journal_id);
            }
            trace.answer = std::to_string(report.merged_groups.size()) + " groups merged";
            out.merge = std::move(report);
            break;
        }
    }
    persist_trace(trace);
    return out;
}

}  // namespace sediment
