#include "sediment/ledger.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

using nlohmann::ordered_json;

const char* phase_name(Phase phase) {
    switch (phase) {
        case Phase::memory_recall: return "memory_recall";
        case Phase::wiki_read: return "wiki_read";
        case Phase::ceo_reasoning: return "ceo_reasoning";
        case Phase::web_search: return "web_search";
        case Phase::answer_synthesis: return "answer_synthesis";
        case Phase::memory_distill: return "memory_distill";
        case Phase::writeback: return "writeback";
        case Phase::ingest_extract: return "ingest_extract";
    }
    throw LedgerError("unclassifiable phase value " +
                      std::to_string(static_cast<int>(phase)));
}

Phase phase_from_name(const std::string& name) {
    if (name == "memory_recall") return Phase::memory_recall;
    if (name == "wiki_read") return Phase::wiki_read;
    if (name == "ceo_reasoning") return Phase::ceo_reasoning;
    if (name == "web_search") return Phase::web_search;
    if (name == "answer_synthesis") return Phase::answer_synthesis;
    if (name == "memory_distill") return Phase::memory_distill;
    if (name == "writeback") return Phase::writeback;
    if (name == "ingest_extract") return Phase::ingest_extract;
    throw LedgerError("unknown phase: " + name);
}

CostClass classify(Phase phase) {
    switch (phase) {
        case Phase::memory_recall:
        case Phase::wiki_read:
        case Phase::ceo_reasoning:
        case Phase::web_search:
        case Phase::answer_synthesis:
            return CostClass::operating;
        case Phase::memory_distill:
        case Phase::writeback:
        case Phase::ingest_extract:
            return CostClass::capital;
    }
    throw LedgerError("unclassifiable phase value " +
                      std::to_string(static_cast<int>(phase)));
}

Usage TaskTrace::total_usage() const {
    Usage total;
    for (const TraceStep& step : steps) total += step.usage;
    return total;
}

namespace {

ordered_json usage_json(const Usage& u) {
    return {{"input_tokens", u.input_tokens},
            {"output_tokens", u.output_tokens},
            {"latency_ms", u.latency_ms}};
}

Usage usage_from_json(const ordered_json& j) {
    return {j.at("input_tokens").get<std::int64_t>(),
            j.at("output_tokens").get<std::int64_t>(),
            j.at("latency_ms").get<std::int64_t>()};
}

}  // namespace

std::string task_trace_json(const TaskTrace& trace) {
    ordered_json steps = ordered_json::array();
    for (const TraceStep& step : trace.steps) {
        ordered_json s{{"phase", phase_name(step.phase)}, {"usage", usage_json(step.usage)}};
        if (!step.artifacts.empty()) s["artifacts"] = step.artifacts;
        if (!step.detail.empty()) s["detail"] = step.detail;
        steps.push_back(std::move(s));
    }
    ordered_json j{{"task_id", trace.task_id},
                   {"kind", trace.kind},
                   {"query_text", trace.query_text},
                   {"cache_hit", trace.cache_hit},
                   {"answer", trace.answer},
                   {"artifacts_created",
                    {{"synthesis_pages", trace.artifacts_created.synthesis_pages},
                     {"entity_facts_merged", trace.artifacts_created.entity_facts_merged}}},
                   {"journal_tasks", trace.journal_tasks},
                   {"steps", std::move(steps)}};
    return j.dump(2) + "\n";
}

TaskTrace parse_task_trace_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw LedgerError("malformed task trace JSON");
    TaskTrace trace;
    trace.task_id = j.at("task_id").get<std::string>();
    trace.kind = j.value("kind", "");
    trace.query_text = j.value("query_text", "");
    trace.cache_hit = j.value("cache_hit", false);
    trace.answer = j.value("answer", "");
    if (j.contains("artifacts_created")) {
        const auto& a = j.at("artifacts_created");
        trace.artifacts_created.synthesis_pages = a.value("synthesis_pages", std::int64_t{0});
        trace.artifacts_created.entity_facts_merged =
            a.value("entity_facts_merged", std::int64_t{0});
    }
    for (const auto& t : j.value("journal_tasks", ordered_json::array())) {
        trace.journal_tasks.push_back(t.get<std::string>());
    }
    for (const auto& s : j.value("steps", ordered_json::array())) {
        TraceStep step;
        step.phase = phase_from_name(s.at("phase").get<std::string>());
        step.usage = usage_from_json(s.at("usage"));
        for (const auto& a : s.value("artifacts", ordered_json::array())) {
            step.artifacts.push_back(a.get<std::string>());
        }
        step.detail = s.value("detail", "");
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

LatencyPartition latency_partition(const TaskTrace& trace) {
    LatencyPartition p;
    for (const TraceStep& step : trace.steps) {
        if (classify(step.phase) == CostClass::capital) {
            p.t_capital_ms += step.usage.latency_ms;
        } else {
            p.t_user_ms += step.usage.latency_ms;
        }
    }
    p.total_ms = p.t_user_ms + p.t_capital_ms;
    return p;
}

double amortized_avg(double c_ingest, double c_query, std::int64_t n) {
    if (n < 0) throw LedgerError("amortization count must be non-negative");
    return (c_ingest + static_cast<double>(n) * c_query) / (static_cast<double>(n) + 1.0);
}

RateCard RateCard::from_per_million(double input, double output, double cached_input,
                                    const std::string& currency) {
    if (input < 0 || output < 0 || cached_input < 0) {
        throw LedgerError("rates must be non-negative");
    }
    RateCard card;
    // dollars per million tokens -> 1e-8-dollar units per token is a factor
    // of exactly 100, so configured rates stay exact.
    card.input_rate = std::llround(input * 100.0);
    card.output_rate = std::llround(output * 100.0);
    card.cached_input_rate = std::llround(cached_input * 100.0);
    card.currency = currency;
    if (card.cached_input_rate > card.input_rate) {
        throw LedgerError("cached input rate exceeds the input rate");
    }
    return card;
}

RateCard RateCard::load(const std::filesystem::path& config_file) {
    ordered_json j = ordered_json::parse(read_file(config_file), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw LedgerError("malformed rate card: " + config_file.string());
    }
    return from_per_million(j.at("input_per_million").get<double>(),
                            j.at("output_per_million").get<double>(),
                            j.at("cached_input_per_million").get<double>(),
                            j.value("currency", "USD"));
}

RateCard RateCard::default_rates() {
    return from_per_million(2.50, 15.00, 0.25);
}

std::int64_t dollar_cost_units(std::int64_t input_tokens, std::int64_t output_tokens,
                               std::int64_t cached_prefix_tokens, const RateCard& rates) {
    if (input_tokens < 0 || output_tokens < 0 || cached_prefix_tokens < 0) {
        throw LedgerError("token counts must be non-negative");
    }
    if (cached_prefix_tokens > input_tokens) {
        throw LedgerError("cached prefix exceeds input tokens");
    }
    return (input_tokens - cached_prefix_tokens) * rates.input_rate +
           cached_prefix_tokens * rates.cached_input_rate + output_tokens * rates.output_rate;
}

std::string format_dollars(std::int64_t units) {
    if (units < 0) throw LedgerError("negative dollar amount");
    // Round to 4 decimal places: 1e4 units per ten-thousandth of a dollar.
    std::int64_t tenths = (units + 5'000) / 10'000;
    std::ostringstream out;
    out << tenths / 10'000 << '.';
    std::int64_t frac = tenths % 10'000;
    out << char('0' + frac / 1'000) << char('0' + frac / 100 % 10) << char('0' + frac / 10 % 10)
        << char('0' + frac % 10);
    return out.str();
}

CostLedger::CostLedger(RateCard rates) : rates_(std::move(rates)) {}

std::vector<CostEvent> CostLedger::record(const TaskTrace& trace) {
    std::vector<CostEvent> batch;
    batch.reserve(trace.steps.size());
    for (const TraceStep& step : trace.steps) {
        if (step.usage.input_tokens < 0 || step.usage.output_tokens < 0 ||
            step.usage.latency_ms < 0) {
            throw LedgerError("trace step with negative usage in " + trace.task_id);
        }
        CostEvent event;
        event.task_id = trace.task_id;
        event.phase = step.phase;
        event.usage = step.usage;
        event.cost_class = classify(step.phase);
        event.artifacts = step.artifacts;
        if (event.cost_class == CostClass::operating && !event.artifacts.empty()) {
            throw LedgerError("operating step " + std::string(phase_name(step.phase)) +
                              " in " + trace.task_id + " claims artifacts");
        }
        batch.push_back(event);
    }
    traces_.push_back(trace);
    events_.insert(events_.end(), batch.begin(), batch.end());
    return batch;
}

LedgerReport CostLedger::report() const { return report(0, traces_.size()); }

LedgerReport CostLedger::report(std::size_t first_task, std::size_t count) const {
    if (first_task > traces_.size() || count > traces_.size() - first_task) {
        throw LedgerError("report range exceeds recorded tasks");
    }
    LedgerReport rep;
    rep.cumulative.task_id = "total";
    for (std::size_t i = first_task; i < first_task + count; ++i) {
        const TaskTrace& trace = traces_[i];
        TaskCostRow row;
        row.task_id = trace.task_id;
        Usage operating, capital;
        for (const TraceStep& step : trace.steps) {
            (classify(step.phase) == CostClass::capital ? capital : operating) += step.usage;
        }
        row.operating_tokens = operating.total_tokens();
        row.capital_tokens = capital.total_tokens();
        row.total_tokens = row.operating_tokens + row.capital_tokens;
        row.t_user_ms = operating.latency_ms;
        row.t_capital_ms = capital.latency_ms;
        row.total_ms = row.t_user_ms + row.t_capital_ms;
        row.operating_dollar_units =
            dollar_cost_units(operating.input_tokens, operating.output_tokens, 0, rates_);
        row.capital_dollar_units =
            dollar_cost_units(capital.input_tokens, capital.output_tokens, 0, rates_);
        row.total_dollar_units = row.operating_dollar_units + row.capital_dollar_units;

        rep.cumulative.total_tokens += row.total_tokens;
        rep.cumulative.operating_tokens += row.operating_tokens;
        rep.cumulative.capital_tokens += row.capital_tokens;
        rep.cumulative.t_user_ms += row.t_user_ms;
        rep.cumulative.t_capital_ms += row.t_capital_ms;
        rep.cumulative.total_ms += row.total_ms;
        rep.cumulative.operating_dollar_units += row.operating_dollar_units;
        rep.cumulative.capital_dollar_units += row.capital_dollar_units;
        rep.cumulative.total_dollar_units += row.total_dollar_units;

        rep.artifacts.synthesis_pages += trace.artifacts_created.synthesis_pages;
        rep.artifacts.entity_facts_merged += trace.artifacts_created.entity_facts_merged;
        rep.per_task.push_back(std::move(row));
    }
    return rep;
}

namespace {

constexpr const char* kCsvHeader =
    "task_id,total_tokens,operating_tokens,capital_tokens,t_user_ms,t_capital_ms,total_ms,"
    "operating_dollar_units,capital_dollar_units,total_dollar_units";

void append_row(std::ostringstream& out, const TaskCostRow& row) {
    out << row.task_id << ',' << row.total_tokens << ',' << row.operating_tokens << ','
        << row.capital_tokens << ',' << row.t_user_ms << ',' << row.t_capital_ms << ','
        << row.total_ms << ',' << row.operating_dollar_units << ','
        << row.capital_dollar_units << ',' << row.total_dollar_units << '\n';
}

}  // namespace

std::string ledger_report_csv(const LedgerReport& report) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const TaskCostRow& row : report.per_task) append_row(out, row);
    append_row(out, report.cumulative);
    return out.str();
}

LedgerReport parse_ledger_report_csv(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || lines.front() != kCsvHeader) {
        throw LedgerError("ledger CSV missing header");
    }
    std::vector<TaskCostRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream line(lines[i]);
        while (std::getline(line, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) {
            throw LedgerError("ledger CSV row " + std::to_string(i + 1) + " malformed");
        }
        TaskCostRow row;
        row.task_id = cells[0];
        try {
            row.total_tokens = std::stoll(cells[1]);
            row.operating_tokens = std::stoll(cells[2]);
            row.capital_tokens = std::stoll(cells[3]);
            row.t_user_ms = std::stoll(cells[4]);
            row.t_capital_ms = std::stoll(cells[5]);
            row.total_ms = std::stoll(cells[6]);
            row.operating_dollar_units = std::stoll(cells[7]);
            row.capital_dollar_units = std::stoll(cells[8]);
            row.total_dollar_units = std::stoll(cells[9]);
        } catch (const std::exception&) {
            throw LedgerError("ledger CSV row " + std::to_string(i + 1) + " malformed");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.back().task_id != "total") {
        throw LedgerError("ledger CSV missing total row");
    }
    LedgerReport report;
    report.cumulative = rows.back();
    rows.pop_back();
    report.per_task = std::move(rows);
    return report;
}

std::string ledger_report_json(const LedgerReport& report) {
    auto row_json = [](const TaskCostRow& row) {
        return ordered_json{{"task_id", row.task_id},
                            {"total_tokens", row.total_tokens},
                            {"operating_tokens", row.operating_tokens},
                            {"capital_tokens", row.capital_tokens},
                            {"t_user_ms", row.t_user_ms},
                            {"t_capital_ms", row.t_capital_ms},
                            {"total_ms", row.total_ms},
                            {"operating_dollar_units", row.operating_dollar_units},
                            {"capital_dollar_units", row.capital_dollar_units},
                            {"total_dollar_units", row.total_dollar_units},
                            {"dollars", format_dollars(row.total_dollar_units)}};
    };
    ordered_json per_task = ordered_json::array();
    for (const TaskCostRow& row : report.per_task) per_task.push_back(row_json(row));
    ordered_json j{{"per_task", std::move(per_task)},
                   {"cumulative", row_json(report.cumulative)},
                   {"artifacts",
                    {{"synthesis_pages", report.artifacts.synthesis_pages},
                     {"entity_facts_merged", report.artifacts.entity_facts_merged}}}};
    return j.dump(2) + "\n";
}

}  // namespace sediment
