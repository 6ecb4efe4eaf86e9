#include "sediment/oracle.hpp"

#include <nlohmann/json.hpp>

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

using nlohmann::ordered_json;

const char* oracle_phase_name(OraclePhase phase) {
    switch (phase) {
        case OraclePhase::ingest_extract: return "ingest_extract";
        case OraclePhase::ceo_reasoning: return "ceo_reasoning";
        case OraclePhase::answer_synthesis: return "answer_synthesis";
        case OraclePhase::distill_judgement: return "distill_judgement";
    }
    throw OracleError("unknown oracle phase");
}

OraclePhase oracle_phase_from_name(const std::string& name) {
    if (name == "ingest_extract") return OraclePhase::ingest_extract;
    if (name == "ceo_reasoning") return OraclePhase::ceo_reasoning;
    if (name == "answer_synthesis") return OraclePhase::answer_synthesis;
    if (name == "distill_judgement") return OraclePhase::distill_judgement;
    throw OracleError("unknown oracle phase: " + name);
}

const char* oracle_verdict_name(OracleVerdict verdict) {
    switch (verdict) {
        case OracleVerdict::none: return "none";
        case OracleVerdict::answered: return "answered";
        case OracleVerdict::answered_from_page: return "answered_from_page";
        case OracleVerdict::needs_more_context: return "needs_more_context";
        case OracleVerdict::not_in_wiki: return "not_in_wiki";
    }
    throw OracleError("unknown oracle verdict");
}

OracleVerdict oracle_verdict_from_name(const std::string& name) {
    if (name == "none") return OracleVerdict::none;
    if (name == "answered") return OracleVerdict::answered;
    if (name == "answered_from_page") return OracleVerdict::answered_from_page;
    if (name == "needs_more_context") return OracleVerdict::needs_more_context;
    if (name == "not_in_wiki") return OracleVerdict::not_in_wiki;
    throw OracleError("unknown oracle verdict: " + name);
}

std::string OracleRequest::signature() const {
    std::vector<std::string> names;
    names.reserve(inputs.size());
    for (const NamedBlob& blob : inputs) names.push_back(blob.name);
    return join(names, "+");
}

const std::string& OracleRequest::primary() const {
    if (inputs.empty()) throw OracleError("oracle request has no inputs");
    return inputs.front().text;
}

namespace {

Usage parse_usage(const ordered_json& j) {
    Usage u;
    u.input_tokens = j.at("input_tokens").get<std::int64_t>();
    u.output_tokens = j.at("output_tokens").get<std::int64_t>();
    u.latency_ms = j.at("latency_ms").get<std::int64_t>();
    if (u.input_tokens < 0 || u.output_tokens < 0 || u.latency_ms < 0) {
        throw OracleError("fixture usage fields must be non-negative");
    }
    return u;
}

OracleResponse parse_response(const ordered_json& j) {
    OracleResponse r;
    r.text = j.value("text", "");
    r.verdict = oracle_verdict_from_name(j.value("verdict", "none"));
    if (j.contains("importance_judgement")) {
        r.importance_judgement = j.at("importance_judgement").get<int>();
    }
    for (const auto& pj : j.value("proposed_pages", ordered_json::array())) {
        PageDraft draft;
        draft.kind = page_kind_from_name(pj.at("kind").get<std::string>());
        draft.title = pj.at("title").get<std::string>();
        draft.importance = pj.at("importance").get<int>();
        draft.body = pj.at("body").get<std::string>();
        r.proposed_pages.push_back(std::move(draft));
    }
    r.usage = parse_usage(j.at("usage"));
    return r;
}

SearchResult parse_search(const ordered_json& j) {
    SearchResult s;
    for (const auto& fj : j.value("facts", ordered_json::array())) {
        SearchFact f;
        f.statement = fj.at("statement").get<std::string>();
        if (f.statement.empty()) throw OracleError("fixture search fact with empty statement");
        if (fj.contains("date") && !fj.at("date").is_null()) {
            f.date = fj.at("date").get<std::string>();
        }
        f.source_label = fj.value("source_label", "");
        s.facts.push_back(std::move(f));
    }
    s.usage = parse_usage(j.at("usage"));
    const auto& wj = j.at("writeback");
    s.writeback.entity_title = wj.at("entity_title").get<std::string>();
    s.writeback.importance = wj.at("importance").get<int>();
    s.writeback.usage = parse_usage(wj.at("usage"));
    return s;
}

}  // namespace

std::string FixtureOracle::request_key(OraclePhase phase, const std::string& signature,
                                       const std::string& primary) {
    return std::string(oracle_phase_name(phase)) + "|" + signature + "|" + primary;
}

FixtureOracle FixtureOracle::from_file(const std::filesystem::path& fixture_file) {
    return from_jsonl(read_file(fixture_file));
}

FixtureOracle FixtureOracle::from_jsonl(const std::string& jsonl) {
    FixtureOracle oracle;
    int line_no = 0;
    for (const std::string& line : split_lines(jsonl)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw OracleError("malformed fixture line " + std::to_string(line_no));
        }
        std::string type = j.value("type", "");
        if (type == "process") {
            OraclePhase phase = oracle_phase_from_name(j.at("phase").get<std::string>());
            std::string key = request_key(phase, j.at("signature").get<std::string>(),
                                          j.at("primary").get<std::string>());
            if (!oracle.process_map_.emplace(key, parse_response(j.at("response"))).second) {
                throw OracleError("duplicate fixture key at line " + std::to_string(line_no));
            }
        } else if (type == "search") {
            std::string query = j.at("query").get<std::string>();
            if (!oracle.search_map_.emplace(query, parse_search(j)).second) {
                throw OracleError("duplicate search fixture at line " + std::to_string(line_no));
            }
        } else {
            throw OracleError("fixture line " + std::to_string(line_no) +
                              " has unknown type: " + type);
        }
    }
    return oracle;
}

OracleResponse FixtureOracle::process(const OracleRequest& request) {
    std::string key = request_key(request.phase, request.signature(), request.primary());
    auto it = process_map_.find(key);
    if (it == process_map_.end()) {
        std::string preview = request.primary().substr(0, 80);
        throw FixtureMissError("no scripted response for phase=" +
                               std::string(oracle_phase_name(request.phase)) +
                               " signature=" + request.signature() + " primary=\"" + preview +
                               "\"");
    }
    return it->second;
}

SearchResult FixtureOracle::search(const std::string& query) {
    auto it = search_map_.find(query);
    if (it == search_map_.end()) {
        throw FixtureMissError("no scripted search result for query=\"" + query + "\"");
    }
    return it->second;
}

}  // namespace sediment
