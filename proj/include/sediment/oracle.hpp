#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sediment/page.hpp"

namespace sediment {

// Token and wall-clock meter attached to every oracle exchange. latency_ms is
// virtual time: recorded and summed, never slept on.
struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t latency_ms = 0;

    std::int64_t total_tokens() const { return input_tokens + output_tokens; }

    Usage& operator+=(const Usage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        latency_ms += other.latency_ms;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

enum class OraclePhase { ingest_extract, ceo_reasoning, answer_synthesis, distill_judgement };

const char* oracle_phase_name(OraclePhase phase);
OraclePhase oracle_phase_from_name(const std::string& name);

// How the oracle judged the material it was given. `none` for phases that do
// not judge (ingest_extract). The wiki-insufficiency signal that unlocks the
// search route is `not_in_wiki`, and only ever that.
enum class OracleVerdict { none, answered, answered_from_page, needs_more_context, not_in_wiki };

const char* oracle_verdict_name(OracleVerdict verdict);
OracleVerdict oracle_verdict_from_name(const std::string& name);

struct NamedBlob {
    std::string name;
    std::string text;
};

struct OracleRequest {
    OraclePhase phase = OraclePhase::ceo_reasoning;
    std::vector<NamedBlob> inputs;

    // Input names joined with '+', e.g. "question+page". Part of the fixture
    // key, so a request with a different shape can never match.
    std::string signature() const;
    // The first input's text; by convention the question (or raw source for
    // ingest_extract). The other blobs are context the pipeline assembled.
    const std::string& primary() const;
};

struct PageDraft {
    PageKind kind = PageKind::entity;
    std::string title;
    int importance = 1;
    std::string body;
};

struct OracleResponse {
    std::string text;
    OracleVerdict verdict = OracleVerdict::none;
    std::vector<PageDraft> proposed_pages;
    std::optional<int> importance_judgement;
    Usage usage;
};

struct SearchFact {
    std::string statement;
    std::optional<std::string> date;
    std::string source_label;
};

// Write-back is mechanical (no oracle call of its own), so its metered cost
// and target entity ride along with the search script.
struct WritebackDirective {
    std::string entity_title;
    int importance = 4;
    Usage usage;
};

struct SearchResult {
    std::vector<SearchFact> facts;
    Usage usage;
    WritebackDirective writeback;
};

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual OracleResponse process(const OracleRequest& request) = 0;
    virtual SearchResult search(const std::string& query) = 0;
};

// Replays scripted exchanges from a line-delimited JSON file. Keying is
// (phase, input signature, primary input text); an unscripted key raises
// FixtureMissError naming the key instead of improvising an answer.
class FixtureOracle final : public Oracle {
public:
    static FixtureOracle from_file(const std::filesystem::path& fixture_file);
    static FixtureOracle from_jsonl(const std::string& jsonl);

    OracleResponse process(const OracleRequest& request) override;
    SearchResult search(const std::string& query) override;

    int scripted_process_count() const { return static_cast<int>(process_map_.size()); }
    int scripted_search_count() const { return static_cast<int>(search_map_.size()); }

    static std::string request_key(OraclePhase phase, const std::string& signature,
                                   const std::string& primary);

private:
    std::map<std::string, OracleResponse> process_map_;
    std::map<std::string, SearchResult> search_map_;
};

}  // namespace sediment
