#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sediment/clock.hpp"
#include "sediment/layout.hpp"
#include "sediment/page.hpp"

namespace sediment {

// One line of memory.jsonl. Records are immutable once appended and the
// store is strictly append-only.
struct MemoryRecord {
    std::int64_t id = 0;
    std::string kind = "wiki_sediment";
    std::string page_path;  // vault-relative
    std::string title;
    std::vector<std::string> keywords;  // lowercase, sorted, unique
    int importance = 1;
    std::string registered_at;
};

struct MemoryLoadReport {
    int records = 0;
    int skipped_lines = 0;  // malformed lines never abort a load
};

struct RecallHit {
    MemoryRecord record;
    int score = 0;  // shared-token count, always positive in results
};

// Snapshot index over wiki sediments. Keyword recall is deliberately dumb:
// lowercase token overlap, no weighting, so results are reproducible across
// sessions and platforms.
class MemoryStore {
public:
    explicit MemoryStore(std::filesystem::path store_path);

    MemoryLoadReport load();

    const std::vector<MemoryRecord>& records() const { return records_; }

    // True when the registration rule fires: synthesis pages always,
    // entity/concept pages at importance >= 4, source summaries never.
    static bool should_register(const WikiPage& page);

    static std::vector<std::string> keywords_for(const WikiPage& page);

    // Appends a record for the page iff should_register; the page must exist
    // on disk. Returns nullopt when the threshold is not met.
    std::optional<MemoryRecord> notify(const VaultLayout& vault, const WikiPage& page,
                                       Clock& clock);

    // Assigns the next id and appends durably.
    MemoryRecord append(MemoryRecord record);

    // Records with positive keyword overlap against the lowercased query
    // tokens, ordered by (score, importance, registered_at, id) descending.
    std::vector<RecallHit> recall(const std::string& query_text, int limit = 5) const;

private:
    std::filesystem::path store_path_;
    std::vector<MemoryRecord> records_;
    std::int64_t next_id_ = 1;
};

}  // namespace sediment
