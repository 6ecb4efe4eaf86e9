#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sediment/clock.hpp"
#include "sediment/journal.hpp"
#include "sediment/layout.hpp"

namespace sediment {

struct MergeGroup {
    PageKind kind;
    std::string title;  // survivor display title
    std::filesystem::path survivor;
    std::vector<std::filesystem::path> absorbed;
};

struct MergeReport {
    std::vector<MergeGroup> merged_groups;
    // Canonical titles left unmerged. Non-empty only when the write budget
    // ran out, in which case the whole task was rolled back.
    std::vector<std::string> remaining_groups;
    bool rolled_back = false;
    int inbound_rewrites = 0;
};

// Merges pages of the same kind whose titles are canonically equal. The
// survivor is the oldest page (created_at, then path); its body absorbs the
// duplicates under provenance headers, facts are re-sorted chronologically,
// inbound links across the vault are rewritten to the survivor title, and the
// index drops duplicate entries. Everything is staged into the given journal;
// committing is the caller's job. On budget exhaustion the journal is rolled
// back and the report lists every group as remaining.
MergeReport merge_duplicates(const VaultLayout& vault, TaskJournal& journal, Clock& clock);

}  // namespace sediment
