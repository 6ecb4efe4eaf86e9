#pragma once

#include <map>
#include <string>
#include <vector>

#include "sediment/journal.hpp"
#include "sediment/layout.hpp"
#include "sediment/page.hpp"

namespace sediment {

// Parsed form of wiki/index.md: one group per page kind, entries sorted by
// canonical title. Entries keep their display titles.
struct IndexDoc {
    std::map<PageKind, std::vector<std::string>> groups;

    bool contains(PageKind kind, const std::string& title) const;
    // Inserts keeping canonical-title order; false if already present.
    bool insert(PageKind kind, const std::string& title);
    // Removes every entry whose canonical title matches; returns count removed.
    int remove(PageKind kind, const std::string& canonical);
};

IndexDoc parse_index(const std::string& text);
std::string render_index(const IndexDoc& doc);

// Stages an index.md update adding the page under its kind group if absent.
// The index path occupies one budget slot per task however often it is
// restaged. Returns false if the index already listed the page.
bool update_index(const VaultLayout& vault, TaskJournal& journal, const WikiPage& page);

}  // namespace sediment
