#include "sediment/index.hpp"

#include <algorithm>
#include <sstream>

#include "sediment/links.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace {

const std::pair<PageKind, const char*> kGroupHeadings[] = {
    {PageKind::source_summary, "Sources"},
    {PageKind::entity, "Entities"},
    {PageKind::concept_page, "Concepts"},
    {PageKind::synthesis, "Synthesis"},
};

std::optional<PageKind> kind_for_heading(const std::string& heading) {
    for (const auto& [kind, name] : kGroupHeadings) {
        if (heading == name) return kind;
    }
    return std::nullopt;
}

}  // namespace

bool IndexDoc::contains(PageKind kind, const std::string& title) const {
    auto it = groups.find(kind);
    if (it == groups.end()) return false;
    std::string key = canonical_title(title);
    for (const std::string& t : it->second) {
        if (canonical_title(t) == key) return true;
    }
    return false;
}

bool IndexDoc::insert(PageKind kind, const std::string& title) {
    if (contains(kind, title)) return false;
    auto& entries = groups[kind];
    entries.push_back(title);
    std::sort(entries.begin(), entries.end(), [](const std::string& a, const std::string& b) {
        return canonical_title(a) < canonical_title(b);
    });
    return true;
}

int IndexDoc::remove(PageKind kind, const std::string& canonical) {
    auto it = groups.find(kind);
    if (it == groups.end()) return 0;
    auto& entries = it->second;
    auto before = entries.size();
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [&](const std::string& t) {
                                     return canonical_title(t) == canonical;
                                 }),
                  entries.end());
    return static_cast<int>(before - entries.size());
}

IndexDoc parse_index(const std::string& text) {
    IndexDoc doc;
    std::optional<PageKind> current;
    for (const std::string& line : split_lines(text)) {
        std::string t = trim(line);
        if (t.rfind("## ", 0) == 0) {
            current = kind_for_heading(trim(t.substr(3)));
            continue;
        }
        if (current && t.rfind("- ", 0) == 0) {
            auto targets = extract_links(t);
            if (!targets.empty()) doc.groups[*current].push_back(targets.front());
        }
    }
    return doc;
}

std::string render_index(const IndexDoc& doc) {
    std::ostringstream out;
    out << "# Index\n";
    for (const auto& [kind, heading] : kGroupHeadings) {
        auto it = doc.groups.find(kind);
        if (it == doc.groups.end() || it->second.empty()) continue;
        out << "\n## " << heading << "\n\n";
        for (const std::string& title : it->second) out << "- [[" << title << "]]\n";
    }
    return out.str();
}

bool update_index(const VaultLayout& vault, TaskJournal& journal, const WikiPage& page) {
    std::filesystem::path rel = vault.rel(vault.index_path);
    std::string current = journal.read_through(rel).value_or("# Index\n");
    IndexDoc doc = parse_index(current);
    if (!doc.insert(page.kind, page.title)) return false;
    journal.stage_write(rel, render_index(doc));
    return true;
}

}  // namespace sediment
