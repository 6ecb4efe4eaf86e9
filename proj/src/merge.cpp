#include "sediment/merge.hpp"

#include <algorithm>
#include <map>

#include "sediment/error.hpp"
#include "sediment/facts.hpp"
#include "sediment/index.hpp"
#include "sediment/io.hpp"
#include "sediment/links.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;

MergeReport merge_duplicates(const VaultLayout& vault, TaskJournal& journal, Clock& clock) {
    MergeReport report;

    std::map<fs::path, WikiPage> pages;
    for (const fs::path& abs : list_files_recursive_sorted(vault.wiki_dir)) {
        if (abs.extension() != ".md" || abs == vault.index_path) continue;
        WikiPage p = load_page(vault, vault.rel(abs));
        pages.emplace(p.path, std::move(p));
    }

    std::map<std::pair<int, std::string>, std::vector<fs::path>> groups;
    for (const auto& [path, p] : pages) {
        groups[{static_cast<int>(p.kind), canonical_title(p.title)}].push_back(path);
    }

    std::vector<std::pair<std::string, std::vector<fs::path>>> work;
    for (auto& [key, paths] : groups) {
        if (paths.size() >= 2) work.emplace_back(key.second, paths);
    }
    if (work.empty()) return report;

    fs::path index_rel = vault.rel(vault.index_path);
    std::string index_before = journal.read_through(index_rel).value_or("# Index\n");
    IndexDoc doc = parse_index(index_before);

    try {
        for (auto& [canonical, paths] : work) {
            std::sort(paths.begin(), paths.end(), [&](const fs::path& a, const fs::path& b) {
                const WikiPage& pa = pages.at(a);
                const WikiPage& pb = pages.at(b);
                if (pa.created_at != pb.created_at) return pa.created_at < pb.created_at;
                return a.generic_string() < b.generic_string();
            });
            fs::path survivor_path = paths.front();
            std::vector<fs::path> absorbed(paths.begin() + 1, paths.end());

            WikiPage survivor = pages.at(survivor_path);
            std::vector<FactLine> facts = extract_facts(survivor.body);
            std::string body = strip_facts_section(survivor.body);
            for (const fs::path& dp : absorbed) {
                const WikiPage& dup = pages.at(dp);
                facts = merge_facts(facts, extract_facts(dup.body));
                std::string stripped = strip_facts_section(dup.body);
                if (!trim(stripped).empty()) {
                    body += "\n\n---\n\n_Merged from \"" + dup.title + "\" (created " +
                            dup.created_at + ")._\n\n" + stripped;
                }
                survivor.importance = std::max(survivor.importance, dup.importance);
            }
            if (!facts.empty()) body = replace_facts_section(body, facts);
            survivor.body = body;
            survivor.updated_at = clock.now_iso8601();
            refresh_links(survivor);
            journal.stage_page(survivor);
            pages[survivor_path] = survivor;

            for (const fs::path& dp : absorbed) {
                journal.stage_delete(dp);
                pages.erase(dp);
            }

            for (auto& [pp, p] : pages) {
                if (pp == survivor_path) continue;
                std::string rewritten = rewrite_links(p.body, canonical, survivor.title);
                if (rewritten != p.body) {
                    p.body = rewritten;
                    p.updated_at = clock.now_iso8601();
                    refresh_links(p);
                    journal.stage_page(p);
                    ++report.inbound_rewrites;
                }
            }

            doc.remove(survivor.kind, canonical);
            doc.insert(survivor.kind, survivor.title);
            report.merged_groups.push_back(
                {survivor.kind, survivor.title, survivor_path, absorbed});
        }
        std::string index_after = render_index(doc);
        if (index_after != index_before) journal.stage_write(index_rel, index_after);
    } catch (const BudgetExceededError&) {
        journal.rollback();
        report = MergeReport{};
        report.rolled_back = true;
        for (const auto& [canonical, paths] : work) report.remaining_groups.push_back(canonical);
    }
    return report;
}

}  // namespace sediment
