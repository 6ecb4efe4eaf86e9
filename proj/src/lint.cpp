#include "sediment/lint.hpp"

#include <map>
#include <set>
#include <sstream>

#include "sediment/hash.hpp"
#include "sediment/io.hpp"
#include "sediment/links.hpp"
#include "sediment/manifest.hpp"
#include "sediment/page.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;

LintReport lint_vault(const VaultLayout& vault) {
    LintReport report;

    std::vector<WikiPage> pages;
    for (const fs::path& abs : list_files_recursive_sorted(vault.wiki_dir)) {
        if (abs.extension() != ".md") continue;
        if (abs == vault.index_path) continue;
        try {
            pages.push_back(load_page(vault, vault.rel(abs)));
        } catch (const std::exception& e) {
            report.unreadable_files.push_back(vault.rel(abs).generic_string() + ": " + e.what());
        }
    }
    report.pages_checked = static_cast<int>(pages.size());

    std::map<std::string, const WikiPage*> by_title;
    for (const WikiPage& p : pages) by_title.emplace(canonical_title(p.title), &p);

    std::set<std::string> inbound;  // canonical titles with at least one inbound link
    for (const WikiPage& p : pages) {
        for (const std::string& target : p.links) {
            std::string key = canonical_title(target);
            auto it = by_title.find(key);
            if (it == by_title.end()) {
                report.dangling_links.push_back({p.path, target});
            } else if (it->second != &p) {
                inbound.insert(key);
            }
        }
    }

    // The index is navigation, not content: it feeds index coverage but never
    // counts as an inbound link for the orphan metric.
    std::set<std::string> indexed;
    if (fs::exists(vault.index_path)) {
        for (const std::string& target : extract_links(read_file(vault.index_path))) {
            indexed.insert(canonical_title(target));
        }
    }

    for (const WikiPage& p : pages) {
        std::string key = canonical_title(p.title);
        if (!inbound.count(key)) report.orphan_pages.push_back(p.path);
        if (!indexed.count(key)) report.index_missing.push_back(p.path);
    }

    VaultManifest manifest = load_manifest(vault);
    for (const auto& [source, entry] : manifest.entries) {
        fs::path raw = vault.abs(source);
        if (!fs::exists(raw)) {
            report.raw_violations.push_back({source, "missing"});
        } else if (sha256_file(raw) != entry.content_hash) {
            report.raw_violations.push_back({source, "mutated"});
        }
    }

    return report;
}

std::string format_lint_report(const LintReport& report) {
    std::ostringstream out;
    out << "pages checked: " << report.pages_checked << "\n";
    out << "dangling links: " << report.dangling_links.size() << "\n";
    for (const auto& d : report.dangling_links) {
        out << "  " << d.page.generic_string() << " -> [[" << d.target << "]]\n";
    }
    out << "orphan pages: " << report.orphan_pages.size() << "\n";
    for (const auto& p : report.orphan_pages) out << "  " << p.generic_string() << "\n";
    out << "missing from index: " << report.index_missing.size() << "\n";
    for (const auto& p : report.index_missing) out << "  " << p.generic_string() << "\n";
    out << "raw violations: " << report.raw_violations.size() << "\n";
    for (const auto& v : report.raw_violations) out << "  " << v.source << ": " << v.detail << "\n";
    out << "unreadable files: " << report.unreadable_files.size() << "\n";
    for (const auto& u : report.unreadable_files) out << "  " << u << "\n";
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.4f", report.orphan_rate());
    out << "orphan rate: " << rate << "\n";
    return out.str();
}

}  // namespace sediment
