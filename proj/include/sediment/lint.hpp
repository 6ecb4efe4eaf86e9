#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sediment/layout.hpp"

namespace sediment {

struct DanglingLink {
    std::filesystem::path page;  // vault-relative source page
    std::string target;          // unresolved link target
};

struct RawViolation {
    std::string source;  // raw-relative source name from the manifest
    std::string detail;  // what changed: mutated, missing
};

struct LintReport {
    int pages_checked = 0;
    std::vector<DanglingLink> dangling_links;
    std::vector<std::filesystem::path> orphan_pages;   // no inbound links
    std::vector<std::filesystem::path> index_missing;  // not linked from index.md
    std::vector<RawViolation> raw_violations;
    std::vector<std::string> unreadable_files;

    double orphan_rate() const {
        if (pages_checked == 0) return 0.0;
        return static_cast<double>(orphan_pages.size()) / pages_checked;
    }
    bool clean() const {
        return dangling_links.empty() && orphan_pages.empty() && index_missing.empty() &&
               raw_violations.empty() && unreadable_files.empty();
    }
};

// Read-only integrity pass over the whole vault. Link targets resolve by
// canonical title, so [[openclaw]] and [[OpenClaw]] reach the same page.
LintReport lint_vault(const VaultLayout& vault);

std::string format_lint_report(const LintReport& report);

}  // namespace sediment
