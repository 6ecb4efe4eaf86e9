#pragma once

#include <filesystem>

#include "sediment/page.hpp"

namespace sediment {

// Three-tier on-disk layout:
//   raw/     user-dropped source material; the engine never writes here
//   wiki/    sources/ entities/ concepts/ synthesis/ index.md
//   output/  reports, traces, ledgers
// plus manifest.jsonl and memory.jsonl at the root.
struct VaultLayout {
    std::filesystem::path root;
    std::filesystem::path raw_dir;
    std::filesystem::path wiki_dir;
    std::filesystem::path output_dir;
    std::filesystem::path sources_dir;
    std::filesystem::path entities_dir;
    std::filesystem::path concepts_dir;
    std::filesystem::path synthesis_dir;
    std::filesystem::path index_path;     // wiki/index.md
    std::filesystem::path manifest_path;  // manifest.jsonl
    std::filesystem::path memory_path;    // memory.jsonl
    std::filesystem::path lock_path;      // .vault.lock
    std::filesystem::path journal_dir;    // .journal (exists only mid-commit)

    static VaultLayout at(const std::filesystem::path& root);

    std::filesystem::path kind_dir(PageKind kind) const;
    std::filesystem::path abs(const std::filesystem::path& vault_relative) const;
    std::filesystem::path rel(const std::filesystem::path& absolute) const;

    // Default location for a new page: <kind dir>/<slug(title)>.md, relative.
    std::filesystem::path default_page_path(PageKind kind, const std::string& title) const;
};

// Creates the layout in an empty (or missing) directory, or validates an
// existing vault. A non-empty directory that is not a vault is refused.
// Repeated init on a valid vault changes nothing.
VaultLayout init_vault(const std::filesystem::path& root);

bool is_vault(const std::filesystem::path& root);

// Validates and returns the layout; throws VaultError if not a vault.
VaultLayout open_vault(const std::filesystem::path& root);

// Loads and parses a page by vault-relative path.
WikiPage load_page(const VaultLayout& vault, const std::filesystem::path& vault_relative);

}  // namespace sediment
