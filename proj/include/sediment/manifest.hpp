#pragma once

#include <map>
#include <string>
#include <vector>

#include "sediment/layout.hpp"

namespace sediment {

// One line of manifest.jsonl. Later lines for the same source supersede
// earlier ones, so ingest can append a fresh entry instead of rewriting
// history when a raw file changes.
struct ManifestEntry {
    std::string source;  // vault-relative raw path
    std::string content_hash;
    std::string ingested_at;
    std::vector<std::string> produced_pages;  // vault-relative
};

struct VaultManifest {
    // Keyed by source path; holds the latest entry per source.
    std::map<std::string, ManifestEntry> entries;

    static VaultManifest parse(const std::string& jsonl);
    std::string serialize_entry_line(const ManifestEntry& entry) const;

    bool needs_ingest(const std::string& source, const std::string& content_hash) const;
};

VaultManifest load_manifest(const VaultLayout& vault);

std::string manifest_entry_line(const ManifestEntry& entry);

}  // namespace sediment
