#include "sediment/manifest.hpp"

#include <nlohmann/json.hpp>

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

using nlohmann::ordered_json;

VaultManifest VaultManifest::parse(const std::string& jsonl) {
    VaultManifest m;
    for (const std::string& line : split_lines(jsonl)) {
        if (trim(line).empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw VaultError("malformed manifest line: " + line);
        }
        ManifestEntry e;
        e.source = j.value("source", "");
        e.content_hash = j.value("content_hash", "");
        e.ingested_at = j.value("ingested_at", "");
        if (j.contains("produced_pages")) {
            for (const auto& p : j["produced_pages"]) e.produced_pages.push_back(p.get<std::string>());
        }
        if (e.source.empty() || e.content_hash.empty()) {
            throw VaultError("manifest line missing source or hash: " + line);
        }
        m.entries[e.source] = e;
    }
    return m;
}

std::string manifest_entry_line(const ManifestEntry& entry) {
    ordered_json j;
    j["source"] = entry.source;
    j["content_hash"] = entry.content_hash;
    j["ingested_at"] = entry.ingested_at;
    j["produced_pages"] = entry.produced_pages;
    return j.dump();
}

std::string VaultManifest::serialize_entry_line(const ManifestEntry& entry) const {
    return manifest_entry_line(entry);
}

bool VaultManifest::needs_ingest(const std::string& source, const std::string& content_hash) const {
    auto it = entries.find(source);
    if (it == entries.end()) return true;
    return it->second.content_hash != content_hash;
}

VaultManifest load_manifest(const VaultLayout& vault) {
    return VaultManifest::parse(read_file(vault.manifest_path));
}

}  // namespace sediment
