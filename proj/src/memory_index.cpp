#include "sediment/memory_index.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string record_line(const MemoryRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["kind"] = r.kind;
    j["page_path"] = r.page_path;
    j["title"] = r.title;
    j["keywords"] = r.keywords;
    j["importance"] = r.importance;
    j["registered_at"] = r.registered_at;
    return j.dump();
}

std::optional<MemoryRecord> parse_record(const std::string& line) {
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    MemoryRecord r;
    try {
        r.id = j.at("id").get<std::int64_t>();
        r.kind = j.at("kind").get<std::string>();
        r.page_path = j.at("page_path").get<std::string>();
        r.title = j.at("title").get<std::string>();
        r.keywords = j.at("keywords").get<std::vector<std::string>>();
        r.importance = j.at("importance").get<int>();
        r.registered_at = j.at("registered_at").get<std::string>();
    } catch (const ordered_json::exception&) {
        return std::nullopt;
    }
    if (r.id <= 0 || r.kind != "wiki_sediment" || r.importance < 1 || r.importance > 5) {
        return std::nullopt;
    }
    return r;
}

}  // namespace

MemoryStore::MemoryStore(fs::path store_path) : store_path_(std::move(store_path)) {}

MemoryLoadReport MemoryStore::load() {
    records_.clear();
    next_id_ = 1;
    MemoryLoadReport report;
    if (!fs::exists(store_path_)) return report;
    for (const std::string& line : split_lines(read_file(store_path_))) {
        if (trim(line).empty()) continue;
        if (auto r = parse_record(line)) {
            next_id_ = std::max(next_id_, r->id + 1);
            records_.push_back(std::move(*r));
            ++report.records;
        } else {
            ++report.skipped_lines;
        }
    }
    return report;
}

bool MemoryStore::should_register(const WikiPage& page) {
    switch (page.kind) {
        case PageKind::synthesis: return true;
        case PageKind::entity:
        case PageKind::concept_page: return page.importance >= 4;
        case PageKind::source_summary: return false;
    }
    return false;
}

std::vector<std::string> MemoryStore::keywords_for(const WikiPage& page) {
    std::string text = page.title;
    for (const std::string& link : page.links) {
        text += ' ';
        text += link;
    }
    return token_set(text);
}

std::optional<MemoryRecord> MemoryStore::notify(const VaultLayout& vault, const WikiPage& page,
                                                Clock& clock) {
    if (!fs::exists(vault.abs(page.path))) {
        throw MemoryIndexError("cannot register missing page: " + page.path.generic_string());
    }
    if (!should_register(page)) return std::nullopt;
    MemoryRecord r;
    r.page_path = page.path.generic_string();
    r.title = page.title;
    r.keywords = keywords_for(page);
    r.importance = page.importance;
    r.registered_at = clock.now_iso8601();
    return append(std::move(r));
}

MemoryRecord MemoryStore::append(MemoryRecord record) {
    record.id = next_id_++;
    if (record.kind.empty()) record.kind = "wiki_sediment";
    append_line_durable(store_path_, record_line(record));
    records_.push_back(record);
    return record;
}

std::vector<RecallHit> MemoryStore::recall(const std::string& query_text, int limit) const {
    std::vector<std::string> query = token_set(query_text);
    std::vector<RecallHit> hits;
    for (const MemoryRecord& r : records_) {
        std::vector<std::string> shared;
        std::set_intersection(query.begin(), query.end(), r.keywords.begin(), r.keywords.end(),
                              std::back_inserter(shared));
        if (!shared.empty()) hits.push_back({r, static_cast<int>(shared.size())});
    }
    std::sort(hits.begin(), hits.end(), [](const RecallHit& a, const RecallHit& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.record.importance != b.record.importance) {
            return a.record.importance > b.record.importance;
        }
        if (a.record.registered_at != b.record.registered_at) {
            return a.record.registered_at > b.record.registered_at;
        }
        return a.record.id > b.record.id;
    });
    if (static_cast<int>(hits.size()) > limit) hits.resize(limit);
    return hits;
}

}  // namespace sediment
