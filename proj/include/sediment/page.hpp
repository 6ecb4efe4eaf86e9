#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sediment {

enum class PageKind { source_summary, entity, concept_page, synthesis };

const char* page_kind_name(PageKind kind);
PageKind page_kind_from_name(const std::string& name);

// One markdown page under wiki/. `path` is vault-relative. `links` always
// mirrors extract_links(body).
struct WikiPage {
    std::filesystem::path path;
    PageKind kind = PageKind::entity;
    std::string title;
    int importance = 1;
    std::string created_at;
    std::string updated_at;
    std::vector<std::string> links;
    std::string body;
};

// Throws PageFormatError when the header block or a required field is bad.
WikiPage parse_page(const std::filesystem::path& vault_relative_path, const std::string& content);

std::string serialize_page(const WikiPage& page);

// Recomputes `links` from `body`.
void refresh_links(WikiPage& page);

}  // namespace sediment
