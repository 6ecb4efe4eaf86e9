#include "sediment/page.hpp"

#include <map>

#include "sediment/error.hpp"
#include "sediment/links.hpp"
#include "sediment/text.hpp"

namespace sediment {

const char* page_kind_name(PageKind kind) {
    switch (kind) {
        case PageKind::source_summary: return "source_summary";
        case PageKind::entity: return "entity";
        case PageKind::concept_page: return "concept";
        case PageKind::synthesis: return "synthesis";
    }
    throw PageFormatError("unknown page kind");
}

PageKind page_kind_from_name(const std::string& name) {
    if (name == "source_summary") return PageKind::source_summary;
    if (name == "entity") return PageKind::entity;
    if (name == "concept") return PageKind::concept_page;
    if (name == "synthesis") return PageKind::synthesis;
    throw PageFormatError("unknown page kind: " + name);
}

WikiPage parse_page(const std::filesystem::path& vault_relative_path, const std::string& content) {
    std::vector<std::string> lines = split_lines(content);
    if (lines.empty() || trim(lines[0]) != "---") {
        throw PageFormatError("missing header block in " + vault_relative_path.string());
    }
    std::map<std::string, std::string> header;
    std::size_t i = 1;
    for (; i < lines.size(); ++i) {
        if (trim(lines[i]) == "---") break;
        const std::string& line = lines[i];
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) {
            throw PageFormatError("malformed header line in " + vault_relative_path.string() +
                                  ": " + line);
        }
        header[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
    }
    if (i >= lines.size()) {
        throw PageFormatError("unterminated header block in " + vault_relative_path.string());
    }

    for (const char* key : {"title", "kind", "importance", "created_at", "updated_at"}) {
        if (!header.count(key) || header[key].empty()) {
            throw PageFormatError("missing header field '" + std::string(key) + "' in " +
                                  vault_relative_path.string());
        }
    }

    WikiPage page;
    page.path = vault_relative_path;
    page.title = header["title"];
    page.kind = page_kind_from_name(header["kind"]);
    try {
        page.importance = std::stoi(header["importance"]);
    } catch (const std::exception&) {
        throw PageFormatError("non-numeric importance in " + vault_relative_path.string());
    }
    if (page.importance < 1 || page.importance > 5) {
        throw PageFormatError("importance out of range [1,5] in " + vault_relative_path.string());
    }
    page.created_at = header["created_at"];
    page.updated_at = header["updated_at"];

    // Body starts after the closing delimiter; a single leading blank line is
    // formatting, not content.
    std::size_t body_start = i + 1;
    if (body_start < lines.size() && lines[body_start].empty()) ++body_start;
    std::vector<std::string> body_lines(lines.begin() + static_cast<std::ptrdiff_t>(body_start),
                                        lines.end());
    page.body = join(body_lines, "\n");
    while (!page.body.empty() && page.body.back() == '\n') page.body.pop_back();
    refresh_links(page);
    return page;
}

std::string serialize_page(const WikiPage& page) {
    std::string out;
    out += "---\n";
    out += "title: " + page.title + "\n";
    out += "kind: " + std::string(page_kind_name(page.kind)) + "\n";
    out += "importance: " + std::to_string(page.importance) + "\n";
    out += "created_at: " + page.created_at + "\n";
    out += "updated_at: " + page.updated_at + "\n";
    out += "---\n\n";
    out += page.body;
    if (!page.body.empty() && page.body.back() != '\n') out += "\n";
    return out;
}

void refresh_links(WikiPage& page) {
    page.links = extract_links(page.body);
}

}  // namespace sediment
