#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sediment {

// One bullet in a page's "## Facts" section. Dated facts carry an ISO-style
// prefix (YYYY, YYYY-MM, or YYYY-MM-DD) before the statement.
struct FactLine {
    std::optional<std::string> date;
    std::string statement;

    bool operator==(const FactLine&) const = default;
};

// True for YYYY, YYYY-MM, YYYY-MM-DD with plausible month/day ranges.
bool is_fact_date(const std::string& text);

// Parses "- 2021: statement" or "- statement"; nullopt if the line is not a
// fact bullet.
std::optional<FactLine> parse_fact_line(const std::string& line);
std::string render_fact_line(const FactLine& fact);

// Dated facts sorted ascending by date (ISO prefixes compare lexically),
// undated facts after them; ties keep input order.
std::vector<FactLine> sort_facts_chronologically(std::vector<FactLine> facts);

// Appends incoming facts to existing, dropping incoming statements already
// present (comparison on the trimmed statement text), then sorts
// chronologically. added_count receives how many incoming facts were kept.
std::vector<FactLine> merge_facts(const std::vector<FactLine>& existing,
                                  const std::vector<FactLine>& incoming,
                                  int* added_count = nullptr);

// Fact bullets inside the body's "## Facts" section; empty if none.
std::vector<FactLine> extract_facts(const std::string& body);

// Replaces the "## Facts" section content with the rendered facts, appending
// a new section at the end of the body if none exists.
std::string replace_facts_section(const std::string& body, const std::vector<FactLine>& facts);

// Body with the "## Facts" section (heading and bullets) removed.
std::string strip_facts_section(const std::string& body);

}  // namespace sediment
