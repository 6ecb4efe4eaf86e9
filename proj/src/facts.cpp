#include "sediment/facts.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "sediment/text.hpp"

namespace sediment {

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
    if (to > s.size() || from >= to) return false;
    for (size_t i = from; i < to; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

int num(const std::string& s, size_t from, size_t to) { return std::stoi(s.substr(from, to - from)); }

constexpr const char* kHeading = "## Facts";

bool is_heading(const std::string& line) { return line.rfind("## ", 0) == 0; }

}  // namespace

bool is_fact_date(const std::string& text) {
    if (text.size() == 4) return all_digits(text, 0, 4);
    if (text.size() == 7) {
        if (!all_digits(text, 0, 4) || text[4] != '-' || !all_digits(text, 5, 7)) return false;
        int m = num(text, 5, 7);
        return m >= 1 && m <= 12;
    }
    if (text.size() == 10) {
        if (!all_digits(text, 0, 4) || text[4] != '-' || !all_digits(text, 5, 7) ||
            text[7] != '-' || !all_digits(text, 8, 10)) {
            return false;
        }
        int m = num(text, 5, 7);
        int d = num(text, 8, 10);
        return m >= 1 && m <= 12 && d >= 1 && d <= 31;
    }
    return false;
}

std::optional<FactLine> parse_fact_line(const std::string& line) {
    std::string t = trim(line);
    if (t.rfind("- ", 0) != 0) return std::nullopt;
    std::string rest = trim(t.substr(2));
    if (rest.empty()) return std::nullopt;
    FactLine fact;
    size_t colon = rest.find(": ");
    if (colon != std::string::npos && is_fact_date(rest.substr(0, colon))) {
        fact.date = rest.substr(0, colon);
        fact.statement = trim(rest.substr(colon + 2));
        if (fact.statement.empty()) return std::nullopt;
    } else {
        fact.statement = rest;
    }
    return fact;
}

std::string render_fact_line(const FactLine& fact) {
    std::string out = "- ";
    if (fact.date) {
        out += *fact.date;
        out += ": ";
    }
    out += fact.statement;
    return out;
}

std::vector<FactLine> sort_facts_chronologically(std::vector<FactLine> facts) {
    std::stable_sort(facts.begin(), facts.end(), [](const FactLine& a, const FactLine& b) {
        if (a.date.has_value() != b.date.has_value()) return a.date.has_value();
        if (a.date && b.date) return *a.date < *b.date;
        return false;
    });
    return facts;
}

std::vector<FactLine> merge_facts(const std::vector<FactLine>& existing,
                                  const std::vector<FactLine>& incoming, int* added_count) {
    std::vector<FactLine> merged;
    std::set<std::string> seen;
    for (const FactLine& f : existing) {
        if (seen.insert(trim(f.statement)).second) merged.push_back(f);
    }
    int added = 0;
    for (const FactLine& f : incoming) {
        if (seen.insert(trim(f.statement)).second) {
            merged.push_back(f);
            ++added;
        }
    }
    if (added_count) *added_count = added;
    return sort_facts_chronologically(std::move(merged));
}

std::vector<FactLine> extract_facts(const std::string& body) {
    std::vector<FactLine> facts;
    bool in_section = false;
    for (const std::string& line : split_lines(body)) {
        if (trim(line) == kHeading) {
            in_section = true;
            continue;
        }
        if (in_section && is_heading(trim(line))) in_section = false;
        if (in_section) {
            if (auto fact = parse_fact_line(line)) facts.push_back(std::move(*fact));
        }
    }
    return facts;
}

std::string replace_facts_section(const std::string& body, const std::vector<FactLine>& facts) {
    std::vector<std::string> rendered;
    for (const FactLine& f : facts) rendered.push_back(render_fact_line(f));

    std::vector<std::string> out;
    bool in_section = false;
    bool replaced = false;
    for (const std::string& line : split_lines(body)) {
        std::string t = trim(line);
        if (t == kHeading) {
            in_section = true;
            replaced = true;
            out.push_back(line);
            out.push_back("");
            out.insert(out.end(), rendered.begin(), rendered.end());
            continue;
        }
        if (in_section) {
            if (is_heading(t)) {
                in_section = false;
                if (!out.empty() && !out.back().empty()) out.push_back("");
            } else {
                continue;  // old section content, superseded
            }
        }
        out.push_back(line);
    }
    if (!replaced) {
        if (!out.empty() && !out.back().empty()) out.push_back("");
        out.push_back(kHeading);
        out.push_back("");
        out.insert(out.end(), rendered.begin(), rendered.end());
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return join(out, "\n");
}

std::string strip_facts_section(const std::string& body) {
    std::vector<std::string> out;
    bool in_section = false;
    for (const std::string& line : split_lines(body)) {
        std::string t = trim(line);
        if (t == kHeading) {
            in_section = true;
            continue;
        }
        if (in_section) {
            if (is_heading(t)) {
                in_section = false;
            } else {
                continue;
            }
        }
        out.push_back(line);
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return join(out, "\n");
}

}  // namespace sediment
