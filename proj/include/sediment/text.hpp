#pragma once

#include <string>
#include <vector>

namespace sediment {

// Lowercase alphanumeric runs; everything else is a separator.
// "AI-Assisted Coding" -> {"ai", "assisted", "coding"}.
std::vector<std::string> tokenize(const std::string& text);

// Sorted, deduplicated token set.
std::vector<std::string> token_set(const std::string& text);

std::string to_lower(const std::string& s);
std::string trim(const std::string& s);

// Case-folded with internal whitespace runs collapsed to single spaces.
// Used as the duplicate-detection key for page titles.
std::string canonical_title(const std::string& title);

// Filesystem-safe name: lowercase, alnum kept, other runs become '-'.
// Falls back to "page" when nothing survives.
std::string slug(const std::string& title);

std::vector<std::string> split_lines(const std::string& text);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace sediment
