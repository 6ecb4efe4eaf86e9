#pragma once

#include <string>
#include <vector>

namespace sediment {

// Scans markdown for [[target]] wikilinks. A target is a run of characters
// between "[[" and "]]" that contains no '[', ']' or newline; it is trimmed
// and dropped if empty. Malformed or unterminated brackets are ignored.
// Duplicates are preserved in order of appearance.
std::vector<std::string> extract_links(const std::string& body);

// Rewrites every well-formed [[target]] whose canonical title equals
// `canonical` to [[replacement]]; all other text is untouched.
std::string rewrite_links(const std::string& body, const std::string& canonical,
                          const std::string& replacement);

}  // namespace sediment
