#include "sediment/links.hpp"

#include "sediment/text.hpp"

namespace sediment {

std::vector<std::string> extract_links(const std::string& body) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = body.find("[[", pos);
        if (open == std::string::npos) break;
        std::size_t i = open + 2;
        while (i < body.size() && body[i] != '[' && body[i] != ']' && body[i] != '\n') ++i;
        if (i + 1 < body.size() && body[i] == ']' && body[i + 1] == ']') {
            std::string target = trim(body.substr(open + 2, i - open - 2));
            if (!target.empty()) out.push_back(target);
            pos = i + 2;
        } else {
            // Not a well-formed link; resume the scan just past the opener so
            // an overlapping "[[[x]]" still finds the inner link.
            pos = open + 1;
        }
    }
    return out;
}

std::string rewrite_links(const std::string& body, const std::string& canonical,
                          const std::string& replacement) {
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    while (true) {
        std::size_t open = body.find("[[", pos);
        if (open == std::string::npos) {
            out.append(body, pos, body.size() - pos);
            break;
        }
        std::size_t i = open + 2;
        while (i < body.size() && body[i] != '[' && body[i] != ']' && body[i] != '\n') ++i;
        if (i + 1 < body.size() && body[i] == ']' && body[i + 1] == ']') {
            std::string target = trim(body.substr(open + 2, i - open - 2));
            out.append(body, pos, open - pos);
            if (!target.empty() && canonical_title(target) == canonical) {
                out += "[[" + replacement + "]]";
            } else {
                out.append(body, open, i + 2 - open);
            }
            pos = i + 2;
        } else {
            out.append(body, pos, open + 1 - pos);
            pos = open + 1;
        }
    }
    return out;
}

}  // namespace sediment
