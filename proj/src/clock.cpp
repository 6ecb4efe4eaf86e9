#include "sediment/clock.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "sediment/error.hpp"

namespace sediment {

std::string Clock::now_iso8601() {
    return epoch_to_iso8601(now_epoch_seconds());
}

std::int64_t SystemClock::now_epoch_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string epoch_to_iso8601(std::int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::int64_t parse_epoch(const std::string& text) {
    if (text.empty()) throw ConfigError("empty timestamp");
    bool digits_only = true;
    for (char c : text) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            digits_only = false;
            break;
        }
    }
    if (digits_only) return std::stoll(text);

    std::tm tm{};
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &s) != 6) {
        throw ConfigError("unrecognized timestamp: " + text);
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) throw ConfigError("unrepresentable timestamp: " + text);
    return static_cast<std::int64_t>(t);
}

}  // namespace sediment
