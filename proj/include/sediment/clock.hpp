#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace sediment {

// All engine timestamps flow through this interface so replays can run on a
// deterministic clock instead of wall time.
class Clock {
  public:
    virtual ~Clock() = default;
    virtual std::int64_t now_epoch_seconds() = 0;
    std::string now_iso8601();
};

class SystemClock final : public Clock {
  public:
    std::int64_t now_epoch_seconds() override;
};

// Starts at a fixed epoch and advances by a fixed step on every call.
// Two runs that make the same sequence of calls see identical timestamps.
class SteppingClock final : public Clock {
  public:
    explicit SteppingClock(std::int64_t start_epoch, std::int64_t step_seconds = 1)
        : next_(start_epoch), step_(step_seconds) {}

    std::int64_t now_epoch_seconds() override {
        std::int64_t t = next_;
        next_ += step_;
        return t;
    }

  private:
    std::int64_t next_;
    std::int64_t step_;
};

// Always returns the same instant.
class FixedClock final : public Clock {
  public:
    explicit FixedClock(std::int64_t epoch) : epoch_(epoch) {}
    std::int64_t now_epoch_seconds() override { return epoch_; }

  private:
    std::int64_t epoch_;
};

std::string epoch_to_iso8601(std::int64_t epoch_seconds);

// Accepts "YYYY-MM-DDTHH:MM:SSZ" or a plain integer epoch. Throws ConfigError.
std::int64_t parse_epoch(const std::string& text);

}  // namespace sediment
