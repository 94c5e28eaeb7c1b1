#pragma once

#include <chrono>
#include <cstdint>

namespace bbench {

/// Wall-clock time as integer nanoseconds since the Unix epoch. Used for
/// timestamps that cross process boundaries; never used to compute the
/// headline durations.
inline std::int64_t wall_clock_unix_ns() {
    using namespace std::chrono;
    return duration_cast<nanoseconds>(system_clock::now().time_since_epoch()).count();
}

inline double ns_to_seconds(std::int64_t ns) {
    return static_cast<double>(ns) * 1e-9;
}

/// Monotonic stopwatch for round-trip measurement.
class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}

    double seconds() const {
        const auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(now - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace bbench
