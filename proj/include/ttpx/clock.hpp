#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>

namespace ttpx {

// Millisecond timestamps for memory entries and reports.
using Clock = std::function<std::int64_t()>;

inline Clock wall_clock() {
    return [] {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    };
}

// Counts 1, 2, 3, ... Used when outputs must be byte-reproducible (mock providers).
inline Clock logical_clock(std::int64_t start = 0) {
    auto counter = std::make_shared<std::atomic<std::int64_t>>(start);
    return [counter] { return ++*counter; };
}

} // namespace ttpx
