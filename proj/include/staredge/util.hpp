#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

namespace staredge {

// Runs fn(i) for i in [0, n); work is split into one contiguous chunk per
// thread so results land at fixed indices regardless of thread count.
// threads <= 1 runs inline. Exceptions from workers are rethrown (first one).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Thread count resolution: explicit request > STAR_EDGE_THREADS env >
// hardware concurrency.
int resolve_threads(int requested);

// FNV-1a over a byte range; used for descriptor cache keys.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace staredge
