#include "staredge/util.hpp"

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace staredge {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t t = threads <= 1 ? 1 : std::min<std::size_t>(threads, n);
    if (t == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::vector<std::thread> workers;
    workers.reserve(t);
    std::vector<std::exception_ptr> errors(t);
    for (std::size_t w = 0; w < t; ++w) {
        const std::size_t begin = n * w / t;
        const std::size_t end = n * (w + 1) / t;
        workers.emplace_back([&, begin, end, w] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& worker : workers) worker.join();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("STAR_EDGE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed) {
    return fnv1a64(s.data(), s.size(), seed);
}

}  // namespace staredge
