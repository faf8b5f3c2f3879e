#include "vvrom/common.hpp"

#include <thread>
#include <vector>

namespace vvrom {

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(long n, int threads, const std::function<void(long)>& body) {
    if (n <= 0) return;
    if (threads < 1) threads = 1;
    if (threads == 1 || n == 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    const long nt = std::min<long>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (long t = 0; t < nt; ++t) {
        const long begin = n * t / nt;
        const long end = n * (t + 1) / nt;
        pool.emplace_back([begin, end, &body] {
            for (long i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace vvrom
