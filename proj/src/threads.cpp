#include "sdbm/threads.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace sdbm {

namespace {
int g_num_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_num_threads(int n) { g_num_threads = std::max(1, n); }

int num_threads() { return g_num_threads; }

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
    const int workers = std::min<std::size_t>(num_threads(), num_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= num_chunks) return;
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            }
        });
    }
    for (auto& th : pool) th.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_chunks(n, 1, [&](std::size_t, std::size_t b, std::size_t) { fn(b); });
}

}  // namespace sdbm
