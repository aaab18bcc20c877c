#include "wc4dvar/threads.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace wc4dvar {

int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("WC4DVAR_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = cap;
        } catch (...) {
            // Ignore unparsable values and keep the default.
        }
    }
    return n;
}

void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& fn) {
    const int workers = std::min<Eigen::Index>(worker_count(), count);
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<Eigen::Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const Eigen::Index i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace wc4dvar
