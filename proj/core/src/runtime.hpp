#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace wavesim {

// Worker count resolution: explicit request wins, then the WAVESIM_THREADS
// environment variable, then hardware concurrency.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WAVESIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 1024) return static_cast<int>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs body(0..njobs-1) across a fixed pool.  Each job is a pure function of
// its index, so scheduling order cannot change any result; exceptions are
// rethrown in job-index order to keep failures deterministic too.
template <class Body>
void run_jobs(int workers, int njobs, const Body& body) {
    if (njobs <= 0) return;
    if (workers <= 1 || njobs == 1) {
        for (int i = 0; i < njobs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(njobs));
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= njobs) return;
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(workers, njobs);
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace wavesim
