#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace acidfront {

/// Static-chunk parallel loop over [0, n). Each index is processed exactly
/// once and workers write disjoint slots, so results are identical for any
/// worker count.
template <typename F>
void parallel_for(int n, int workers, F&& body) {
    if (workers <= 1 || n < 2 * workers) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int lo = w * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace acidfront
