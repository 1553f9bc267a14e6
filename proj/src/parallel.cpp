#include "lsmvos/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace lsmvos {

namespace {

int default_threads() {
    if (const char* env = std::getenv("LSMVOS_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> value{default_threads()};
    return value;
}

} // namespace

int num_threads() { return thread_setting().load(std::memory_order_relaxed); }

void set_num_threads(int n) { thread_setting().store(n > 0 ? n : default_threads()); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body, std::size_t min_chunk) {
    if (end <= begin) return;
    const std::size_t total = end - begin;
    std::size_t workers = static_cast<std::size_t>(num_threads());
    workers = std::min(workers, (total + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
    if (workers <= 1) {
        body(begin, end);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t step = total / workers, extra = total % workers;
    std::size_t lo = begin;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t hi = lo + step + (w < extra ? 1 : 0);
        auto task = [&, w, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        if (w + 1 == workers)
            task();
        else
            pool.emplace_back(task);
        lo = hi;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace lsmvos
