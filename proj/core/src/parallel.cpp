#include "zsh/parallel.hpp"

#include "zsh/error.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace zsh {
namespace {

std::atomic<int> g_workers{1};

} // namespace

void set_worker_count(int workers)
{
    if (workers < 1) {
        throw ValidationError("worker count must be >= 1, got " + std::to_string(workers));
    }
    g_workers.store(workers, std::memory_order_relaxed);
}

int worker_count() noexcept { return g_workers.load(std::memory_order_relaxed); }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(
        static_cast<std::size_t>(worker_count()), n);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }

    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&, w, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace zsh
