#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace semistab {

/// Max-reduction of chunk(begin, end) over [0, count) split into contiguous ranges.
/// Max is exact, so the result does not depend on the thread count.
template <typename Chunk>
double parallel_max(std::size_t count, unsigned threads, Chunk&& chunk) {
    if (count == 0) return -std::numeric_limits<double>::infinity();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(count, 64))));
    if (threads == 1) return chunk(std::size_t{0}, count);

    std::vector<double> partial(threads, -std::numeric_limits<double>::infinity());
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = count * w / threads;
            const std::size_t end = count * (w + 1) / threads;
            pool.emplace_back([&, w, begin, end] {
                try {
                    partial[w] = chunk(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return *std::max_element(partial.begin(), partial.end());
}

} // namespace semistab
