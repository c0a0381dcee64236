#pragma once

#include <cstddef>
#include <functional>

namespace zsh {

/// Process-wide worker count used by the data-parallel kernels. Every kernel
/// partitions work so that each output element is written by exactly one
/// worker; results are bit-identical for any worker count.
void set_worker_count(int workers);
int worker_count() noexcept;

/// Calls `body(begin, end)` over a partition of [0, n) into contiguous chunks.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace zsh
