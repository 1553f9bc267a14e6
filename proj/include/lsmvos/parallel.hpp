#pragma once

#include <cstddef>
#include <functional>

namespace lsmvos {

/// Worker count used by all kernels. Initialized from LSMVOS_THREADS, falling
/// back to the hardware concurrency.
int num_threads();

/// n <= 0 restores the default.
void set_num_threads(int n);

/// Runs body(lo, hi) over disjoint contiguous sub-ranges of [begin, end).
/// Kernels only ever write outputs owned by their sub-range, so the split
/// never changes results.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

} // namespace lsmvos
