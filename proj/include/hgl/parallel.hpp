#pragma once

#include <cstdint>
#include <functional>

namespace hgl {

// Worker count for the data-parallel kernels. Kernels are pure maps over
// nodes, so results do not depend on the count; reductions are fixed-order
// everywhere.
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) over a partition of [0, n) into contiguous chunks.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace hgl
