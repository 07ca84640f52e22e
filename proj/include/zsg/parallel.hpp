#pragma once

#include <functional>

namespace zsg {

int max_workers();
void set_max_workers(int n);

// Splits [0, n) into contiguous chunks, one thread per chunk.
// body(begin, end) must only write state owned by its own range, so results
// are identical for any worker count.
void parallel_for(long n, const std::function<void(long, long)>& body);

// Same split with an explicit worker count, independent of the global
// setting.
void parallel_for_workers(long n, int workers, const std::function<void(long, long)>& body);

}  // namespace zsg
