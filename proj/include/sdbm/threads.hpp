#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sdbm {

// Global worker cap for the parallel sections (enumeration, LP activity
// checks, AIS runs). Work is always partitioned into fixed chunks combined
// in index order, so results are byte-identical for any thread count.
void set_num_threads(int n);
int num_threads();

// Runs fn(chunk_index, begin, end) for fixed-size chunks of [0, n).
// Chunk boundaries depend only on n and chunk_size, never on the worker
// count. fn must write only to per-chunk storage.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Runs fn(i) for i in [0, n) across workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sdbm
