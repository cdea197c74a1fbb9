#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace uficlab {

/// Number of worker threads; honours UFICLAB_THREADS, defaults to hardware.
std::size_t worker_count();

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// Chunk boundaries depend only on n and chunk_size, never on thread count,
/// so per-chunk results merged in chunk order are reproducible.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace uficlab
