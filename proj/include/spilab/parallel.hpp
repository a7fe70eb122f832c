// Deterministic parallel execution.
//
// Every parallel kernel in the library follows the same discipline: a worker
// function computes slot i of a preallocated buffer as a pure function of the
// inputs and of i, the slots are filled in parallel, and any reduction over
// the slots runs serially in index order afterwards. The result is therefore
// bitwise identical to the serial reference implementation, which simply fills
// the slots in a plain loop. Tests and the benchmark target compare the two.

#pragma once

#include <cstddef>
#include <functional>

namespace spilab {

/// Execution mode for kernels that have both implementations.
enum class Exec { serial, parallel };

/// Number of OpenMP threads a parallel kernel may use. Reads the
/// SPI_LAB_THREADS environment variable (values below 1 are clamped to 1);
/// without it, the OpenMP default. Returns 1 when built without OpenMP.
int thread_budget();

/// Runs body(i) for i in [0, count). Exec::parallel distributes iterations
/// over thread_budget() threads; Exec::serial is a plain loop. body must
/// write only to its own slot of preallocated storage. If workers throw, the
/// exception from the lowest failing index is rethrown, so failures are as
/// deterministic as results.
void for_each_index(Exec mode, std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spilab
