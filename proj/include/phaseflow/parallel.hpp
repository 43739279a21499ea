#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "phaseflow/linalg.hpp"

namespace phaseflow {

// Worker count for element loops: PHASEFLOW_THREADS if set, else the hardware concurrency.
int thread_count();

// Runs fn(begin, end) over contiguous chunks of [0, n), one chunk per worker.
void parallel_for_chunks(int n, const std::function<void(int begin, int end, int chunk)>& fn, int chunks);

using TripletKernel = std::function<void(int element, std::vector<Triplet>& out)>;
using EntryKernel = std::function<void(int element, std::vector<std::pair<int, double>>& out)>;

// Element-by-element assembly. Per-chunk triplet lists are concatenated in element order,
// so the result does not depend on the worker count.
SparseMatrix assemble_matrix(int rows, int cols, int num_elements, const TripletKernel& kernel);
Vector assemble_vector(int size, int num_elements, const EntryKernel& kernel);

}  // namespace phaseflow
