#include "phaseflow/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace phaseflow {

int thread_count() {
  if (const char* env = std::getenv("PHASEFLOW_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for_chunks(int n, const std::function<void(int, int, int)>& fn, int chunks) {
  chunks = std::max(1, std::min(chunks, n));
  if (chunks == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(chunks - 1);
  auto bounds = [n, chunks](int c) { return static_cast<int>(static_cast<long long>(n) * c / chunks); };
  for (int c = 1; c < chunks; ++c) workers.emplace_back(fn, bounds(c), bounds(c + 1), c);
  fn(bounds(0), bounds(1), 0);
  for (auto& w : workers) w.join();
}

SparseMatrix assemble_matrix(int rows, int cols, int num_elements, const TripletKernel& kernel) {
  const int chunks = std::max(1, std::min(thread_count(), num_elements / 256 + 1));
  std::vector<std::vector<Triplet>> parts(chunks);
  parallel_for_chunks(
      num_elements,
      [&](int begin, int end, int c) {
        for (int e = begin; e < end; ++e) kernel(e, parts[c]);
      },
      chunks);
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  SparseMatrix a(rows, cols);
  a.setFromTriplets(all.begin(), all.end());
  return a;
}

Vector assemble_vector(int size, int num_elements, const EntryKernel& kernel) {
  const int chunks = std::max(1, std::min(thread_count(), num_elements / 256 + 1));
  std::vector<std::vector<std::pair<int, double>>> parts(chunks);
  parallel_for_chunks(
      num_elements,
      [&](int begin, int end, int c) {
        for (int e = begin; e < end; ++e) kernel(e, parts[c]);
      },
      chunks);
  Vector out = Vector::Zero(size);
  for (const auto& p : parts) {
    for (const auto& [i, v] : p) out[i] += v;
  }
  return out;
}

}  // namespace phaseflow
