#pragma once
// Deterministic pairwise-tree summation.  Grid reductions use this fixed
// order so reports are bit-identical regardless of worker count, and the
// balanced tree keeps rounding error near O(log N).

#include <cstddef>
#include <vector>

namespace lefschetz {

template <class T>
T pairwise_sum(const T* data, std::size_t count) {
  if (count == 0) return T{};
  if (count <= 8) {
    T acc = data[0];
    for (std::size_t i = 1; i < count; ++i) acc += data[i];
    return acc;
  }
  std::size_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace lefschetz
