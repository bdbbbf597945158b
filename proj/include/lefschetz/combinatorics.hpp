#pragma once
// Bitmask bookkeeping for strictly increasing index tuples.  A (p,q)-monomial
// dz_I ∧ dz̄_J is keyed by two masks over bits 0..n-1 (bit k ↔ index k+1).

#include <bit>
#include <cstdint>
#include <vector>

namespace lefschetz::alg {

using Mask = std::uint32_t;

inline int weight(Mask m) { return std::popcount(m); }

// Sign of sorting the concatenation (A, B) of two disjoint increasing tuples:
// parity of the number of pairs (a ∈ A, b ∈ B) with b < a.
inline int merge_sign(Mask a, Mask b) {
  int inversions = 0;
  for (Mask rest = b; rest;) {
    int j = std::countr_zero(rest);
    rest &= rest - 1;
    inversions += std::popcount(a >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

// Sign of moving index j from the front of the tuple into sorted position.
inline int insertion_sign(Mask m, int j) {
  return (std::popcount(m & ((Mask{1} << j) - 1)) & 1) ? -1 : 1;
}

// Position of index j within the increasing tuple (0-based); j must be set.
inline int position_in(Mask m, int j) {
  return std::popcount(m & ((Mask{1} << j) - 1));
}

inline std::vector<Mask> masks_of_weight(int n, int k) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << n); ++m)
    if (std::popcount(m) == k) out.push_back(m);
  return out;
}

inline std::vector<int> indices_from_mask(Mask m) {  // 1-based
  std::vector<int> v;
  for (; m;) {
    v.push_back(std::countr_zero(m) + 1);
    m &= m - 1;
  }
  return v;
}

inline Mask mask_from_indices(const std::vector<int>& idx) {  // 1-based, strictly increasing
  Mask m = 0;
  for (int i : idx) m |= Mask{1} << (i - 1);
  return m;
}

}  // namespace lefschetz::alg
