#pragma once

#include <cstdint>
#include <vector>

namespace symld {

class RngHandle;

// Bijection on {0,...,n-1} stored as an index array: i -> map[i].
struct Permutation {
  std::vector<int> map;

  explicit Permutation(std::vector<int> m);
  static Permutation identity(int n);

  int size() const { return static_cast<int>(map.size()); }
  int operator()(int i) const { return map[i]; }

  Permutation inverse() const;
  // (a.compose(b))(i) = a(b(i))
  Permutation compose(const Permutation& b) const;

  // Lexicographic rank in S_n, n <= 20.
  std::uint64_t rank() const;

  friend bool operator==(const Permutation& a, const Permutation& b) = default;
};

// Uniform over S_n, Fisher-Yates. n >= 1.
Permutation sample_permutation(int n, RngHandle& rng);

// All n! permutations in lexicographic order; n <= 10.
std::vector<Permutation> all_permutations(int n);

}  // namespace symld
