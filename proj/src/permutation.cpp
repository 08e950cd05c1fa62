#include "symld/permutation.hpp"

#include <algorithm>
#include <numeric>

#include "symld/errors.hpp"
#include "symld/rng.hpp"

namespace symld {

Permutation::Permutation(std::vector<int> m) : map(std::move(m)) {
  std::vector<char> seen(map.size(), 0);
  for (int v : map) {
    if (v < 0 || v >= static_cast<int>(map.size()) || seen[v]) {
      throw DomainError("not a bijection");
    }
    seen[v] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(map.size());
  for (int i = 0; i < size(); ++i) inv[map[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& b) const {
  if (size() != b.size()) throw DomainError("compose: size mismatch");
  std::vector<int> m(map.size());
  for (int i = 0; i < size(); ++i) m[i] = map[b.map[i]];
  return Permutation(std::move(m));
}

std::uint64_t Permutation::rank() const {
  const int n = size();
  if (n > 20) throw CapError("rank: n too large");
  std::uint64_t r = 0;
  for (int i = 0; i < n; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < n; ++j)
      if (map[j] < map[i]) ++smaller;
    std::uint64_t f = 1;
    for (int m = 2; m <= n - 1 - i; ++m) f *= m;
    r += smaller * f;
  }
  return r;
}

Permutation sample_permutation(int n, RngHandle& rng) {
  if (n < 1) throw DomainError("sample_permutation: n must be >= 1");
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(m[i], m[j]);
  }
  return Permutation(std::move(m));
}

std::vector<Permutation> all_permutations(int n) {
  if (n > 10) throw CapError("all_permutations: n too large");
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(Permutation(m));
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

}  // namespace symld
