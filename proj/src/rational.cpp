#include "symld/rational.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include "symld/errors.hpp"

namespace symld {

BigInt factorial(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

double log_factorial(unsigned n) {
  if (n > 100000) throw CapError("log_factorial: n too large");
  static std::vector<double> table{0.0, 0.0};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (table.size() <= n) {
    table.push_back(table.back() + std::log(static_cast<double>(table.size())));
  }
  return table[n];
}

}  // namespace symld
