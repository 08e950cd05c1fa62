#pragma once

#include <vector>

namespace symld {

// Nodes and weights for integration against exp(-x^2) on the real line
// (physicists' Gauss-Hermite rule). Exact for polynomials of degree 2n-1.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const HermiteRule& gauss_hermite(int n);  // cached; n <= 512

}  // namespace symld
