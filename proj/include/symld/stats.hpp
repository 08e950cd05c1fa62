#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace symld {

struct ChiSquareResult {
  double stat = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against exact cell probabilities.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts, const std::vector<double>& probs);

// Two-sample homogeneity test over shared cells (pooled expectations).
ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b);

struct KsResult {
  double stat = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov against a continuous cdf.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

double normal_cdf(double x, double mean, double sd);

}  // namespace symld
