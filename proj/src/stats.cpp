#include "symld/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "symld/errors.hpp"

namespace symld {

namespace {

double chi_square_p(double stat, int dof) {
  if (dof <= 0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2)
double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * (std::abs(sum) + 1e-300)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw DomainError("counts/probs size mismatch");
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw DomainError("no observations");
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = static_cast<double>(n) * probs[i];
    if (e <= 0.0) {
      if (counts[i] != 0) return {1e300, static_cast<int>(counts.size()) - 1, 0.0};
      continue;
    }
    const double d = static_cast<double>(counts[i]) - e;
    stat += d * d / e;
    ++dof;
  }
  return {stat, dof, chi_square_p(stat, dof)};
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b) {
  if (a.size() != b.size()) throw DomainError("cell count mismatch");
  std::int64_t na = 0, nb = 0;
  for (auto c : a) na += c;
  for (auto c : b) nb += c;
  if (na == 0 || nb == 0) throw DomainError("empty sample");
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pooled = static_cast<double>(a[i] + b[i]) / static_cast<double>(na + nb);
    if (pooled <= 0.0) continue;
    const double ea = na * pooled, eb = nb * pooled;
    const double da = a[i] - ea, db = b[i] - eb;
    stat += da * da / ea + db * db / eb;
    ++dof;
  }
  return {stat, dof, chi_square_p(stat, dof)};
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double sq = std::sqrt(n);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;  // Stephens correction
  return {d, kolmogorov_q(lambda)};
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

}  // namespace symld
