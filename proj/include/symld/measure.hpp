#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "symld/alphabet.hpp"
#include "symld/grid2.hpp"
#include "symld/rational.hpp"

namespace symld {

struct Permutation;

// Integer-count representation of an empirical measure: counts/denominator.
// Kept alongside the floating weights so oracle comparisons never drift.
struct ExactWeights {
  std::vector<std::int64_t> counts;
  std::int64_t denominator = 1;
};

// Probability measure on a finite alphabet. Weights are validated
// (nonnegative, total mass 1 within 1e-12). Measures built from counts carry
// the exact rational representation as well; conversion is explicit.
class DiscreteMeasure {
 public:
  DiscreteMeasure(AlphabetPtr alphabet, std::vector<double> weights);
  static DiscreteMeasure from_counts(AlphabetPtr alphabet, std::vector<std::int64_t> counts);
  static DiscreteMeasure uniform(AlphabetPtr alphabet);
  static DiscreteMeasure dirac(AlphabetPtr alphabet, int point);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  bool has_exact() const { return exact_.has_value(); }
  const ExactWeights& exact() const;
  Rational exact_weight(int i) const;

  // Drops the exact representation.
  DiscreteMeasure rounded() const { return DiscreteMeasure(alphabet_, weights_); }

 private:
  AlphabetPtr alphabet_;
  std::vector<double> weights_;
  std::optional<ExactWeights> exact_;
};

// Probability measure on the alphabet square, stored as a k x k weight grid.
class PairMeasure {
 public:
  PairMeasure(AlphabetPtr alphabet, Grid2<double> weights);
  static PairMeasure from_counts(AlphabetPtr alphabet, Grid2<std::int64_t> counts);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  int size() const { return weights_.rows; }
  double weight(int i, int j) const { return weights_(i, j); }
  const Grid2<double>& weights() const { return weights_; }

  bool has_exact() const { return exact_counts_.has_value(); }
  const Grid2<std::int64_t>& exact_counts() const;
  std::int64_t exact_denominator() const;
  Rational exact_weight(int i, int j) const;

 private:
  AlphabetPtr alphabet_;
  Grid2<double> weights_;
  std::optional<Grid2<std::int64_t>> exact_counts_;
  std::int64_t exact_denominator_ = 1;
};

// Ordered sample of alphabet points (stored as point indices).
class IndexedSample {
 public:
  IndexedSample(AlphabetPtr alphabet, std::vector<int> indices);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int at(int i) const { return indices_[i]; }
  const std::vector<int>& indices() const { return indices_; }

  std::vector<std::int64_t> counts() const;  // occurrences per alphabet point

 private:
  AlphabetPtr alphabet_;
  std::vector<int> indices_;
};

// mu^n: weight of a point = its count in the sample / n. Exact.
DiscreteMeasure empirical_of(const IndexedSample& sample);

// Pair empirical (1/n) sum of diracs at (x_i, x_{perm(i)}); both marginals
// equal empirical_of(sample) exactly by integer counting.
PairMeasure pair_empirical(const IndexedSample& sample, const Permutation& perm);

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const PairMeasure& nu);

PairMeasure product(const DiscreteMeasure& mu, const DiscreteMeasure& rho);

// Relative entropy H(nu|rho) in nats, with 0 log 0 = 0 and +infinity when nu
// charges a cell rho does not.
double relative_entropy(const DiscreteMeasure& nu, const DiscreteMeasure& rho);
double relative_entropy(const PairMeasure& nu, const PairMeasure& rho);

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b);

}  // namespace symld
