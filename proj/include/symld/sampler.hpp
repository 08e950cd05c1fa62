#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>

#include "symld/exact.hpp"
#include "symld/measure.hpp"
#include "symld/permutation.hpp"
#include "symld/rng.hpp"
#include "symld/stats.hpp"
#include "symld/transport.hpp"

namespace symld {

// Law of the first layer (X_1,...,X_n): either a fixed sample or iid draws
// from a given measure.
class FirstLayerSampler {
 public:
  static FirstLayerSampler fixed(IndexedSample sample);
  static FirstLayerSampler iid(DiscreteMeasure law);

  bool is_fixed() const { return fixed_.has_value(); }
  const AlphabetPtr& alphabet() const;
  const IndexedSample& fixed_sample() const;

  // Fixed mode requires n == sample size.
  IndexedSample draw(int n, RngHandle& rng) const;

 private:
  FirstLayerSampler() = default;
  std::optional<IndexedSample> fixed_;
  std::optional<DiscreteMeasure> law_;
};

// One draw of a point index from a measure. Measures carrying exact counts
// are sampled positionally (exact cell probabilities); otherwise by inverse
// cdf on the floating weights.
int sample_point(const DiscreteMeasure& law, RngHandle& rng);

// V^n: pair empirical of the sample under a fresh uniform permutation.
PairMeasure sample_sym_pairs(const IndexedSample& sample, RngHandle& rng);

// W^n: n iid pairs (L_i, R_i), all 2n coordinates iid from mu_n.
PairAtoms sample_iid_pairs(const DiscreteMeasure& mu_n, int n, RngHandle& rng);

// L^n: first layer draw, then an independent uniform permutation.
PairMeasure sample_two_layer(const FirstLayerSampler& layer1, int n, RngHandle& rng);

using TableGenerator = std::function<PairTypeTable(RngHandle&)>;

struct LawEqualityReport {
  std::vector<PairTypeTable> cells;
  std::vector<std::int64_t> counts_a;
  std::vector<std::int64_t> counts_b;
  ChiSquareResult chi;
};

// Empirical-law comparison of two generators over their (finite) joint
// support, by two-sample chi-square.
LawEqualityReport law_equality_test(const TableGenerator& gen_a, const TableGenerator& gen_b,
                                    std::int64_t draws, RngHandle& rng);

}  // namespace symld
