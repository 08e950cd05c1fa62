#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "symld/grid2.hpp"
#include "symld/measure.hpp"
#include "symld/rational.hpp"

namespace symld {

// Integer counts per alphabet point; the exact type of an empirical measure.
struct MarginVector {
  std::vector<std::int64_t> counts;

  explicit MarginVector(std::vector<std::int64_t> c);
  std::int64_t n() const;
  int k() const { return static_cast<int>(counts.size()); }

  friend auto operator<=>(const MarginVector&, const MarginVector&) = default;
};

// k x k nonnegative integer matrix whose row sums and column sums both equal
// the margin vector. m/n is a pair measure with both marginals equal to the
// empirical measure of the generating sample.
struct PairTypeTable {
  Grid2<std::int64_t> cells;

  MarginVector row_margins() const;
  MarginVector col_margins() const;
  std::int64_t total() const;
  PairMeasure to_measure(AlphabetPtr alphabet) const;

  friend auto operator<=>(const PairTypeTable&, const PairTypeTable&) = default;
};

// Log-domain probability with the exact rational kept when affordable.
struct LogProb {
  double log_value = 0.0;  // <= 0
  std::optional<Rational> exact;
};

struct OracleCaps {
  int max_k = 6;
  std::int64_t max_n = 60;
  std::int64_t max_tables = 5'000'000;
};

// Every table with the given row and column margins, exactly once, by
// recursive row-by-row enumeration with remaining-margin pruning.
void for_each_table(const MarginVector& margins, const std::function<void(const PairTypeTable&)>& fn,
                    const OracleCaps& caps = {});
std::vector<PairTypeTable> enumerate_tables(const MarginVector& margins, const OracleCaps& caps = {});

// Number of permutations realizing the pair type m for a sample with the
// given counts: (prod_l c_l!) * prod_j (c_j! / prod_l m_jl!).
BigInt table_count(const MarginVector& margins, const PairTypeTable& m);

// Exact law of the permutation-symmetrised pair empirical: P(m) = count/n!.
// Probabilities sum to 1 exactly.
std::map<PairTypeTable, LogProb> exact_sym_law(const MarginVector& margins, const OracleCaps& caps = {});

// Deterministic nearest feasible table to n*target with both margins equal to
// `margins`: floor, row repair by largest remainder, then column repair.
// Ties break lexicographically.
PairTypeTable nearest_feasible_table(const Grid2<double>& target, const MarginVector& margins);

// Finite-n exact rate -(1/n) log P(V = nearest feasible table to n*target).
// Requires n*mu integer valued. Log-factorial evaluation, exact up to n=500.
double finite_n_rate(const PairMeasure& target, const DiscreteMeasure& mu, std::int64_t n);

// Key of the two-layer joint law: margin realized by the first layer plus the
// table realized by the permutation.
struct TwoLayerOutcome {
  MarginVector margins;
  PairTypeTable table;
  friend auto operator<=>(const TwoLayerOutcome&, const TwoLayerOutcome&) = default;
};

// Exact joint law of (margins, table) when the first layer is n iid draws
// from m_law (which must carry exact rational weights). Total mass 1 exactly.
std::map<TwoLayerOutcome, LogProb> exact_two_layer_law(const DiscreteMeasure& m_law, std::int64_t n,
                                                       const OracleCaps& caps = {});

// Exact probability that an iid sample of size n from the empirical measure
// with these counts reproduces that empirical measure, together with the
// n!/n^n floor. Equality holds iff all counts are 1.
struct EmpiricalMatchProb {
  Rational probability;
  Rational bound;  // n!/n^n
};
EmpiricalMatchProb empirical_match_prob(const MarginVector& margins);

}  // namespace symld
