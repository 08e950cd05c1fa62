#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "symld/errors.hpp"
#include "symld/exact.hpp"
#include "symld/measure.hpp"
#include "symld/permutation.hpp"
#include "symld/rate.hpp"

using namespace symld;

namespace {

// brute-force oracle: histogram of pair types over all n! permutations of the
// sample implied by the margin counts
std::map<PairTypeTable, BigInt> brute_force_histogram(const MarginVector& margins) {
  std::vector<int> sample;
  for (int j = 0; j < margins.k(); ++j)
    for (std::int64_t c = 0; c < margins.counts[j]; ++c) sample.push_back(j);
  const int n = static_cast<int>(sample.size());
  std::map<PairTypeTable, BigInt> hist;
  for (const auto& perm : all_permutations(n)) {
    Grid2<std::int64_t> cells(margins.k(), margins.k(), 0);
    for (int i = 0; i < n; ++i) ++cells(sample[i], sample[perm(i)]);
    ++hist[PairTypeTable{std::move(cells)}];
  }
  return hist;
}

std::vector<MarginVector> compositions(int n, int k) {
  std::vector<MarginVector> out;
  std::vector<std::int64_t> cur(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int rest) {
    if (pos == k - 1) {
      cur[pos] = rest;
      if (cur[pos] >= 1) out.push_back(MarginVector(cur));
      return;
    }
    for (int v = 1; v <= rest - (k - 1 - pos); ++v) {
      cur[pos] = v;
      rec(pos + 1, rest - v);
    }
  };
  if (n >= k) rec(0, n);
  return out;
}

}  // namespace

TEST_CASE("enumerate_tables small cases") {
  // k = 1: the single table [n]
  auto t1 = enumerate_tables(MarginVector({4}));
  REQUIRE(t1.size() == 1);
  CHECK(t1[0].cells(0, 0) == 4);

  // margins (1,1): identity and swap
  auto t2 = enumerate_tables(MarginVector({1, 1}));
  CHECK(t2.size() == 2);

  // margins (2,1): hand enumeration gives exactly the two tables
  auto t3 = enumerate_tables(MarginVector({2, 1}));
  REQUIRE(t3.size() == 2);
  Grid2<std::int64_t> a(2, 2, 0);
  a(0, 0) = 1;
  a(0, 1) = 1;
  a(1, 0) = 1;
  Grid2<std::int64_t> b(2, 2, 0);
  b(0, 0) = 2;
  b(1, 1) = 1;
  CHECK(((t3[0].cells == a && t3[1].cells == b) || (t3[0].cells == b && t3[1].cells == a)));

  // margins with a zero count behave like a smaller alphabet
  auto t4 = enumerate_tables(MarginVector({2, 0, 1}));
  CHECK(t4.size() == 2);

  CHECK_THROWS_AS(enumerate_tables(MarginVector({100, 100})), CapError);
}

TEST_CASE("table_count matches brute force") {
  // margins (1,1)
  const MarginVector m11({1, 1});
  BigInt total = 0;
  for (const auto& t : enumerate_tables(m11)) {
    const BigInt c = table_count(m11, t);
    CHECK(c == 1);
    total += c;
  }
  CHECK(total == 2);

  // margins (2,1): counts 4 and 2 (brute force over all 3! permutations)
  const MarginVector m21({2, 1});
  const auto hist = brute_force_histogram(m21);
  for (const auto& t : enumerate_tables(m21)) {
    CHECK(table_count(m21, t) == hist.at(t));
  }

  // margin mismatch is rejected
  Grid2<std::int64_t> bad(2, 2, 0);
  bad(0, 0) = 1;
  bad(1, 1) = 1;
  CHECK_THROWS_AS(table_count(m21, PairTypeTable{bad}), DomainError);
}

TEST_CASE("sum of table counts is n!it for margins up to n = 8") {
  for (int n : {2, 4, 6, 8}) {
    for (const auto& m : compositions(n, 2)) {
      BigInt total = 0;
      for_each_table(m, [&](const PairTypeTable& t) { total += table_count(m, t); });
      CHECK(total == factorial(n));
    }
  }
  for (const auto& m : compositions(6, 3)) {
    BigInt total = 0;
    for_each_table(m, [&](const PairTypeTable& t) { total += table_count(m, t); });
    CHECK(total == factorial(6));
  }
}

TEST_CASE("exact_sym_law equals brute force exactly") {
  // the (2,1) example: P = 2/3 and 1/3
  const MarginVector m21({2, 1});
  auto law = exact_sym_law(m21);
  Grid2<std::int64_t> mixed(2, 2, 0);
  mixed(0, 0) = 1;
  mixed(0, 1) = 1;
  mixed(1, 0) = 1;
  CHECK(law.at(PairTypeTable{mixed}).exact.value() == Rational(2, 3));

  // k = 1
  auto l1 = exact_sym_law(MarginVector({5}));
  CHECK(l1.begin()->second.exact.value() == Rational(1));

  // brute-force equality over a spread of margins
  for (int n : {3, 5, 6}) {
    for (const auto& m : compositions(n, 3)) {
      const auto hist = brute_force_histogram(m);
      const auto lw = exact_sym_law(m);
      REQUIRE(hist.size() == lw.size());
      const BigInt nf = factorial(n);
      for (const auto& [t, p] : lw) {
        CHECK(p.exact.value() == Rational(hist.at(t), nf));
      }
    }
  }
}

TEST_CASE("nearest_feasible_table repairs margins deterministically") {
  // exact integer targets come back unchanged
  Grid2<double> t(2, 2, 0.25);
  auto m = nearest_feasible_table(t, MarginVector({2, 2}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(m.cells(i, j) == 1);

  // fractional cells round and repair to the margins
  Grid2<double> t2(2, 2, 0.0);
  t2(0, 0) = 0.45;
  t2(0, 1) = 0.05;
  t2(1, 0) = 0.05;
  t2(1, 1) = 0.45;
  auto m2 = nearest_feasible_table(t2, MarginVector({25, 25}));
  CHECK(m2.row_margins() == MarginVector({25, 25}));
  CHECK(m2.col_margins() == MarginVector({25, 25}));
  CHECK(m2.cells(0, 0) + m2.cells(0, 1) == 25);
  CHECK(std::abs(m2.cells(0, 0) - 22.5) <= 1.0);
}

TEST_CASE("finite_n_rate approaches the fixed-sample rate") {
  auto a = line_alphabet(2);
  auto mu = DiscreteMeasure::uniform(a);

  // n = 1: single table, rate 0 (target must have integral margins at n=1)
  Grid2<double> diag(1, 1, 1.0);
  auto one = line_alphabet(1);
  CHECK(finite_n_rate(PairMeasure(one, diag), DiscreteMeasure::uniform(one), 1) ==
        doctest::Approx(0.0));

  // mu x mu: value within 0.05 of 0 by n = 200 and decreasing in n
  auto uu = product(mu, mu);
  double prev = 1e9;
  for (int n : {50, 100, 200}) {
    const double v = finite_n_rate(uu, mu, n);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 0.05);

  // diagonal-heavy tilt: gap to rate_fixed_sample within C log(n)/n
  Grid2<double> tilt(2, 2, 0.05);
  tilt(0, 0) = 0.45;
  tilt(1, 1) = 0.45;
  PairMeasure target(a, tilt);
  const double limit = rate_fixed_sample(target, mu);
  double fitted_c = 0.0;
  for (int n : {50, 100, 200, 400}) {
    const double gap = std::abs(finite_n_rate(target, mu, n) - limit);
    fitted_c = std::max(fitted_c, gap * n / std::log(n));
    CHECK(gap <= 9.0 * std::log(n + 1.0) / n);
  }
  CHECK(fitted_c < 9.0);

  // non-integral n*mu is rejected
  CHECK_THROWS_AS(finite_n_rate(target, mu, 3), DomainError);
}

TEST_CASE("entropy consistency along enumerated tables") {
  // |-(1/n) log P(m) - H(m/n | mu x mu)| <= (k^2+2k+1) log(n+1)/n for k = 2
  auto a = line_alphabet(2);
  auto mu = DiscreteMeasure::uniform(a);
  auto ref = product(mu, mu);
  for (int n : {50, 100, 200}) {
    const MarginVector margins({n / 2, n / 2});
    const double envelope = 9.0 * std::log(n + 1.0) / n;
    for_each_table(
        margins,
        [&](const PairTypeTable& t) {
          Grid2<double> w(2, 2, 0.0);
          for (int i = 0; i < 4; ++i) w.v[i] = static_cast<double>(t.cells.v[i]) / n;
          PairMeasure tm(a, w);
          const double h = relative_entropy(tm, ref);
          double logp = -log_factorial(n);
          for (int j = 0; j < 2; ++j) {
            logp += 2.0 * log_factorial(static_cast<unsigned>(margins.counts[j]));
            for (int l = 0; l < 2; ++l) logp -= log_factorial(static_cast<unsigned>(t.cells(j, l)));
          }
          CHECK(std::abs(-logp / n - h) <= envelope);
        },
        OracleCaps{6, 200, 5'000'000});
  }
}

TEST_CASE("two-layer exact law") {
  auto a = line_alphabet(2);
  auto m = DiscreteMeasure::uniform(a);

  // n = 2: P(margins (2,0)) = 1/4 carried by the single diagonal table
  auto law = exact_two_layer_law(m, 2);
  Rational total = 0;
  Rational p20;
  for (const auto& [key, lp] : law) {
    total += lp.exact.value();
    if (key.margins == MarginVector({2, 0})) p20 += lp.exact.value();
  }
  CHECK(total == 1);
  CHECK(p20 == Rational(1, 4));

  // -(1/n) log P approaches the two-layer rate along the frozen sequence
  const RateOracle sanov = RateOracle::sanov(m);
  Grid2<double> nu_star(2, 2, 0.125);
  nu_star(0, 0) = 0.375;
  nu_star(1, 1) = 0.375;
  const double limit = rate_two_layer(PairMeasure(a, nu_star), sanov);
  auto seq_gap = [&](std::int64_t n, std::vector<std::int64_t> cells) {
    Grid2<std::int64_t> g(2, 2, 0);
    g.v = std::move(cells);
    const PairTypeTable t{g};
    const auto lw = exact_two_layer_law(m, n);
    const auto it = lw.find(TwoLayerOutcome{t.row_margins(), t});
    REQUIRE(it != lw.end());
    return std::abs(-it->second.log_value / static_cast<double>(n) - limit);
  };
  const double g4 = seq_gap(4, {2, 0, 0, 2});
  const double g8 = seq_gap(8, {3, 1, 1, 3});
  const double g12 = seq_gap(12, {4, 2, 2, 4});
  CHECK(g8 < g4);
  CHECK(g12 < g8);

  CHECK_THROWS_AS(exact_two_layer_law(m, 13), CapError);
  DiscreteMeasure float_law(a, {0.5, 0.5});
  CHECK_THROWS_AS(exact_two_layer_law(float_law, 4), DomainError);
}

TEST_CASE("two-layer law matches the mixture of conditional laws exactly") {
  // P(margins, table) = P(margin under m) * P(table | margin)
  auto a = line_alphabet(2);
  auto m = DiscreteMeasure::from_counts(a, {2, 1});
  for (std::int64_t n : {2, 3, 4}) {
    const auto law = exact_two_layer_law(m, n);
    Rational total = 0;
    for (const auto& [key, lp] : law) {
      // margin probability: multinomial
      Rational pm(factorial(static_cast<unsigned>(n)), 1);
      for (int j = 0; j < 2; ++j) {
        pm /= Rational(factorial(static_cast<unsigned>(key.margins.counts[j])), 1);
        for (std::int64_t c = 0; c < key.margins.counts[j]; ++c) pm *= m.exact_weight(j);
      }
      const Rational cond(table_count(key.margins, key.table),
                          factorial(static_cast<unsigned>(n)));
      CHECK(lp.exact.value() == pm * cond);
      total += lp.exact.value();
    }
    CHECK(total == 1);
  }
}

TEST_CASE("empirical match probability and the factorial bound") {
  // distinct points: equality with n!/n^n
  for (int n : {1, 3, 5, 7}) {
    std::vector<std::int64_t> ones(n, 1);
    const auto r = empirical_match_prob(MarginVector(ones));
    CHECK(r.probability == r.bound);
  }
  {
    const auto r = empirical_match_prob(MarginVector({1, 1, 1}));
    CHECK(r.probability == Rational(2, 9));
  }
  // ties: strict inequality in the stated direction
  {
    const auto r = empirical_match_prob(MarginVector({2, 1}));
    // multinomial evaluation: 3!/(2!1!) * (2/3)^2 (1/3)
    CHECK(r.probability == Rational(4, 9));
    CHECK(r.probability > r.bound);
  }
  {
    const auto r = empirical_match_prob(MarginVector({1}));
    CHECK(r.probability == 1);
    CHECK(r.bound == 1);
  }
}
