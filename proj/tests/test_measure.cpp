#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "symld/errors.hpp"
#include "symld/io.hpp"
#include "symld/measure.hpp"
#include "symld/permutation.hpp"
#include "symld/rng.hpp"

using namespace symld;

namespace {

IndexedSample make_sample(const AlphabetPtr& a, std::vector<int> idx) {
  return IndexedSample(a, std::move(idx));
}

// independent oracle: entropy by a direct loop over weight vectors
double entropy_oracle(const std::vector<double>& nu, const std::vector<double>& rho) {
  double h = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    if (rho[i] == 0.0) return INFINITY;
    h += nu[i] * std::log(nu[i] / rho[i]);
  }
  return h;
}

}  // namespace

TEST_CASE("alphabet validates the metric") {
  auto a = line_alphabet(3);
  CHECK(a->distance(0, 2) == doctest::Approx(2.0));
  CHECK(a->tilde(0, 1) == doctest::Approx(0.5));
  CHECK(a->tilde(0, 0) == 0.0);

  Grid2<double> bad(2, 2, 0.0);
  bad(0, 1) = 1.0;
  bad(1, 0) = 2.0;  // asymmetric
  CHECK_THROWS_AS(make_alphabet({{"a", {0.0}}, {"b", {1.0}}}, bad), DomainError);

  CHECK_THROWS_AS(make_alphabet({{"a", {0.0}}, {"a", {1.0}}}), DomainError);
  CHECK_THROWS_AS(line_alphabet(17), CapError);
}

TEST_CASE("empirical_of counts atoms") {
  auto a = line_alphabet(2);
  CHECK(empirical_of(make_sample(a, {0})).weight(0) == 1.0);

  auto m = empirical_of(make_sample(a, {0, 1, 0}));
  CHECK(m.exact_weight(0) == Rational(2, 3));
  CHECK(m.exact_weight(1) == Rational(1, 3));

  CHECK_THROWS_AS(IndexedSample(a, {}), DomainError);

  RngHandle rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> idx;
    const int n = 1 + static_cast<int>(rng.next_below(10));
    for (int i = 0; i < n; ++i) idx.push_back(static_cast<int>(rng.next_below(2)));
    const auto e = empirical_of(make_sample(a, idx));
    double total = 0.0;
    for (int i = 0; i < e.size(); ++i) total += e.weight(i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pair_empirical basics and marginal identity") {
  auto a = line_alphabet(2);
  // n = 1 forces the diagonal
  auto single = pair_empirical(make_sample(a, {0}), Permutation::identity(1));
  CHECK(single.exact_weight(0, 0) == Rational(1));

  // swap on (a,b)
  auto swapped = pair_empirical(make_sample(a, {0, 1}), Permutation({1, 0}));
  CHECK(swapped.exact_weight(0, 1) == Rational(1, 2));
  CHECK(swapped.exact_weight(1, 0) == Rational(1, 2));
  CHECK(swapped.exact_weight(0, 0) == Rational(0));

  CHECK_THROWS_AS(pair_empirical(make_sample(a, {0, 1}), Permutation::identity(3)), DomainError);

  // all 6 permutations of (a,a,b): both marginals are (2/3, 1/3), exactly
  auto s = make_sample(a, {0, 0, 1});
  for (const auto& p : all_permutations(3)) {
    auto pm = pair_empirical(s, p);
    auto [m1, m2] = marginals(pm);
    CHECK(m1.exact_weight(0) == Rational(2, 3));
    CHECK(m2.exact_weight(0) == Rational(2, 3));
    CHECK(m1.exact_weight(1) == Rational(1, 3));
    CHECK(m2.exact_weight(1) == Rational(1, 3));
  }
}

TEST_CASE("pair_empirical marginal identity holds exhaustively for n <= 8") {
  auto a = line_alphabet(3);
  RngHandle rng(11);
  for (int n = 1; n <= 8; n += (n < 4 ? 1 : 2)) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) idx.push_back(static_cast<int>(rng.next_below(3)));
    auto s = make_sample(a, idx);
    const auto expect = s.counts();
    for (const auto& p : all_permutations(n)) {
      auto pm = pair_empirical(s, p);
      auto [m1, m2] = marginals(pm);
      CHECK(m1.exact().counts == expect);
      CHECK(m2.exact().counts == expect);
    }
  }
}

TEST_CASE("empirical_of is permutation invariant") {
  auto a = line_alphabet(3);
  auto s = make_sample(a, {0, 2, 2, 1});
  const auto base = empirical_of(s).exact().counts;
  for (const auto& tau : all_permutations(4)) {
    std::vector<int> idx(4);
    for (int i = 0; i < 4; ++i) idx[i] = s.at(tau(i));
    CHECK(empirical_of(make_sample(a, idx)).exact().counts == base);
  }
}

TEST_CASE("product and marginals are inverse") {
  auto a = line_alphabet(2);
  auto da = DiscreteMeasure::dirac(a, 0);
  auto db = DiscreteMeasure::dirac(a, 1);
  auto p = product(da, db);
  CHECK(p.weight(0, 1) == doctest::Approx(1.0));

  auto u = DiscreteMeasure::uniform(a);
  auto uu = product(u, u);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(uu.weight(i, j) == doctest::Approx(0.25));

  auto mu = DiscreteMeasure(a, {0.3, 0.7});
  auto rho = DiscreteMeasure(a, {0.6, 0.4});
  auto [m1, m2] = marginals(product(mu, rho));
  for (int i = 0; i < 2; ++i) {
    CHECK(m1.weight(i) == doctest::Approx(mu.weight(i)).epsilon(1e-12));
    CHECK(m2.weight(i) == doctest::Approx(rho.weight(i)).epsilon(1e-12));
  }

  auto b = line_alphabet(3);
  CHECK_THROWS_AS(product(mu, DiscreteMeasure::uniform(b)), DomainError);
}

TEST_CASE("relative entropy") {
  auto a = line_alphabet(2);
  auto u = DiscreteMeasure::uniform(a);
  CHECK(relative_entropy(u, u) == 0.0);

  // direct summation oracle for nu=(1,0), rho=(1/2,1/2)
  auto nu = DiscreteMeasure(a, {1.0, 0.0});
  const double expected = entropy_oracle({1.0, 0.0}, {0.5, 0.5});
  CHECK(expected == doctest::Approx(std::log(2.0)));
  CHECK(relative_entropy(nu, u) == doctest::Approx(expected).epsilon(1e-12));

  CHECK(std::isinf(relative_entropy(DiscreteMeasure::dirac(a, 0), DiscreteMeasure::dirac(a, 1))));

  // nonnegativity, equality iff equal
  RngHandle rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w1(2), w2(2);
    w1[0] = rng.next_unit();
    w1[1] = 1.0 - w1[0];
    w2[0] = rng.next_unit();
    w2[1] = 1.0 - w2[0];
    DiscreteMeasure m1(a, w1), m2(a, w2);
    const double h = relative_entropy(m1, m2);
    CHECK(h >= 0.0);
    if (std::abs(w1[0] - w2[0]) > 1e-6) CHECK(h > 0.0);
  }
  CHECK(relative_entropy(DiscreteMeasure(a, {0.3, 0.7}), DiscreteMeasure(a, {0.3, 0.7})) == 0.0);
}

TEST_CASE("json round trips") {
  auto a = line_alphabet(3);
  auto m = empirical_of(IndexedSample(a, {0, 1, 1, 2}));
  auto j = measure_to_json(m);
  auto back = measure_from_json(j);
  CHECK(back.has_exact());
  for (int i = 0; i < 3; ++i) CHECK(back.exact_weight(i) == m.exact_weight(i));

  auto pm = pair_empirical(IndexedSample(a, {0, 1, 2}), Permutation({1, 2, 0}));
  auto pj = pair_measure_to_json(pm);
  auto pback = pair_measure_from_json(pj);
  CHECK(pback.has_exact());
  CHECK(pback.exact_counts() == pm.exact_counts());

  auto s = IndexedSample(a, {2, 0, 1});
  auto sj = sample_to_json(s);
  CHECK(sample_from_json(sj).indices() == s.indices());

  // float weights survive too
  DiscreteMeasure f(a, {0.25, 0.5, 0.25});
  auto fj = measure_to_json(f);
  auto fback = measure_from_json(fj);
  for (int i = 0; i < 3; ++i) CHECK(fback.weight(i) == doctest::Approx(f.weight(i)).epsilon(1e-15));
}
