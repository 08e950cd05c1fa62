#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "symld/errors.hpp"
#include "symld/exact.hpp"
#include "symld/measure.hpp"
#include "symld/sampler.hpp"
#include "symld/stats.hpp"
#include "symld/transport.hpp"

using namespace symld;

TEST_CASE("rng reproducibility and stream independence") {
  RngHandle a(42, 1), b(42, 1), c(42, 2);
  std::vector<std::uint64_t> sa, sb, sc;
  for (int i = 0; i < 64; ++i) {
    sa.push_back(a.next_u64());
    sb.push_back(b.next_u64());
    sc.push_back(c.next_u64());
  }
  CHECK(sa == sb);
  CHECK(sa != sc);

  // interleaving draws on separate streams leaves each sequence unchanged
  RngHandle s1(7, 0), s2 = s1.split(1);
  std::vector<std::uint64_t> seq1, seq2;
  for (int i = 0; i < 32; ++i) {
    seq1.push_back(s1.next_u64());
    seq2.push_back(s2.next_u64());
  }
  RngHandle t1(7, 0), t2 = t1.split(1);
  std::vector<std::uint64_t> u2, u1;
  for (int i = 0; i < 32; ++i) u2.push_back(t2.next_u64());
  for (int i = 0; i < 32; ++i) u1.push_back(t1.next_u64());
  CHECK(seq1 == u1);
  CHECK(seq2 == u2);
}

TEST_CASE("next_below stays in range and is unbiased enough") {
  RngHandle rng(1);
  std::vector<std::int64_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.next_below(7)];
  const auto r = chi_square_gof(counts, std::vector<double>(7, 1.0 / 7.0));
  CHECK(r.p_value > 1e-4);
  CHECK_THROWS_AS(rng.next_below(0), DomainError);
}

TEST_CASE("normals have the right moments") {
  RngHandle rng(2);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(s2 / n - 1.0) < 6.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample_permutation uniformity") {
  RngHandle rng(3);
  CHECK(sample_permutation(1, rng) == Permutation::identity(1));
  CHECK_THROWS_AS(sample_permutation(0, rng), DomainError);

  // chi-square over the 6 cells of S_3 at 60000 draws
  std::vector<std::int64_t> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[sample_permutation(3, rng).rank()];
  auto r3 = chi_square_gof(counts, std::vector<double>(6, 1.0 / 6.0));
  CHECK(r3.p_value > 0.001);

  // and over S_4 and S_5 at 1e5 draws
  for (int n : {4, 5}) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(std::tgamma(n + 1.0)), 0);
    for (int i = 0; i < 100000; ++i) ++c[sample_permutation(n, rng).rank()];
    auto r = chi_square_gof(c, std::vector<double>(c.size(), 1.0 / c.size()));
    CHECK(r.p_value > 0.001);
  }
}

TEST_CASE("sample_sym_pairs marginals and exact law") {
  auto a = line_alphabet(2);
  IndexedSample s(a, {0, 0, 1});
  RngHandle rng(5);

  // n = 1: always the diagonal dirac
  IndexedSample one(a, {1});
  for (int i = 0; i < 5; ++i) {
    CHECK(sample_sym_pairs(one, rng).exact_weight(1, 1) == Rational(1));
  }

  // marginals always equal the sample empirical
  for (int i = 0; i < 200; ++i) {
    auto v = sample_sym_pairs(s, rng);
    auto [m1, m2] = marginals(v);
    CHECK(m1.exact().counts == s.counts());
    CHECK(m2.exact().counts == s.counts());
  }

  // empirical frequencies match the exact oracle within 3 sigma at 1e5 draws
  const auto law = exact_sym_law(MarginVector({2, 1}));
  std::map<PairTypeTable, std::int64_t> hist;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto v = sample_sym_pairs(s, rng);
    ++hist[PairTypeTable{v.exact_counts()}];
  }
  for (const auto& [table, lp] : law) {
    const double p = to_double(lp.exact.value());
    const double expect = draws * p;
    const double sd = std::sqrt(draws * p * (1.0 - p));
    CHECK(std::abs(hist[table] - expect) < 3.0 * sd);
  }
}

TEST_CASE("sample_iid_pairs cell frequencies approach the product law") {
  auto a = line_alphabet(2);
  auto mu = DiscreteMeasure::from_counts(a, {3, 1});
  RngHandle rng(7);
  const int n = 4, draws = 50000;
  Grid2<std::int64_t> cells(2, 2, 0);
  for (int d = 0; d < draws; ++d) {
    const auto w = sample_iid_pairs(mu, n, rng);
    for (auto [l, r] : w.atoms) ++cells(l, r);
  }
  const std::int64_t total = static_cast<std::int64_t>(draws) * n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double p = mu.weight(i) * mu.weight(j);
      const double sd = std::sqrt(static_cast<double>(total) * p * (1 - p));
      CHECK(std::abs(static_cast<double>(cells(i, j)) - total * p) < 3.0 * sd);
    }
}

TEST_CASE("conditioning identity: W given matching empiricals is V in law") {
  // rejection-sample W^n conditioned on both coordinate empiricals equalling
  // mu^n; the conditional law equals the exact permutation law
  auto a = line_alphabet(2);
  IndexedSample s(a, {0, 0, 1, 1});
  auto mu_n = empirical_of(s);
  const auto target_counts = s.counts();
  RngHandle rng(11);
  std::map<PairTypeTable, std::int64_t> hist;
  std::int64_t accepted = 0;
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto w = sample_iid_pairs(mu_n, 4, rng);
    std::vector<std::int64_t> lc(2, 0), rc(2, 0);
    for (auto [l, r] : w.atoms) {
      ++lc[l];
      ++rc[r];
    }
    if (lc != target_counts || rc != target_counts) continue;
    ++accepted;
    ++hist[PairTypeTable{atoms_measure(w).exact_counts()}];
  }
  REQUIRE(accepted > 5000);
  const auto law = exact_sym_law(MarginVector({2, 2}));
  std::vector<std::int64_t> counts;
  std::vector<double> probs;
  for (const auto& [table, lp] : law) {
    counts.push_back(hist[table]);
    probs.push_back(to_double(lp.exact.value()));
  }
  const auto r = chi_square_gof(counts, probs);
  CHECK(r.p_value > 0.001);
}

TEST_CASE("two-layer sampler") {
  auto a = line_alphabet(2);
  RngHandle rng(13);

  // deterministic first layer reduces to the permutation sampler in law
  IndexedSample s(a, {0, 1, 1});
  auto fixed = FirstLayerSampler::fixed(s);
  for (int i = 0; i < 100; ++i) {
    auto v = sample_two_layer(fixed, 3, rng);
    auto [m1, m2] = marginals(v);
    CHECK(m1.exact().counts == s.counts());
    CHECK(m2.exact().counts == m1.exact().counts);
  }
  CHECK_THROWS_AS(sample_two_layer(fixed, 4, rng), DomainError);

  // n = 2, uniform first layer: enumerate all 4 x 2 outcomes exactly
  auto iid = FirstLayerSampler::iid(DiscreteMeasure::uniform(a));
  std::map<Grid2<std::int64_t>, double> expected;
  {
    std::vector<int> letters{0, 1};
    for (int x1 : letters)
      for (int x2 : letters) {
        for (const auto& p : all_permutations(2)) {
          IndexedSample xs(a, {x1, x2});
          auto v = pair_empirical(xs, p);
          expected[v.exact_counts()] += 1.0 / 8.0;
        }
      }
  }
  std::map<Grid2<std::int64_t>, std::int64_t> hist;
  const int draws = 80000;
  for (int d = 0; d < draws; ++d) {
    auto v = sample_two_layer(iid, 2, rng);
    ++hist[v.exact_counts()];
    auto [m1, m2] = marginals(v);
    CHECK(m1.exact().counts == m2.exact().counts);  // marginal equality every draw
  }
  CHECK(expected.size() == 4);
  for (const auto& [cells, p] : expected) {
    const double sd = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(static_cast<double>(hist[cells]) - draws * p) < 3.0 * sd);
  }
}

TEST_CASE("law equality: same generator twice never systematically rejects") {
  auto a = line_alphabet(2);
  IndexedSample s(a, {0, 0, 1, 1});
  RngHandle rng(17);
  TableGenerator gen = [&s](RngHandle& r) {
    return PairTypeTable{sample_sym_pairs(s, r).exact_counts()};
  };
  int rejections = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto report = law_equality_test(gen, gen, 2000, rng);
    if (report.chi.p_value < 0.05) ++rejections;
  }
  CHECK(rejections <= 5);  // ~1 expected at the 5% level
}

TEST_CASE("lemma 3 in law at reduced scale") {
  // couple_min(W^n) and couple_max(W^n) match V^n in law (n = 4, k = 2)
  auto a = line_alphabet(2);
  IndexedSample s(a, {0, 0, 1, 1});
  SymSet sym(s);
  auto mu_n = empirical_of(s);
  RngHandle rng(19);
  TableGenerator gen_v = [&s](RngHandle& r) {
    return PairTypeTable{sample_sym_pairs(s, r).exact_counts()};
  };
  TableGenerator gen_min = [&](RngHandle& r) {
    const auto w = sample_iid_pairs(mu_n, 4, r);
    return PairTypeTable{couple_min(w, sym, r).measure.exact_counts()};
  };
  TableGenerator gen_max = [&](RngHandle& r) {
    const auto w = sample_iid_pairs(mu_n, 4, r);
    return PairTypeTable{couple_max(w, sym, r).measure.exact_counts()};
  };
  const auto rep_min = law_equality_test(gen_v, gen_min, 20000, rng);
  CHECK(rep_min.chi.p_value > 0.001);
  const auto rep_max = law_equality_test(gen_v, gen_max, 20000, rng);
  CHECK(rep_max.chi.p_value > 0.001);
}

TEST_CASE("two-layer law matches the exact mixture oracle") {
  auto a = line_alphabet(2);
  auto m = DiscreteMeasure::uniform(a);
  auto iid = FirstLayerSampler::iid(m);
  RngHandle rng(23);
  const auto law = exact_two_layer_law(m, 4);
  std::map<TwoLayerOutcome, std::int64_t> hist;
  const int draws = 60000;
  for (int d = 0; d < draws; ++d) {
    auto v = sample_two_layer(iid, 4, rng);
    auto [m1, m2] = marginals(v);
    hist[TwoLayerOutcome{MarginVector(m1.exact().counts), PairTypeTable{v.exact_counts()}}]++;
  }
  std::vector<std::int64_t> counts;
  std::vector<double> probs;
  for (const auto& [key, lp] : law) {
    counts.push_back(hist[key]);
    probs.push_back(to_double(lp.exact.value()));
  }
  const auto r = chi_square_gof(counts, probs);
  CHECK(r.p_value > 0.001);
}
