#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "symld/bridge.hpp"
#include "symld/errors.hpp"
#include "symld/exact.hpp"
#include "symld/io.hpp"
#include "symld/measure.hpp"
#include "symld/rate.hpp"
#include "symld/sampler.hpp"
#include "symld/stats.hpp"
#include "symld/transport.hpp"

namespace symld::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<MarginVector> all_margins(int n, int k) {
  std::vector<MarginVector> out;
  std::vector<std::int64_t> cur(k, 0);
  std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t rest) {
    if (pos == k - 1) {
      cur[pos] = rest;
      out.push_back(MarginVector(cur));
      return;
    }
    for (std::int64_t v = 0; v <= rest; ++v) {
      cur[pos] = v;
      rec(pos + 1, rest - v);
    }
  };
  rec(0, n);
  return out;
}

// Criterion 1: exact_sym_law equals the brute-force histogram over all n!
// permutations, big-integer equality, every margin vector with k <= 3, n <= 8.
CriterionResult oracle_equivalence(bool inject_fault) {
  CriterionResult r{"oracle", "oracle-equivalence", true, 0.0, 0.0, ""};
  std::int64_t margin_vectors = 0;
  bool first_fault = !inject_fault;  // when injecting, corrupt the very first table once
  for (int n = 1; n <= 8 && r.pass; ++n) {
    for (const auto& margins : all_margins(n, 3)) {
      ++margin_vectors;
      // sample implied by the margins
      std::vector<int> sample;
      for (int j = 0; j < margins.k(); ++j)
        for (std::int64_t c = 0; c < margins.counts[j]; ++c) sample.push_back(j);
      std::map<PairTypeTable, BigInt> hist;
      for (const auto& perm : all_permutations(n)) {
        Grid2<std::int64_t> cells(3, 3, 0);
        for (int i = 0; i < n; ++i) ++cells(sample[i], sample[perm(i)]);
        ++hist[PairTypeTable{std::move(cells)}];
      }
      auto law = exact_sym_law(margins, OracleCaps{3, 8, 5'000'000});
      if (!first_fault && !law.empty()) {
        first_fault = true;
        law.begin()->second.exact = Rational(*law.begin()->second.exact + Rational(1, factorial(n)));
      }
      if (law.size() != hist.size()) {
        r.pass = false;
        break;
      }
      const BigInt nf = factorial(n);
      for (const auto& [table, lp] : law) {
        const auto it = hist.find(table);
        if (it == hist.end() || lp.exact.value() != Rational(it->second, nf)) {
          r.pass = false;
          break;
        }
      }
      if (!r.pass) break;
    }
  }
  r.measured = static_cast<double>(margin_vectors);
  r.detail = "margin vectors compared: " + std::to_string(margin_vectors);
  return r;
}

// Criterion 4: P(empirical = mu^n) = n!/n^n exactly for distinct points,
// strict excess under ties.
CriterionResult lemma4_exactness() {
  CriterionResult r{"oracle", "empirical-match-exactness", true, 0.0, 0.0, ""};
  int cases = 0;
  for (int n = 1; n <= 7; ++n) {
    const auto d = empirical_match_prob(MarginVector(std::vector<std::int64_t>(n, 1)));
    if (d.probability != d.bound) r.pass = false;
    if (n == 3 && d.probability != Rational(2, 9)) r.pass = false;
    ++cases;
  }
  for (int n = 2; n <= 7; ++n) {
    for (const auto& margins : all_margins(n, 2)) {
      bool tied = false;
      for (auto c : margins.counts)
        if (c >= 2) tied = true;
      if (!tied) continue;
      const auto d = empirical_match_prob(margins);
      if (!(d.probability > d.bound)) r.pass = false;
      ++cases;
    }
  }
  r.measured = cases;
  r.detail = "exact cases: " + std::to_string(cases);
  return r;
}

// Criterion 5: two-layer exact law approaches the two-layer rate along the
// frozen feasible sequence with strictly decreasing gaps.
CriterionResult two_layer_composition() {
  CriterionResult r{"oracle", "two-layer-composition", true, 0.0, 0.0, ""};
  auto a = line_alphabet(2);
  auto m = DiscreteMeasure::uniform(a);
  Grid2<double> nu_star(2, 2, 0.125);
  nu_star(0, 0) = 0.375;
  nu_star(1, 1) = 0.375;
  const double limit = rate_two_layer(PairMeasure(a, nu_star), RateOracle::sanov(m));
  const std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> seq{
      {4, {2, 0, 0, 2}}, {8, {3, 1, 1, 3}}, {12, {4, 2, 2, 4}}};
  double prev = 1e300;
  for (const auto& [n, cells] : seq) {
    Grid2<std::int64_t> g(2, 2, 0);
    g.v = cells;
    const PairTypeTable t{g};
    const auto law = exact_two_layer_law(m, n);
    const auto it = law.find(TwoLayerOutcome{t.row_margins(), t});
    if (it == law.end()) {
      r.pass = false;
      break;
    }
    const double gap = std::abs(-it->second.log_value / static_cast<double>(n) - limit);
    if (!(gap < prev)) r.pass = false;
    prev = gap;
    r.measured = gap;
  }
  r.detail = "final gap " + fmt(r.measured);
  return r;
}

// Criterion 2: finite-n rate vs the fixed-sample rate, both targets,
// monotonically decreasing and inside the Stirling envelope.
CriterionResult rate_convergence() {
  CriterionResult r{"rate", "rate-convergence", true, 0.0, 0.0, ""};
  auto a = line_alphabet(2);
  auto mu = DiscreteMeasure::uniform(a);
  std::vector<PairMeasure> targets;
  targets.push_back(product(mu, mu));
  Grid2<double> tilt(2, 2, 0.05);
  tilt(0, 0) = 0.45;
  tilt(1, 1) = 0.45;
  targets.emplace_back(a, tilt);
  double worst_ratio = 0.0;
  for (const auto& target : targets) {
    const double limit = rate_fixed_sample(target, mu);
    double prev = 1e300;
    for (int n : {50, 100, 200, 400}) {
      const double gap = std::abs(finite_n_rate(target, mu, n) - limit);
      const double envelope = 9.0 * std::log(n + 1.0) / n;
      if (!(gap < prev) || !(gap <= envelope)) r.pass = false;
      worst_ratio = std::max(worst_ratio, gap / envelope);
      prev = gap;
    }
  }
  r.measured = worst_ratio;
  r.threshold = 1.0;
  r.detail = "worst gap/envelope " + fmt(worst_ratio);
  return r;
}

// Criterion 6: entropy projection on the k = 2 diagonal family.
CriterionResult entropy_projection() {
  CriterionResult r{"rate", "entropy-projection", true, 0.0, 1e-8, ""};
  auto a = line_alphabet(2);
  auto mu = DiscreteMeasure::uniform(a);
  auto ref = product(mu, mu);
  Grid2<double> diag(2, 2, 0.0);
  diag(0, 0) = diag(1, 1) = 1.0;
  double worst = 0.0;
  for (double t : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    ConstraintSet cs;
    cs.common_marginal = mu;
    cs.observables.push_back(Observable{diag, t});
    const auto pr = entropy_project(ref, cs);
    const double closed = std::log(2.0) + t * std::log(t) + (1 - t) * std::log(1 - t);
    worst = std::max(worst, std::abs(pr.value - closed));
    worst = std::max(worst, std::abs(pr.minimizer.weight(0, 0) - t / 2));
    if (pr.marginal_residual >= 1e-10) r.pass = false;
    // grid oracle at step 1e-3 over exactly-feasible family points
    double grid_best = 1e300;
    for (int g = 0; g <= 1000; ++g) {
      const double av = 0.5 * g / 1000.0;
      if (std::abs(2 * av - t) > 1e-12) continue;
      Grid2<double> w(2, 2, 0.0);
      w(0, 0) = av;
      w(0, 1) = 0.5 - av;
      w(1, 0) = 0.5 - av;
      w(1, 1) = av;
      grid_best = std::min(grid_best, relative_entropy(PairMeasure(a, w), ref));
    }
    if (pr.value > grid_best + 1e-8) r.pass = false;
  }
  if (worst > 1e-8) r.pass = false;
  r.measured = worst;
  r.detail = "worst closed-form deviation " + fmt(worst);
  return r;
}

// Criterion 3: couple_min(W^n) and couple_max(W^n) match V^n in law,
// n = 4, k = 2, 1e5 draws each, chi-square at significance 0.001.
CriterionResult lemma3_in_law(std::uint64_t seed) {
  CriterionResult r{"coupling", "coupling-law-equality", true, 0.0, 0.001, ""};
  auto a = line_alphabet(2);
  IndexedSample s(a, {0, 0, 1, 1});
  SymSet sym(s);
  auto mu_n = empirical_of(s);
  RngHandle rng(seed, 1001);
  TableGenerator gen_v = [&s](RngHandle& h) {
    return PairTypeTable{sample_sym_pairs(s, h).exact_counts()};
  };
  TableGenerator gen_min = [&](RngHandle& h) {
    const auto w = sample_iid_pairs(mu_n, 4, h);
    return PairTypeTable{couple_min(w, sym, h).measure.exact_counts()};
  };
  TableGenerator gen_max = [&](RngHandle& h) {
    const auto w = sample_iid_pairs(mu_n, 4, h);
    return PairTypeTable{couple_max(w, sym, h).measure.exact_counts()};
  };
  const std::int64_t draws = 100000;
  const auto rep_min = law_equality_test(gen_v, gen_min, draws, rng);
  const auto rep_max = law_equality_test(gen_v, gen_max, draws, rng);
  r.measured = std::min(rep_min.chi.p_value, rep_max.chi.p_value);
  if (r.measured <= 0.001) r.pass = false;
  r.detail = "min p " + fmt(rep_min.chi.p_value) + ", max p " + fmt(rep_max.chi.p_value);
  return r;
}

// Criterion 7: assignment vs transport program on random equal-weight
// instances, plus the metric axioms for the tilde-ground Wasserstein.
CriterionResult transport_correctness(std::uint64_t seed) {
  CriterionResult r{"coupling", "transport-correctness", true, 0.0, 1e-9, ""};
  RngHandle rng(seed, 2002);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_below(7));
    std::vector<Point> pts;
    for (int i = 0; i < 2 * n; ++i) {
      pts.push_back({"p" + std::to_string(i), {rng.next_unit() * 4.0, rng.next_unit() * 4.0}});
    }
    auto al = make_alphabet(std::move(pts));
    Grid2<double> cost(n, n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = al->tilde(i, n + j);
    const auto [map, total] = solve_assignment(cost);
    (void)map;
    std::vector<double> w(n, 1.0 / n);
    double sg = 0.0;
    for (double v : w) sg += v;
    w[n - 1] += 1.0 - sg;
    const auto ot = transport_dense(w, w, cost);
    worst = std::max(worst, std::abs(ot.cost - total / n));
  }
  // metric axioms on random triples over a shared support
  RngHandle rng2(seed, 2003);
  std::vector<Point> pts;
  for (int i = 0; i < 6; ++i) {
    pts.push_back({"q" + std::to_string(i), {rng2.next_unit() * 4.0, rng2.next_unit() * 4.0}});
  }
  auto al = make_alphabet(std::move(pts));
  auto rand_measure = [&](RngHandle& h) {
    std::vector<double> w(6);
    double total = 0.0;
    for (double& v : w) {
      v = 0.05 + h.next_unit();
      total += v;
    }
    for (double& v : w) v /= total;
    double s2 = 0.0;
    for (double v : w) s2 += v;
    w[5] += 1.0 - s2;
    return DiscreteMeasure(al, w);
  };
  for (int rep = 0; rep < 200; ++rep) {
    const auto m1 = rand_measure(rng2), m2 = rand_measure(rng2), m3 = rand_measure(rng2);
    const double d12 = wasserstein_atomic(m1, m2, BaseMetric::tilde).cost;
    const double d21 = wasserstein_atomic(m2, m1, BaseMetric::tilde).cost;
    if (d12 != d21) r.pass = false;  // exact symmetry
    const double d13 = wasserstein_atomic(m1, m3, BaseMetric::tilde).cost;
    const double d23 = wasserstein_atomic(m2, m3, BaseMetric::tilde).cost;
    worst = std::max(worst, d13 - (d12 + d23));
    worst = std::max(worst, -d12);
    const double self = wasserstein_atomic(m1, m1, BaseMetric::tilde).cost;
    worst = std::max(worst, std::abs(self));
  }
  if (worst > 1e-9) r.pass = false;
  r.measured = worst;
  r.detail = "worst violation " + fmt(worst);
  return r;
}

// Criterion 8: cumulant limit with quadratic phi on uniform 2-point
// endpoints; MC within 3 standard errors; KS time marginal at level 0.001.
CriterionResult cumulant_limit_check(std::uint64_t seed) {
  CriterionResult r{"bridge", "cumulant-limit", true, 0.0, 0.0, ""};
  auto a = make_alphabet({{"a", {-1.0}}, {"b", {1.0}}});
  const CylinderFunctional phi = CylinderFunctional::quadratic(0.5, 0.5);
  Grid2<double> w(2, 2, 0.2);
  w(0, 0) = 0.3;
  w(1, 1) = 0.3;
  PairMeasure law(a, w);  // uniform endpoint marginals
  std::vector<std::vector<EndpointPair>> arrays;
  for (int n : {8, 32, 128}) arrays.push_back(apportioned_endpoint_pairs(law, n));
  const auto rows = cumulant_convergence_table(arrays, law, 1.0, 1.0, phi);
  if (!(rows[1].gap < rows[0].gap && rows[2].gap < rows[1].gap)) r.pass = false;
  r.measured = rows[2].gap;

  RngHandle rng(seed, 3003);
  const auto est = cumulant_fixed_n(arrays[2], 1.0, 1.0, phi, 10000, rng);
  if (std::abs(est.mc - est.exact) > 3.0 * est.mc_stderr) r.pass = false;

  // KS of the midpoint marginal over 1e4 pinned paths
  auto fl = FirstLayerSampler::fixed(IndexedSample(a, {0, 1}));
  TimeGrid grid = TimeGrid::regular(1.0, 8);
  std::vector<double> vals;
  RngHandle rng2(seed, 3004);
  while (vals.size() < 10000) {
    const auto ens = sample_ensemble(fl, 1.0, grid, 2, rng2);
    for (int i = 0; i < 2; ++i) {
      if (ens.endpoints.at(i) == 0 && ens.sigma(i) != i) {
        vals.push_back(ens.paths[i](4, 0));
        break;
      }
    }
  }
  BridgeSpec spec(1.0, 1.0, {-1.0}, {1.0});
  const auto g = bridge_marginal(spec, 0.5);
  const auto ks = ks_test(vals, [&](double x) { return normal_cdf(x, g.mean[0], std::sqrt(g.variance)); });
  if (ks.p_value <= 0.001) r.pass = false;
  r.detail = "final gap " + fmt(rows[2].gap) + ", mc dev/se " +
             fmt(std::abs(est.mc - est.exact) / est.mc_stderr) + ", ks p " + fmt(ks.p_value);
  return r;
}

}  // namespace

std::vector<CriterionResult> verify_suite(const std::string& suite, std::uint64_t seed,
                                          bool inject_fault) {
  std::vector<CriterionResult> out;
  const bool all = suite == "all";
  if (suite == "oracle" || all) {
    out.push_back(oracle_equivalence(inject_fault));
    out.push_back(lemma4_exactness());
    out.push_back(two_layer_composition());
  }
  if (suite == "rate" || all) {
    out.push_back(rate_convergence());
    out.push_back(entropy_projection());
  }
  if (suite == "coupling" || all) {
    out.push_back(lemma3_in_law(seed));
    out.push_back(transport_correctness(seed));
  }
  if (suite == "bridge" || all) {
    out.push_back(cumulant_limit_check(seed));
  }
  if (out.empty()) throw DomainError("unknown suite: " + suite);
  return out;
}

std::string report_csv(const std::vector<CriterionResult>& rows) {
  std::ostringstream os;
  os << "suite,criterion,pass,measured,threshold,detail\n";
  for (const auto& r : rows) {
    std::string detail = r.detail;
    for (char& c : detail)
      if (c == ',') c = ';';
    os << r.suite << ',' << r.id << ',' << (r.pass ? 1 : 0) << ',' << fmt(r.measured) << ','
       << fmt(r.threshold) << ',' << detail << '\n';
  }
  return os.str();
}

std::string report_json(const std::vector<CriterionResult>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"suite", r.suite},
                       {"criterion", r.id},
                       {"pass", r.pass},
                       {"measured", r.measured},
                       {"threshold", r.threshold},
                       {"detail", r.detail}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace symld::cli
