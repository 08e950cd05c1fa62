#include "symld/measure.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "symld/errors.hpp"
#include "symld/permutation.hpp"

namespace symld {

namespace {

constexpr double kMassTol = 1e-12;

void check_weights(const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) {
    if (x < 0.0) throw DomainError("negative weight");
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTol) throw DomainError("weights must sum to 1");
}

}  // namespace

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->size() != b->size()) return false;
  for (int i = 0; i < a->size(); ++i) {
    if (a->point(i).id != b->point(i).id) return false;
  }
  return true;
}

DiscreteMeasure::DiscreteMeasure(AlphabetPtr alphabet, std::vector<double> weights)
    : alphabet_(std::move(alphabet)), weights_(std::move(weights)) {
  if (!alphabet_) throw DomainError("null alphabet");
  if (static_cast<int>(weights_.size()) != alphabet_->size()) {
    throw DomainError("weight vector length must match alphabet size");
  }
  check_weights(weights_);
}

DiscreteMeasure DiscreteMeasure::from_counts(AlphabetPtr alphabet, std::vector<std::int64_t> counts) {
  if (!alphabet) throw DomainError("null alphabet");
  if (static_cast<int>(counts.size()) != alphabet->size()) {
    throw DomainError("count vector length must match alphabet size");
  }
  std::int64_t n = 0;
  for (auto c : counts) {
    if (c < 0) throw DomainError("negative count");
    n += c;
  }
  if (n == 0) throw DomainError("counts must not all be zero");
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = static_cast<double>(counts[i]) / n;
  DiscreteMeasure m(std::move(alphabet), std::move(w));
  m.exact_ = ExactWeights{std::move(counts), n};
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform(AlphabetPtr alphabet) {
  std::vector<std::int64_t> c(alphabet->size(), 1);
  return from_counts(std::move(alphabet), std::move(c));
}

DiscreteMeasure DiscreteMeasure::dirac(AlphabetPtr alphabet, int point) {
  std::vector<std::int64_t> c(alphabet->size(), 0);
  c.at(point) = 1;
  return from_counts(std::move(alphabet), std::move(c));
}

const ExactWeights& DiscreteMeasure::exact() const {
  if (!exact_) throw DomainError("measure has no exact representation");
  return *exact_;
}

Rational DiscreteMeasure::exact_weight(int i) const {
  const auto& e = exact();
  return Rational(e.counts[i], e.denominator);
}

PairMeasure::PairMeasure(AlphabetPtr alphabet, Grid2<double> weights)
    : alphabet_(std::move(alphabet)), weights_(std::move(weights)) {
  if (!alphabet_) throw DomainError("null alphabet");
  const int k = alphabet_->size();
  if (weights_.rows != k || weights_.cols != k) {
    throw DomainError("pair weight grid must be k x k");
  }
  check_weights(weights_.v);
}

PairMeasure PairMeasure::from_counts(AlphabetPtr alphabet, Grid2<std::int64_t> counts) {
  if (!alphabet) throw DomainError("null alphabet");
  const int k = alphabet->size();
  if (counts.rows != k || counts.cols != k) throw DomainError("count grid must be k x k");
  std::int64_t n = 0;
  for (auto c : counts.v) {
    if (c < 0) throw DomainError("negative count");
    n += c;
  }
  if (n == 0) throw DomainError("counts must not all be zero");
  Grid2<double> w(k, k, 0.0);
  for (std::size_t i = 0; i < counts.v.size(); ++i) w.v[i] = static_cast<double>(counts.v[i]) / n;
  PairMeasure m(std::move(alphabet), std::move(w));
  m.exact_counts_ = std::move(counts);
  m.exact_denominator_ = n;
  return m;
}

const Grid2<std::int64_t>& PairMeasure::exact_counts() const {
  if (!exact_counts_) throw DomainError("pair measure has no exact representation");
  return *exact_counts_;
}

std::int64_t PairMeasure::exact_denominator() const {
  if (!exact_counts_) throw DomainError("pair measure has no exact representation");
  return exact_denominator_;
}

Rational PairMeasure::exact_weight(int i, int j) const {
  return Rational(exact_counts()(i, j), exact_denominator_);
}

IndexedSample::IndexedSample(AlphabetPtr alphabet, std::vector<int> indices)
    : alphabet_(std::move(alphabet)), indices_(std::move(indices)) {
  if (!alphabet_) throw DomainError("null alphabet");
  if (indices_.empty()) throw DomainError("sample must be nonempty");
  for (int i : indices_) {
    if (i < 0 || i >= alphabet_->size()) throw DomainError("sample index outside alphabet");
  }
}

std::vector<std::int64_t> IndexedSample::counts() const {
  std::vector<std::int64_t> c(alphabet_->size(), 0);
  for (int i : indices_) ++c[i];
  return c;
}

DiscreteMeasure empirical_of(const IndexedSample& sample) {
  return DiscreteMeasure::from_counts(sample.alphabet(), sample.counts());
}

PairMeasure pair_empirical(const IndexedSample& sample, const Permutation& perm) {
  const int n = sample.size();
  if (perm.size() != n) throw DomainError("permutation length must equal sample length");
  const int k = sample.alphabet()->size();
  Grid2<std::int64_t> counts(k, k, 0);
  for (int i = 0; i < n; ++i) ++counts(sample.at(i), sample.at(perm(i)));
  return PairMeasure::from_counts(sample.alphabet(), std::move(counts));
}

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const PairMeasure& nu) {
  const int k = nu.size();
  if (nu.has_exact()) {
    std::vector<std::int64_t> row(k, 0), col(k, 0);
    const auto& c = nu.exact_counts();
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        row[i] += c(i, j);
        col[j] += c(i, j);
      }
    return {DiscreteMeasure::from_counts(nu.alphabet(), std::move(row)),
            DiscreteMeasure::from_counts(nu.alphabet(), std::move(col))};
  }
  std::vector<double> row(k, 0.0), col(k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      row[i] += nu.weight(i, j);
      col[j] += nu.weight(i, j);
    }
  return {DiscreteMeasure(nu.alphabet(), std::move(row)), DiscreteMeasure(nu.alphabet(), std::move(col))};
}

PairMeasure product(const DiscreteMeasure& mu, const DiscreteMeasure& rho) {
  if (!same_alphabet(mu.alphabet(), rho.alphabet())) throw DomainError("product: alphabet mismatch");
  const int k = mu.size();
  Grid2<double> w(k, k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) w(i, j) = mu.weight(i) * rho.weight(j);
  // renormalize away the last-ulp drift so the ctor invariant holds exactly
  double total = 0.0;
  for (double x : w.v) total += x;
  if (total > 0) {
    for (double& x : w.v) x /= total;
  }
  return PairMeasure(mu.alphabet(), std::move(w));
}

namespace {

double rel_entropy_impl(const std::vector<double>& nu, const std::vector<double>& rho) {
  if (nu.size() != rho.size()) throw DomainError("relative_entropy: index sets differ");
  double h = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] <= 0.0) continue;  // 0 log 0 = 0
    if (rho[i] <= 0.0) return std::numeric_limits<double>::infinity();
    h += nu[i] * std::log(nu[i] / rho[i]);
  }
  return h < 0.0 ? 0.0 : h;
}

}  // namespace

double relative_entropy(const DiscreteMeasure& nu, const DiscreteMeasure& rho) {
  return rel_entropy_impl(nu.weights(), rho.weights());
}

double relative_entropy(const PairMeasure& nu, const PairMeasure& rho) {
  return rel_entropy_impl(nu.weights().v, rho.weights().v);
}

}  // namespace symld
