#include "symld/sampler.hpp"

#include <map>

#include "symld/errors.hpp"

namespace symld {

FirstLayerSampler FirstLayerSampler::fixed(IndexedSample sample) {
  FirstLayerSampler s;
  s.fixed_ = std::move(sample);
  return s;
}

FirstLayerSampler FirstLayerSampler::iid(DiscreteMeasure law) {
  FirstLayerSampler s;
  s.law_ = std::move(law);
  return s;
}

const AlphabetPtr& FirstLayerSampler::alphabet() const {
  return fixed_ ? fixed_->alphabet() : law_->alphabet();
}

const IndexedSample& FirstLayerSampler::fixed_sample() const {
  if (!fixed_) throw DomainError("sampler is not in fixed mode");
  return *fixed_;
}

IndexedSample FirstLayerSampler::draw(int n, RngHandle& rng) const {
  if (fixed_) {
    if (n != fixed_->size()) throw DomainError("fixed first layer requires n == sample size");
    return *fixed_;
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = sample_point(*law_, rng);
  return IndexedSample(law_->alphabet(), std::move(idx));
}

int sample_point(const DiscreteMeasure& law, RngHandle& rng) {
  if (law.has_exact()) {
    const auto& e = law.exact();
    std::int64_t u = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(e.denominator)));
    for (int i = 0; i < law.size(); ++i) {
      if (u < e.counts[i]) return i;
      u -= e.counts[i];
    }
    return law.size() - 1;  // unreachable for valid counts
  }
  const double u = rng.next_unit();
  double acc = 0.0;
  for (int i = 0; i < law.size(); ++i) {
    acc += law.weight(i);
    if (u < acc) return i;
  }
  return law.size() - 1;
}

PairMeasure sample_sym_pairs(const IndexedSample& sample, RngHandle& rng) {
  return pair_empirical(sample, sample_permutation(sample.size(), rng));
}

PairAtoms sample_iid_pairs(const DiscreteMeasure& mu_n, int n, RngHandle& rng) {
  if (n < 1) throw DomainError("n must be >= 1");
  PairAtoms out{mu_n.alphabet(), {}};
  out.atoms.reserve(n);
  // 2n mutually independent coordinates, left block first
  std::vector<int> left(n);
  for (int i = 0; i < n; ++i) left[i] = sample_point(mu_n, rng);
  for (int i = 0; i < n; ++i) out.atoms.emplace_back(left[i], sample_point(mu_n, rng));
  return out;
}

PairMeasure sample_two_layer(const FirstLayerSampler& layer1, int n, RngHandle& rng) {
  const IndexedSample x = layer1.draw(n, rng);
  return sample_sym_pairs(x, rng);
}

LawEqualityReport law_equality_test(const TableGenerator& gen_a, const TableGenerator& gen_b,
                                    std::int64_t draws, RngHandle& rng) {
  if (draws < 1) throw DomainError("draws must be >= 1");
  std::map<PairTypeTable, std::pair<std::int64_t, std::int64_t>> hist;
  for (std::int64_t d = 0; d < draws; ++d) ++hist[gen_a(rng)].first;
  for (std::int64_t d = 0; d < draws; ++d) ++hist[gen_b(rng)].second;
  LawEqualityReport rep;
  for (const auto& [table, c] : hist) {
    rep.cells.push_back(table);
    rep.counts_a.push_back(c.first);
    rep.counts_b.push_back(c.second);
  }
  rep.chi = chi_square_homogeneity(rep.counts_a, rep.counts_b);
  return rep;
}

}  // namespace symld
