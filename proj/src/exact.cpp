#include "symld/exact.hpp"

#include <algorithm>
#include <cmath>

#include "symld/errors.hpp"

namespace symld {

MarginVector::MarginVector(std::vector<std::int64_t> c) : counts(std::move(c)) {
  if (counts.empty()) throw DomainError("margin vector must be nonempty");
  for (auto v : counts)
    if (v < 0) throw DomainError("margin counts must be nonnegative");
}

std::int64_t MarginVector::n() const {
  std::int64_t t = 0;
  for (auto v : counts) t += v;
  return t;
}

MarginVector PairTypeTable::row_margins() const {
  std::vector<std::int64_t> r(cells.rows, 0);
  for (int i = 0; i < cells.rows; ++i)
    for (int j = 0; j < cells.cols; ++j) r[i] += cells(i, j);
  return MarginVector(std::move(r));
}

MarginVector PairTypeTable::col_margins() const {
  std::vector<std::int64_t> c(cells.cols, 0);
  for (int i = 0; i < cells.rows; ++i)
    for (int j = 0; j < cells.cols; ++j) c[j] += cells(i, j);
  return MarginVector(std::move(c));
}

std::int64_t PairTypeTable::total() const {
  std::int64_t t = 0;
  for (auto v : cells.v) t += v;
  return t;
}

PairMeasure PairTypeTable::to_measure(AlphabetPtr alphabet) const {
  return PairMeasure::from_counts(std::move(alphabet), cells);
}

namespace {

void check_caps(const MarginVector& margins, const OracleCaps& caps) {
  if (margins.k() > caps.max_k) throw CapError("margin vector exceeds k cap");
  if (margins.n() > caps.max_n) throw CapError("margin vector exceeds n cap");
}

// Enumerate compositions of `remaining` into the row cells, bounded by the
// residual column margins, then recurse to the next row.
void enumerate_rows(const MarginVector& margins, int row, std::vector<std::int64_t>& colrest,
                    Grid2<std::int64_t>& work, std::int64_t& emitted, const OracleCaps& caps,
                    const std::function<void(const PairTypeTable&)>& fn) {
  const int k = margins.k();
  if (row == k) {
    if (++emitted > caps.max_tables) throw CapError("table enumeration exceeds cap");
    fn(PairTypeTable{work});
    return;
  }
  const std::int64_t need = margins.counts[row];
  // rows below this one can still absorb this much per column
  std::vector<std::int64_t> below(k, 0);
  {
    std::int64_t rows_left = 0;
    for (int r = row + 1; r < k; ++r) rows_left += margins.counts[r];
    for (int j = 0; j < k; ++j) below[j] = rows_left;
  }
  std::vector<std::int64_t> cell(k, 0);
  std::function<void(int, std::int64_t)> fill = [&](int j, std::int64_t rest) {
    if (j == k - 1) {
      if (rest > colrest[j] || colrest[j] - rest > below[j]) return;
      cell[j] = rest;
      for (int c = 0; c < k; ++c) {
        work(row, c) = cell[c];
        colrest[c] -= cell[c];
      }
      enumerate_rows(margins, row + 1, colrest, work, emitted, caps, fn);
      for (int c = 0; c < k; ++c) colrest[c] += cell[c];
      return;
    }
    const std::int64_t hi = std::min(rest, colrest[j]);
    const std::int64_t lo = std::max<std::int64_t>(0, colrest[j] - below[j]);
    (void)lo;  // pruning below via hi only; feasibility of later cols is checked at the leaf
    for (std::int64_t v = 0; v <= hi; ++v) {
      cell[j] = v;
      fill(j + 1, rest - v);
    }
  };
  fill(0, need);
}

}  // namespace

void for_each_table(const MarginVector& margins, const std::function<void(const PairTypeTable&)>& fn,
                    const OracleCaps& caps) {
  check_caps(margins, caps);
  const int k = margins.k();
  std::vector<std::int64_t> colrest = margins.counts;
  Grid2<std::int64_t> work(k, k, 0);
  std::int64_t emitted = 0;
  enumerate_rows(margins, 0, colrest, work, emitted, caps, fn);
}

std::vector<PairTypeTable> enumerate_tables(const MarginVector& margins, const OracleCaps& caps) {
  std::vector<PairTypeTable> out;
  for_each_table(margins, [&](const PairTypeTable& t) { out.push_back(t); }, caps);
  return out;
}

BigInt table_count(const MarginVector& margins, const PairTypeTable& m) {
  if (m.row_margins() != margins || m.col_margins() != margins) {
    throw DomainError("table margins do not match");
  }
  const int k = margins.k();
  BigInt count = 1;
  for (int l = 0; l < k; ++l) count *= factorial(static_cast<unsigned>(margins.counts[l]));
  for (int j = 0; j < k; ++j) {
    count *= factorial(static_cast<unsigned>(margins.counts[j]));
    for (int l = 0; l < k; ++l) count /= factorial(static_cast<unsigned>(m.cells(j, l)));
  }
  return count;
}

std::map<PairTypeTable, LogProb> exact_sym_law(const MarginVector& margins, const OracleCaps& caps) {
  const std::int64_t n = margins.n();
  const BigInt nfact = factorial(static_cast<unsigned>(n));
  std::map<PairTypeTable, LogProb> law;
  BigInt total = 0;
  for_each_table(
      margins,
      [&](const PairTypeTable& t) {
        const BigInt c = table_count(margins, t);
        total += c;
        Rational p(c, nfact);
        law.emplace(t, LogProb{std::log(to_double(p)), p});
      },
      caps);
  if (total != nfact) throw DomainError("internal: table counts do not sum to n!");
  return law;
}

PairTypeTable nearest_feasible_table(const Grid2<double>& target, const MarginVector& margins) {
  const int k = margins.k();
  if (target.rows != k || target.cols != k) throw DomainError("target shape mismatch");
  const std::int64_t n = margins.n();
  Grid2<double> raw(k, k, 0.0);
  Grid2<std::int64_t> m(k, k, 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      raw(i, j) = static_cast<double>(n) * target(i, j);
      m(i, j) = static_cast<std::int64_t>(std::floor(raw(i, j) + 1e-9));
    }
  // row repair by largest remainder, lexicographic ties
  for (int i = 0; i < k; ++i) {
    std::int64_t have = 0;
    for (int j = 0; j < k; ++j) have += m(i, j);
    std::vector<int> order(k);
    for (int j = 0; j < k; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return raw(i, a) - std::floor(raw(i, a) + 1e-9) > raw(i, b) - std::floor(raw(i, b) + 1e-9);
    });
    int idx = 0;
    while (have < margins.counts[i]) {
      ++m(i, order[idx % k]);
      ++have;
      ++idx;
    }
    while (have > margins.counts[i]) {
      // remove from the smallest remainder first
      for (int t = k - 1; t >= 0; --t) {
        if (m(i, order[t]) > 0) {
          --m(i, order[t]);
          --have;
          break;
        }
      }
    }
  }
  // column repair preserving row sums: move one unit at a time from an
  // oversubscribed column to an undersubscribed one, first row first
  for (;;) {
    std::vector<std::int64_t> col(k, 0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) col[j] += m(i, j);
    int lp = -1, lm = -1;
    for (int j = 0; j < k; ++j) {
      if (lp < 0 && col[j] < margins.counts[j]) lp = j;
      if (lm < 0 && col[j] > margins.counts[j]) lm = j;
    }
    if (lp < 0 && lm < 0) break;
    if (lp < 0 || lm < 0) throw DomainError("infeasible margins for target rounding");
    bool moved = false;
    for (int i = 0; i < k && !moved; ++i) {
      if (m(i, lm) > 0) {
        --m(i, lm);
        ++m(i, lp);
        moved = true;
      }
    }
    if (!moved) throw DomainError("infeasible margins for target rounding");
  }
  return PairTypeTable{std::move(m)};
}

double finite_n_rate(const PairMeasure& target, const DiscreteMeasure& mu, std::int64_t n) {
  if (!same_alphabet(target.alphabet(), mu.alphabet())) throw DomainError("alphabet mismatch");
  if (n < 1) throw DomainError("n must be >= 1");
  const int k = mu.size();
  std::vector<std::int64_t> c(k);
  for (int i = 0; i < k; ++i) {
    const double raw = static_cast<double>(n) * mu.weight(i);
    c[i] = std::llround(raw);
    if (std::abs(raw - static_cast<double>(c[i])) > 1e-9) {
      throw DomainError("n*mu must be integer valued");
    }
  }
  const MarginVector margins(std::move(c));
  const PairTypeTable m = nearest_feasible_table(target.weights(), margins);
  // log P = log count - log n!, via exact log-factorials
  double logp = -log_factorial(static_cast<unsigned>(n));
  for (int l = 0; l < k; ++l) logp += log_factorial(static_cast<unsigned>(margins.counts[l]));
  for (int j = 0; j < k; ++j) {
    logp += log_factorial(static_cast<unsigned>(margins.counts[j]));
    for (int l = 0; l < k; ++l) logp -= log_factorial(static_cast<unsigned>(m.cells(j, l)));
  }
  return -logp / static_cast<double>(n);
}

std::map<TwoLayerOutcome, LogProb> exact_two_layer_law(const DiscreteMeasure& m_law, std::int64_t n,
                                                       const OracleCaps& caps) {
  if (!m_law.has_exact()) throw DomainError("two-layer law needs exact rational first-layer weights");
  const int k = m_law.size();
  if (k > 4 || n > 12) throw CapError("two-layer law caps: k <= 4, n <= 12");

  std::map<TwoLayerOutcome, LogProb> law;
  Rational total = 0;
  // enumerate margin vectors: compositions of n into k nonnegative parts
  std::vector<std::int64_t> comp(k, 0);
  std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t rest) {
    if (pos == k - 1) {
      comp[pos] = rest;
      const MarginVector margins(comp);
      // multinomial probability of this margin under m_law
      Rational pm = Rational(factorial(static_cast<unsigned>(n)), 1);
      for (int j = 0; j < k; ++j) {
        pm /= Rational(factorial(static_cast<unsigned>(comp[j])), 1);
        Rational w = m_law.exact_weight(j);
        for (std::int64_t t = 0; t < comp[j]; ++t) pm *= w;
        if (comp[j] > 0 && w == 0) pm = 0;
      }
      if (pm != 0) {
        const BigInt nfact = factorial(static_cast<unsigned>(n));
        for_each_table(
            margins,
            [&](const PairTypeTable& t) {
              const Rational p = pm * Rational(table_count(margins, t), nfact);
              total += p;
              law.emplace(TwoLayerOutcome{margins, t}, LogProb{std::log(to_double(p)), p});
            },
            caps);
      }
      return;
    }
    for (std::int64_t v = 0; v <= rest; ++v) {
      comp[pos] = v;
      rec(pos + 1, rest - v);
    }
  };
  rec(0, n);
  if (total != 1) throw DomainError("internal: two-layer law mass is not 1");
  return law;
}

EmpiricalMatchProb empirical_match_prob(const MarginVector& margins) {
  const std::int64_t n = margins.n();
  if (n < 1) throw DomainError("empty margins");
  if (n > 300) throw CapError("empirical_match_prob: n too large for exact arithmetic");
  // multinomial(n; c) * prod (c_j/n)^{c_j}
  Rational p(factorial(static_cast<unsigned>(n)), 1);
  BigInt num = 1, den = 1;
  for (auto c : margins.counts) {
    p /= Rational(factorial(static_cast<unsigned>(c)), 1);
    for (std::int64_t t = 0; t < c; ++t) num *= c;
  }
  for (std::int64_t t = 0; t < n; ++t) den *= n;
  p *= Rational(num, den);
  Rational bound(factorial(static_cast<unsigned>(n)), den);
  return EmpiricalMatchProb{p, bound};
}

}  // namespace symld
