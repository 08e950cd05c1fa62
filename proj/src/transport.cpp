#include "symld/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "symld/errors.hpp"
#include "symld/lp.hpp"
#include "symld/rng.hpp"

namespace symld {

namespace {

constexpr double kTieTol = 1e-12;

const std::vector<Permutation>& cached_perms(int n) {
  static std::vector<std::vector<Permutation>> cache(9);
  if (n < 1 || n > 8) throw CapError("permutation enumeration is capped at n <= 8");
  if (cache[n].empty()) cache[n] = all_permutations(n);
  return cache[n];
}

}  // namespace

double point_metric(const Alphabet& a, int x, int y, BaseMetric base) {
  return base == BaseMetric::plain ? a.distance(x, y) : a.tilde(x, y);
}

double pair_metric(const Alphabet& a, std::pair<int, int> p, std::pair<int, int> q, PairMode mode,
                   BaseMetric base) {
  const double d1 = point_metric(a, p.first, q.first, base);
  const double d2 = point_metric(a, p.second, q.second, base);
  return mode == PairMode::max ? std::max(d1, d2) : d1 + d2;
}

std::pair<std::vector<int>, double> solve_assignment(const Grid2<double>& cost) {
  const int n = cost.rows;
  if (n != cost.cols || n == 0) throw DomainError("assignment requires a square nonempty cost matrix");
  const double kInf = std::numeric_limits<double>::infinity();
  // shortest augmenting path with potentials, 1-based scratch arrays
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    row_to_col[p[j] - 1] = j - 1;
    total += cost(p[j] - 1, j - 1);
  }
  return {std::move(row_to_col), total};
}

WassersteinResult transport_dense(const std::vector<double>& source, const std::vector<double>& target,
                                  const Grid2<double>& cost) {
  const int m = static_cast<int>(source.size());
  const int n = static_cast<int>(target.size());
  if (cost.rows != m || cost.cols != n) throw DomainError("cost matrix shape mismatch");
  double sa = 0.0, sb = 0.0;
  for (double x : source) {
    if (x < 0) throw DomainError("negative source mass");
    sa += x;
  }
  for (double x : target) {
    if (x < 0) throw DomainError("negative target mass");
    sb += x;
  }
  if (std::abs(sa - sb) > 1e-9) throw DomainError("transport requires equal total mass");

  // strip zero atoms
  std::vector<int> ra, cb;
  for (int i = 0; i < m; ++i)
    if (source[i] > 0) ra.push_back(i);
  for (int j = 0; j < n; ++j)
    if (target[j] > 0) cb.push_back(j);
  const int mr = static_cast<int>(ra.size());
  const int nr = static_cast<int>(cb.size());
  if (mr == 0) throw DomainError("transport of the zero measure");

  struct Cell {
    int r, c;
    double flow;
  };
  std::vector<Cell> basis;
  basis.reserve(mr + nr - 1);
  {
    // northwest corner initial basic feasible solution
    std::vector<double> rest_a(mr), rest_b(nr);
    for (int i = 0; i < mr; ++i) rest_a[i] = source[ra[i]];
    for (int j = 0; j < nr; ++j) rest_b[j] = target[cb[j]];
    int i = 0, j = 0;
    while (true) {
      const double f = std::min(rest_a[i], rest_b[j]);
      basis.push_back({i, j, f});
      rest_a[i] -= f;
      rest_b[j] -= f;
      if (i == mr - 1 && j == nr - 1) break;
      if (rest_a[i] <= 1e-15 && i < mr - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::vector<double> u(mr), v(nr);
  auto reduced_cost = [&](int i, int j) { return cost(ra[i], cb[j]) - u[i] - v[j]; };

  const int cap = 100000;
  int iter = 0;
  for (; iter < cap; ++iter) {
    // potentials from the basis tree (nodes: rows 0..mr-1, cols mr..mr+nr-1)
    std::vector<std::vector<int>> adj(mr + nr);
    for (int b = 0; b < static_cast<int>(basis.size()); ++b) {
      adj[basis[b].r].push_back(b);
      adj[mr + basis[b].c].push_back(b);
    }
    {
      std::vector<char> seen(mr + nr, 0);
      std::queue<int> q;
      u[0] = 0.0;
      seen[0] = 1;
      q.push(0);
      while (!q.empty()) {
        const int node = q.front();
        q.pop();
        for (int b : adj[node]) {
          const int other = (node < mr) ? mr + basis[b].c : basis[b].r;
          if (seen[other]) continue;
          seen[other] = 1;
          if (other >= mr) {
            v[other - mr] = cost(ra[basis[b].r], cb[basis[b].c]) - u[basis[b].r];
          } else {
            u[other] = cost(ra[basis[b].r], cb[basis[b].c]) - v[basis[b].c];
          }
          q.push(other);
        }
      }
      for (char s : seen)
        if (!s) throw ConvergenceError("transport basis lost connectivity", {});
    }

    // Bland: first cell with negative reduced cost
    int ei = -1, ej = -1;
    for (int i = 0; i < mr && ei < 0; ++i) {
      for (int j = 0; j < nr; ++j) {
        if (reduced_cost(i, j) < -kTieTol) {
          bool in_basis = false;
          for (const auto& b : basis) {
            if (b.r == i && b.c == j) {
              in_basis = true;
              break;
            }
          }
          if (!in_basis) {
            ei = i;
            ej = j;
            break;
          }
        }
      }
    }
    if (ei < 0) break;  // optimal

    // unique path in the basis tree from row node ei to col node ej
    std::vector<int> parent_edge(mr + nr, -1), parent_node(mr + nr, -1);
    {
      std::vector<std::vector<int>> adj(mr + nr);
      for (int b = 0; b < static_cast<int>(basis.size()); ++b) {
        adj[basis[b].r].push_back(b);
        adj[mr + basis[b].c].push_back(b);
      }
      std::vector<char> seen(mr + nr, 0);
      std::queue<int> q;
      seen[ei] = 1;
      q.push(ei);
      while (!q.empty()) {
        const int node = q.front();
        q.pop();
        for (int b : adj[node]) {
          const int other = (node < mr) ? mr + basis[b].c : basis[b].r;
          if (seen[other]) continue;
          seen[other] = 1;
          parent_edge[other] = b;
          parent_node[other] = node;
          q.push(other);
        }
      }
    }
    std::vector<int> path;  // basis edge indices from col ej back to row ei
    for (int node = mr + ej; node != ei; node = parent_node[node]) {
      if (parent_edge[node] < 0) throw ConvergenceError("transport cycle search failed", {});
      path.push_back(parent_edge[node]);
    }
    std::reverse(path.begin(), path.end());
    // signs alternate along the cycle: entering +, first path edge -, ...
    double theta = std::numeric_limits<double>::infinity();
    int leave_pos = -1;
    for (std::size_t s = 0; s < path.size(); s += 2) {
      const double f = basis[path[s]].flow;
      if (f < theta - kTieTol ||
          (f < theta + kTieTol &&
           (leave_pos < 0 || basis[path[s]].r * nr + basis[path[s]].c <
                                 basis[path[leave_pos]].r * nr + basis[path[leave_pos]].c))) {
        theta = f;
        leave_pos = static_cast<int>(s);
      }
    }
    if (leave_pos < 0) throw ConvergenceError("transport pivot failed", {});
    for (std::size_t s = 0; s < path.size(); ++s) {
      basis[path[s]].flow += (s % 2 == 0) ? -theta : theta;
    }
    const int leave_edge = path[leave_pos];
    basis[leave_edge] = Cell{ei, ej, theta};
  }
  if (iter >= cap) throw ConvergenceError("transport simplex iteration cap exceeded", {});

  WassersteinResult res;
  res.plan.mass = Grid2<double>(m, n, 0.0);
  res.plan.source = source;
  res.plan.target = target;
  res.source_potential.assign(m, 0.0);
  res.target_potential.assign(n, 0.0);
  double total_cost = 0.0;
  for (const auto& b : basis) {
    res.plan.mass(ra[b.r], cb[b.c]) += b.flow;
    total_cost += b.flow * cost(ra[b.r], cb[b.c]);
  }
  for (int i = 0; i < mr; ++i) res.source_potential[ra[i]] = u[i];
  for (int j = 0; j < nr; ++j) res.target_potential[cb[j]] = v[j];
  res.cost = total_cost;

  // margin invariant
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += res.plan.mass(i, j);
    if (std::abs(s - source[i]) > 1e-10) throw ConvergenceError("plan row margin drift", {s - source[i]});
  }
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += res.plan.mass(i, j);
    if (std::abs(s - target[j]) > 1e-10) throw ConvergenceError("plan column margin drift", {s - target[j]});
  }
  return res;
}

namespace {

// canonical argument order makes the metric exactly symmetric
bool lex_before(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

WassersteinResult transport_symmetric(const std::vector<double>& a, const std::vector<double>& b,
                                      const Grid2<double>& cost) {
  if (lex_before(b, a)) {
    Grid2<double> tcost(cost.cols, cost.rows, 0.0);
    for (int i = 0; i < cost.rows; ++i)
      for (int j = 0; j < cost.cols; ++j) tcost(j, i) = cost(i, j);
    WassersteinResult r = transport_dense(b, a, tcost);
    WassersteinResult out;
    out.cost = r.cost;
    out.plan.source = a;
    out.plan.target = b;
    out.plan.mass = Grid2<double>(cost.rows, cost.cols, 0.0);
    for (int i = 0; i < cost.rows; ++i)
      for (int j = 0; j < cost.cols; ++j) out.plan.mass(i, j) = r.plan.mass(j, i);
    out.source_potential = r.target_potential;
    out.target_potential = r.source_potential;
    return out;
  }
  return transport_dense(a, b, cost);
}

}  // namespace

WassersteinResult wasserstein_atomic(const DiscreteMeasure& rho, const DiscreteMeasure& nu,
                                     BaseMetric ground) {
  if (!same_alphabet(rho.alphabet(), nu.alphabet())) throw DomainError("alphabet mismatch");
  const int k = rho.size();
  Grid2<double> cost(k, k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cost(i, j) = point_metric(*rho.alphabet(), i, j, ground);
  return transport_symmetric(rho.weights(), nu.weights(), cost);
}

WassersteinResult wasserstein_atomic(const PairMeasure& rho, const PairMeasure& nu, PairMode mode,
                                     BaseMetric base) {
  if (!same_alphabet(rho.alphabet(), nu.alphabet())) throw DomainError("alphabet mismatch");
  const int k = rho.size();
  const int cells = k * k;
  Grid2<double> cost(cells, cells, 0.0);
  const Alphabet& a = *rho.alphabet();
  for (int p = 0; p < cells; ++p)
    for (int q = 0; q < cells; ++q)
      cost(p, q) = pair_metric(a, {p / k, p % k}, {q / k, q % k}, mode, base);
  return transport_symmetric(rho.weights().v, nu.weights().v, cost);
}

namespace {

double bl_on_support(const std::vector<double>& w, const std::vector<int>& support,
                     const std::function<double(int, int)>& metric) {
  // maximize sum_s h_s w_s with 0 <= h_s <= s_var, |h_i - h_j| <= L metric,
  // s_var + 2L <= 2 (f = h - s_var/2 has ||f||_inf + ||f||_Lip <= 1).
  const int m = static_cast<int>(support.size());
  if (m <= 1) return 0.0;
  const int nvar = m + 2;  // h..., s, L
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    std::vector<double> r(nvar, 0.0);
    r[i] = 1.0;
    r[m] = -1.0;
    rows.push_back(std::move(r));
    rhs.push_back(0.0);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<double> r(nvar, 0.0);
      r[i] = 1.0;
      r[j] = -1.0;
      r[m + 1] = -metric(support[i], support[j]);
      rows.push_back(std::move(r));
      rhs.push_back(0.0);
    }
  {
    std::vector<double> r(nvar, 0.0);
    r[m] = 1.0;
    r[m + 1] = 2.0;
    rows.push_back(std::move(r));
    rhs.push_back(2.0);
  }
  LpProblem p;
  p.c.assign(nvar, 0.0);
  for (int i = 0; i < m; ++i) p.c[i] = w[support[i]];
  p.a_ub = Grid2<double>(static_cast<int>(rows.size()), nvar, 0.0);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i)
    for (int j = 0; j < nvar; ++j) p.a_ub(i, j) = rows[i][j];
  p.b_ub = rhs;
  const LpSolution s = solve_lp(p);
  if (s.status != LpStatus::optimal) throw ConvergenceError("bl_distance LP did not solve", {});
  return std::max(0.0, s.value);
}

}  // namespace

double bl_distance(const DiscreteMeasure& rho, const DiscreteMeasure& nu, BaseMetric ground) {
  if (!same_alphabet(rho.alphabet(), nu.alphabet())) throw DomainError("alphabet mismatch");
  const int k = rho.size();
  std::vector<double> w(k);
  std::vector<int> support;
  for (int i = 0; i < k; ++i) {
    w[i] = rho.weight(i) - nu.weight(i);
    if (rho.weight(i) > 0 || nu.weight(i) > 0) support.push_back(i);
  }
  const Alphabet& a = *rho.alphabet();
  return bl_on_support(w, support, [&](int i, int j) { return point_metric(a, i, j, ground); });
}

double bl_distance(const PairMeasure& rho, const PairMeasure& nu, PairMode mode, BaseMetric base) {
  if (!same_alphabet(rho.alphabet(), nu.alphabet())) throw DomainError("alphabet mismatch");
  const int k = rho.size();
  const int cells = k * k;
  std::vector<double> w(cells);
  std::vector<int> support;
  for (int p = 0; p < cells; ++p) {
    w[p] = rho.weights().v[p] - nu.weights().v[p];
    if (rho.weights().v[p] > 0 || nu.weights().v[p] > 0) support.push_back(p);
  }
  const Alphabet& a = *rho.alphabet();
  return bl_on_support(w, support, [&](int p, int q) {
    return pair_metric(a, {p / k, p % k}, {q / k, q % k}, mode, base);
  });
}

AssignmentResult assignment_between(const IndexedSample& u, const IndexedSample& x, BaseMetric ground) {
  if (!same_alphabet(u.alphabet(), x.alphabet())) throw DomainError("alphabet mismatch");
  const int n = u.size();
  if (x.size() != n) throw DomainError("samples must have equal length");
  Grid2<double> cost(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = point_metric(*u.alphabet(), u.at(i), x.at(j), ground);
  auto [map, total] = solve_assignment(cost);
  // multiple optima: forbid each matched edge in turn and re-solve
  bool multiple = false;
  const double kInf = 1e18;
  for (int i = 0; i < n && !multiple; ++i) {
    Grid2<double> c2 = cost;
    c2(i, map[i]) = kInf;
    auto [m2, t2] = solve_assignment(c2);
    (void)m2;
    if (t2 < kInf / 2 && std::abs(t2 - total) <= kTieTol * (1.0 + std::abs(total))) multiple = true;
  }
  return AssignmentResult{Permutation(map), total / n, multiple};
}

PairMeasure atoms_measure(const PairAtoms& a) {
  const int k = a.alphabet->size();
  Grid2<std::int64_t> counts(k, k, 0);
  if (a.atoms.empty()) throw DomainError("empty atom list");
  for (auto [p, q] : a.atoms) {
    if (p < 0 || p >= k || q < 0 || q >= k) throw DomainError("atom outside alphabet");
    ++counts(p, q);
  }
  return PairMeasure::from_counts(a.alphabet, std::move(counts));
}

PairAtoms table_atoms(AlphabetPtr alphabet, const PairTypeTable& t) {
  PairAtoms out{std::move(alphabet), {}};
  for (int i = 0; i < t.cells.rows; ++i)
    for (int j = 0; j < t.cells.cols; ++j)
      for (std::int64_t c = 0; c < t.cells(i, j); ++c) out.atoms.emplace_back(i, j);
  return out;
}

double pair_atoms_distance(const PairAtoms& a, const PairAtoms& b) {
  if (!same_alphabet(a.alphabet, b.alphabet)) throw DomainError("alphabet mismatch");
  const int n = static_cast<int>(a.atoms.size());
  if (static_cast<int>(b.atoms.size()) != n || n == 0) throw DomainError("atom counts must match");
  Grid2<double> cost(n, n, 0.0);
  const Alphabet& al = *a.alphabet;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = pair_metric(al, a.atoms[i], b.atoms[j], PairMode::sum, BaseMetric::tilde);
  return solve_assignment(cost).second / n;
}

SymSet::SymSet(IndexedSample sample) : sample_(std::move(sample)) {}

const std::vector<SymSet::Element>& SymSet::elements() const {
  if (!elements_) {
    const int n = sample_.size();
    if (n > 8) throw CapError("sym set enumeration is capped at n <= 8");
    std::map<PairTypeTable, std::int64_t> seen;
    for (const auto& perm : cached_perms(n)) {
      const PairMeasure m = pair_empirical(sample_, perm);
      ++seen[PairTypeTable{m.exact_counts()}];
    }
    std::vector<Element> out;
    out.reserve(seen.size());
    for (auto& [t, mult] : seen) out.push_back({t, mult});
    elements_ = std::move(out);
  }
  return *elements_;
}

std::vector<int> extremal_assignment_uniform(const Grid2<double>& cost, bool maximize, RngHandle& rng) {
  const int n = cost.rows;
  if (n != cost.cols || n == 0) throw DomainError("square cost matrix required");
  if (n <= 8) {
    const auto& perms = cached_perms(n);
    double best = maximize ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    std::vector<double> costs(perms.size());
    for (std::size_t p = 0; p < perms.size(); ++p) {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += cost(i, perms[p].map[i]);
      costs[p] = c;
      if (maximize ? c > best : c < best) best = c;
    }
    std::vector<std::uint32_t> ties;
    for (std::size_t p = 0; p < perms.size(); ++p) {
      if (std::abs(costs[p] - best) <= kTieTol * (1.0 + std::abs(best))) {
        ties.push_back(static_cast<std::uint32_t>(p));
      }
    }
    const auto pick = ties[rng.next_below(ties.size())];
    return perms[pick].map;
  }
  // random infinitesimal perturbation, then one exact solve
  Grid2<double> c2 = cost;
  double scale = 0.0;
  for (double v : cost.v) scale = std::max(scale, std::abs(v));
  const double eps = 1e-12 * (scale > 0 ? scale : 1.0);
  for (double& v : c2.v) {
    const double delta = eps * rng.next_unit();
    v = maximize ? -(v + delta) : (v + delta);
  }
  return solve_assignment(c2).first;
}

namespace {

struct EtaCouple {
  Permutation left, right;
  double left_cost, right_cost;
};

EtaCouple eta_assignments(const PairAtoms& w, const SymSet& sym, bool maximize, RngHandle& rng) {
  const int n = sym.n();
  if (static_cast<int>(w.atoms.size()) != n) throw DomainError("atom count must equal sym set size");
  if (!same_alphabet(w.alphabet, sym.sample().alphabet())) throw DomainError("alphabet mismatch");
  const Alphabet& a = *w.alphabet;
  const IndexedSample& x = sym.sample();
  Grid2<double> cl(n, n, 0.0), cr(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cl(i, j) = a.tilde(w.atoms[i].first, x.at(j));
      cr(i, j) = a.tilde(w.atoms[i].second, x.at(j));
    }
  const std::vector<int> el = extremal_assignment_uniform(cl, maximize, rng);
  const std::vector<int> er = extremal_assignment_uniform(cr, maximize, rng);
  double lc = 0.0, rc = 0.0;
  for (int i = 0; i < n; ++i) {
    lc += cl(i, el[i]);
    rc += cr(i, er[i]);
  }
  return {Permutation(el), Permutation(er), lc / n, rc / n};
}

CoupleResult couple_impl(const PairAtoms& w, const SymSet& sym, bool maximize, RngHandle& rng) {
  const EtaCouple eta = eta_assignments(w, sym, maximize, rng);
  const int n = sym.n();
  const IndexedSample& x = sym.sample();
  PairAtoms out{w.alphabet, {}};
  out.atoms.reserve(n);
  for (int i = 0; i < n; ++i) out.atoms.emplace_back(x.at(eta.left(i)), x.at(eta.right(i)));
  CoupleResult res{atoms_measure(out), pair_atoms_distance(w, out)};
  return res;
}

}  // namespace

ProjectionToSym project_to_symset(const PairAtoms& gamma, const SymSet& sym, RngHandle& rng) {
  const EtaCouple eta = eta_assignments(gamma, sym, /*maximize=*/false, rng);
  const int n = sym.n();
  const IndexedSample& x = sym.sample();
  PairAtoms out{gamma.alphabet, {}};
  for (int i = 0; i < n; ++i) out.atoms.emplace_back(x.at(eta.left(i)), x.at(eta.right(i)));
  // atoms are (x_{left(i)}, x_{right(i)}), i.e. pair_empirical with the
  // permutation right o left^{-1} acting on sample positions
  Permutation rep = eta.right.compose(eta.left.inverse());
  return ProjectionToSym{atoms_measure(out), eta.left, eta.right, std::move(rep), eta.left_cost,
                         eta.right_cost};
}

CoupleResult couple_min(const PairAtoms& w, const SymSet& sym, RngHandle& rng) {
  return couple_impl(w, sym, /*maximize=*/false, rng);
}

CoupleResult couple_max(const PairAtoms& w, const SymSet& sym, RngHandle& rng) {
  return couple_impl(w, sym, /*maximize=*/true, rng);
}

std::pair<double, double> symset_distance_range(const PairAtoms& w, const SymSet& sym) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& el : sym.elements()) {
    const double d = pair_atoms_distance(w, table_atoms(w.alphabet, el.table));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

}  // namespace symld
