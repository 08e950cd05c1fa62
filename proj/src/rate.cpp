#include "symld/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symld/errors.hpp"
#include "symld/lp.hpp"

namespace symld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linf_gap(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double g = 0.0;
  for (int i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a.weight(i) - b.weight(i)));
  return g;
}

}  // namespace

RateOracle RateOracle::sanov(DiscreteMeasure m) {
  return RateOracle{[m = std::move(m)](const DiscreteMeasure& rho) { return relative_entropy(rho, m); }};
}

RateOracle RateOracle::indicator(DiscreteMeasure mu, double tol) {
  return RateOracle{[mu = std::move(mu), tol](const DiscreteMeasure& rho) {
    if (!same_alphabet(mu.alphabet(), rho.alphabet())) throw DomainError("alphabet mismatch");
    return linf_gap(rho, mu) <= tol ? 0.0 : kInf;
  }};
}

double rate_fixed_sample(const PairMeasure& nu, const DiscreteMeasure& mu, double marginal_tol) {
  if (!same_alphabet(nu.alphabet(), mu.alphabet())) throw DomainError("alphabet mismatch");
  auto [n1, n2] = marginals(nu);
  if (linf_gap(n1, mu) > marginal_tol || linf_gap(n2, mu) > marginal_tol) return kInf;
  return relative_entropy(nu, product(mu, mu));
}

double rate_two_layer(const PairMeasure& nu, const RateOracle& s, double marginal_tol) {
  auto [n1, n2] = marginals(nu);
  if (linf_gap(n1, n2) > marginal_tol) return kInf;
  const double first = s(n1);
  if (std::isinf(first)) return kInf;
  return first + relative_entropy(nu, product(n1, n1));
}

namespace {

// IPF both margins to r on the positive support of w; returns normalized q.
// Tolerance is on the L1 marginal error.
Grid2<double> ipf(const Grid2<double>& w, const std::vector<double>& r, double tol, int max_sweeps) {
  const int k = w.rows;
  Grid2<double> q = w;
  double total = 0.0;
  for (double v : q.v) total += v;
  if (total <= 0) throw DomainError("reference has no mass on the feasible support");
  for (double& v : q.v) v /= total;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += q(i, j);
      if (s > 0) {
        const double f = r[i] / s;
        for (int j = 0; j < k; ++j) q(i, j) *= f;
      } else if (r[i] > 0) {
        throw DomainError("marginal constraint infeasible on the reference support");
      }
    }
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += q(i, j);
      if (s > 0) {
        const double f = r[j] / s;
        for (int i = 0; i < k; ++i) q(i, j) *= f;
      } else if (r[j] > 0) {
        throw DomainError("marginal constraint infeasible on the reference support");
      }
    }
    // after a column pass, columns are exact; check rows
    double res = 0.0;
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += q(i, j);
      res += std::abs(s - r[i]);
    }
    if (res < tol) return q;
  }
  double res = 0.0;
  for (int i = 0; i < k; ++i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += q(i, j);
    res += std::abs(s - r[i]);
  }
  throw ConvergenceError("IPF did not reach the marginal tolerance", {res});
}

double observable_value(const Grid2<double>& q, const Grid2<double>& g) {
  double v = 0.0;
  for (std::size_t i = 0; i < q.v.size(); ++i) v += q.v[i] * g.v[i];
  return v;
}

// tilted reference exp-weights in a numerically safe way
Grid2<double> tilt(const Grid2<double>& ref, const std::vector<Observable>& obs,
                   const std::vector<double>& lambda) {
  const int k = ref.rows;
  Grid2<double> logw(k, k, -kInf);
  double maxlog = -kInf;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (ref(i, j) <= 0) continue;
      double lw = std::log(ref(i, j));
      for (std::size_t m = 0; m < obs.size(); ++m) lw += lambda[m] * obs[m].g(i, j);
      logw(i, j) = lw;
      maxlog = std::max(maxlog, lw);
    }
  Grid2<double> w(k, k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (ref(i, j) > 0) w(i, j) = std::exp(logw(i, j) - maxlog);
  return w;
}

struct FitState {
  Grid2<double> q;
  double marginal_residual;
};

FitState fit_given_lambda(const Grid2<double>& ref, const ConstraintSet& cs,
                          const std::vector<double>& lambda) {
  const int k = ref.rows;
  Grid2<double> w = tilt(ref, cs.observables, lambda);
  Grid2<double> q(k, k, 0.0);
  if (cs.common_marginal) {
    q = ipf(w, cs.common_marginal->weights(), 1e-11, 200000);
  } else {
    double total = 0.0;
    for (double v : w.v) total += v;
    if (total <= 0) throw DomainError("empty feasible support");
    q = w;
    for (double& v : q.v) v /= total;
  }
  // exact normalization, then measure the marginal drift it left behind
  double total = 0.0;
  for (double v : q.v) total += v;
  for (double& v : q.v) v /= total;
  double res = 0.0;
  if (cs.common_marginal) {
    for (int i = 0; i < k; ++i) {
      double rs = 0.0, csum = 0.0;
      for (int j = 0; j < k; ++j) {
        rs += q(i, j);
        csum += q(j, i);
      }
      res += std::abs(rs - cs.common_marginal->weight(i)) + std::abs(csum - cs.common_marginal->weight(i));
    }
  }
  return {std::move(q), res};
}

void feasibility_prepass(const PairMeasure& reference, const ConstraintSet& cs) {
  const int k = reference.size();
  std::vector<int> cells;
  for (int i = 0; i < k * k; ++i)
    if (reference.weights().v[i] > 0) cells.push_back(i);
  const int nv = static_cast<int>(cells.size());
  int neq = 1 + static_cast<int>(cs.observables.size());
  if (cs.common_marginal) neq += 2 * k;
  LpProblem p;
  p.c.assign(nv, 0.0);
  p.a_eq = Grid2<double>(neq, nv, 0.0);
  p.b_eq.assign(neq, 0.0);
  int row = 0;
  for (int v = 0; v < nv; ++v) p.a_eq(row, v) = 1.0;
  p.b_eq[row++] = 1.0;
  if (cs.common_marginal) {
    for (int i = 0; i < k; ++i) {
      for (int v = 0; v < nv; ++v)
        if (cells[v] / k == i) p.a_eq(row, v) = 1.0;
      p.b_eq[row++] = cs.common_marginal->weight(i);
    }
    for (int j = 0; j < k; ++j) {
      for (int v = 0; v < nv; ++v)
        if (cells[v] % k == j) p.a_eq(row, v) = 1.0;
      p.b_eq[row++] = cs.common_marginal->weight(j);
    }
  }
  for (const auto& ob : cs.observables) {
    for (int v = 0; v < nv; ++v) p.a_eq(row, v) = ob.g.v[cells[v]];
    p.b_eq[row++] = ob.target;
  }
  const LpSolution s = solve_lp(p);
  if (s.status != LpStatus::optimal) {
    throw DomainError("entropy_project: constraints are infeasible on the reference support");
  }
}

double entropy_against(const Grid2<double>& q, const Grid2<double>& ref) {
  double h = 0.0;
  for (std::size_t i = 0; i < q.v.size(); ++i) {
    if (q.v[i] <= 0) continue;
    if (ref.v[i] <= 0) return kInf;
    h += q.v[i] * std::log(q.v[i] / ref.v[i]);
  }
  return std::max(h, 0.0);
}

ProjectionResult project_tilt_ipf(const PairMeasure& reference, const ConstraintSet& cs) {
  feasibility_prepass(reference, cs);
  const auto& ref = reference.weights();
  const std::size_t m = cs.observables.size();
  std::vector<double> lambda(m, 0.0);
  FitState st = fit_given_lambda(ref, cs, lambda);
  int outer = 0;
  if (m > 0) {
    const double gap_tol = 1e-8;
    const int max_outer = 10000;
    bool done = false;
    for (outer = 0; outer < max_outer && !done; ++outer) {
      done = true;
      for (std::size_t ob = 0; ob < m; ++ob) {
        const double target = cs.observables[ob].target;
        auto gap_at = [&](double lam) {
          std::vector<double> l2 = lambda;
          l2[ob] = lam;
          return observable_value(fit_given_lambda(ref, cs, l2).q, cs.observables[ob].g) - target;
        };
        double lo = lambda[ob], hi = lambda[ob];
        double glo = gap_at(lo), ghi = glo;
        if (std::abs(glo) <= gap_tol) continue;
        done = false;
        // expand a bracket; E[g] is nondecreasing in the tilt parameter
        double step = 1.0;
        while (glo > 0 && lo > -1e4) {
          lo -= step;
          step *= 2;
          glo = gap_at(lo);
        }
        step = 1.0;
        while (ghi < 0 && hi < 1e4) {
          hi += step;
          step *= 2;
          ghi = gap_at(hi);
        }
        if (glo > 0 || ghi < 0) {
          throw ConvergenceError("entropy_project: observable target unreachable by the tilt family",
                                 {glo, ghi});
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * (1 + std::abs(lo)); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (gap_at(mid) < 0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        lambda[ob] = 0.5 * (lo + hi);
      }
    }
    st = fit_given_lambda(ref, cs, lambda);
    double worst = 0.0;
    for (std::size_t ob = 0; ob < m; ++ob) {
      worst = std::max(worst,
                       std::abs(observable_value(st.q, cs.observables[ob].g) - cs.observables[ob].target));
    }
    if (worst > 1e-8) {
      throw ConvergenceError("entropy_project: observable gap above tolerance", {worst});
    }
  }
  ProjectionResult out{PairMeasure(reference.alphabet(), st.q), 0.0, st.marginal_residual, 0.0, true,
                       outer};
  out.value = entropy_against(st.q, ref);
  for (std::size_t ob = 0; ob < m; ++ob) {
    out.observable_gap = std::max(
        out.observable_gap, std::abs(observable_value(st.q, cs.observables[ob].g) - cs.observables[ob].target));
  }
  return out;
}

double ball_distance(const PairMeasure& q, const BallConstraint& ball) {
  return wasserstein_atomic(q, ball.center, PairMode::sum, BaseMetric::tilde).cost;
}

// k = 2 with a common marginal: the feasible set is the one-parameter family
// nu_a = [[a, p-a], [p-a, 1-2p+a]]; grid scan plus local refinement.
ProjectionResult project_ball_k2(const PairMeasure& reference, const ConstraintSet& cs) {
  const auto& mu = *cs.common_marginal;
  const double p = mu.weight(0);
  const double lo = std::max(0.0, 2.0 * p - 1.0);
  const double hi = p;
  const auto& ball = *cs.ball;
  auto make = [&](double a) {
    Grid2<double> w(2, 2, 0.0);
    w(0, 0) = a;
    w(0, 1) = p - a;
    w(1, 0) = p - a;
    w(1, 1) = 1.0 - 2.0 * p + a;
    double total = w(0, 0) + w(0, 1) + w(1, 0) + w(1, 1);
    for (double& v : w.v) v = std::max(0.0, v / total);
    return PairMeasure(reference.alphabet(), w);
  };
  auto objective = [&](double a) { return entropy_against(make(a).weights(), reference.weights()); };
  auto feasible = [&](double a) { return ball_distance(make(a), ball) <= ball.radius + 1e-12; };

  const int grid = 20000;
  double best_a = std::numeric_limits<double>::quiet_NaN();
  double best_h = kInf;
  for (int g = 0; g <= grid; ++g) {
    const double a = lo + (hi - lo) * g / grid;
    if (!feasible(a)) continue;
    const double h = objective(a);
    if (h < best_h) {
      best_h = h;
      best_a = a;
    }
  }
  if (!(best_h < kInf)) {
    ProjectionResult out{reference, kInf, 0.0, 0.0, true, 0};
    return out;  // empty intersection: +inf with certified flag
  }
  // golden-section refinement inside the feasible window around the best cell
  const double step = (hi - lo) / grid;
  double a_lo = std::max(lo, best_a - step), a_hi = std::min(hi, best_a + step);
  for (int it = 0; it < 100; ++it) {
    const double m1 = a_lo + (a_hi - a_lo) * 0.382;
    const double m2 = a_lo + (a_hi - a_lo) * 0.618;
    const double f1 = feasible(m1) ? objective(m1) : kInf;
    const double f2 = feasible(m2) ? objective(m2) : kInf;
    if (f1 < f2) {
      a_hi = m2;
    } else {
      a_lo = m1;
    }
  }
  const double mid = 0.5 * (a_lo + a_hi);
  const double a_star = (feasible(mid) && objective(mid) < best_h) ? mid : best_a;
  PairMeasure q = make(a_star);
  ProjectionResult out{q, objective(a_star), 0.0, 0.0, true, 0};
  auto [m1, m2] = marginals(q);
  for (int i = 0; i < 2; ++i) {
    out.marginal_residual += std::abs(m1.weight(i) - mu.weight(i)) + std::abs(m2.weight(i) - mu.weight(i));
  }
  return out;
}

// penalty heuristic for ball constraints beyond the certified k = 2 family:
// margin-preserving 2x2 exchange descent on H + kappa * relu(beta - r)^2
ProjectionResult project_ball_penalty(const PairMeasure& reference, const ConstraintSet& cs) {
  const int k = reference.size();
  const auto& ball = *cs.ball;
  // start from the I-projection without the ball constraint
  ConstraintSet inner = cs;
  inner.ball.reset();
  ProjectionResult base = project_tilt_ipf(reference, inner);
  Grid2<double> q = base.minimizer.weights();

  auto penalized = [&](const Grid2<double>& w, double kappa) {
    const double h = entropy_against(w, reference.weights());
    PairMeasure m(reference.alphabet(), w);
    const double excess = std::max(0.0, ball_distance(m, ball) - ball.radius);
    return h + kappa * excess * excess;
  };

  for (double kappa : {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8}) {
    for (int sweep = 0; sweep < 200; ++sweep) {
      double improved = 0.0;
      for (int i1 = 0; i1 < k; ++i1)
        for (int i2 = 0; i2 < k; ++i2)
          for (int j1 = 0; j1 < k; ++j1)
            for (int j2 = 0; j2 < k; ++j2) {
              if (i1 == i2 || j1 == j2) continue;
              // move delta along e_{i1j1} - e_{i1j2} - e_{i2j1} + e_{i2j2}
              const double max_neg = std::min(q(i1, j2), q(i2, j1));
              const double max_pos = std::min(q(i1, j1), q(i2, j2));
              double lo = -max_pos, hi = max_neg;
              if (hi - lo < 1e-14) continue;
              const double f0 = penalized(q, kappa);
              // golden section on the segment
              double a = lo, b = hi;
              auto eval = [&](double d) {
                Grid2<double> w = q;
                w(i1, j1) += d;
                w(i2, j2) += d;
                w(i1, j2) -= d;
                w(i2, j1) -= d;
                for (double& v : w.v) v = std::max(v, 0.0);
                return penalized(w, kappa);
              };
              for (int it = 0; it < 40; ++it) {
                const double m1 = a + (b - a) * 0.382, m2 = a + (b - a) * 0.618;
                if (eval(m1) < eval(m2)) {
                  b = m2;
                } else {
                  a = m1;
                }
              }
              const double d = 0.5 * (a + b);
              if (eval(d) < f0 - 1e-14) {
                q(i1, j1) += d;
                q(i2, j2) += d;
                q(i1, j2) -= d;
                q(i2, j1) -= d;
                for (double& v : q.v) v = std::max(v, 0.0);
                improved += f0 - eval(0.0);
              }
            }
      if (improved < 1e-12) break;
    }
  }
  double total = 0.0;
  for (double v : q.v) total += v;
  for (double& v : q.v) v /= total;
  PairMeasure qm(reference.alphabet(), q);
  const bool in_ball = ball_distance(qm, ball) <= ball.radius + 1e-6;
  ProjectionResult out{qm, in_ball ? entropy_against(q, reference.weights()) : kInf, 0.0, 0.0, false, 0};
  if (cs.common_marginal) {
    auto [m1, m2] = marginals(qm);
    for (int i = 0; i < k; ++i) {
      out.marginal_residual +=
          std::abs(m1.weight(i) - cs.common_marginal->weight(i)) +
          std::abs(m2.weight(i) - cs.common_marginal->weight(i));
    }
  }
  return out;
}

}  // namespace

ProjectionResult entropy_project(const PairMeasure& reference, const ConstraintSet& constraints) {
  if (constraints.common_marginal &&
      !same_alphabet(constraints.common_marginal->alphabet(), reference.alphabet())) {
    throw DomainError("alphabet mismatch");
  }
  for (const auto& ob : constraints.observables) {
    if (ob.g.rows != reference.size() || ob.g.cols != reference.size()) {
      throw DomainError("observable shape mismatch");
    }
    for (double v : ob.g.v) {
      if (!std::isfinite(v)) throw DomainError("observable must be finite on all cells");
    }
  }
  if (!constraints.ball) return project_tilt_ipf(reference, constraints);
  if (reference.size() == 2 && constraints.common_marginal && constraints.observables.empty()) {
    return project_ball_k2(reference, constraints);
  }
  return project_ball_penalty(reference, constraints);
}

BallInfimum ball_infimum(const DiscreteMeasure& mu, const PairMeasure& center, double radius) {
  if (radius <= 0) throw DomainError("radius must be positive");
  ConstraintSet cs;
  cs.common_marginal = mu;
  cs.ball = BallConstraint{center, radius};
  const ProjectionResult r = entropy_project(product(mu, mu), cs);
  BallInfimum out;
  out.value = r.value;
  out.certified = r.certified;
  out.feasible = std::isfinite(r.value);
  return out;
}

}  // namespace symld
