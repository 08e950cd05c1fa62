#include "symld/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "symld/errors.hpp"
#include "symld/quadrature.hpp"

namespace symld {

TimeGrid::TimeGrid(double beta, std::vector<double> t) : horizon(beta), times(std::move(t)) {
  if (beta <= 0) throw DomainError("horizon must be positive");
  if (times.size() < 2 || times.front() != 0.0 || times.back() != beta) {
    throw DomainError("grid must run from 0 to the horizon");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) throw DomainError("grid times must be strictly increasing");
  }
}

TimeGrid TimeGrid::regular(double beta, int steps) {
  if (steps < 1) throw DomainError("grid needs at least one step");
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) t[i] = beta * i / steps;
  t.front() = 0.0;
  t.back() = beta;
  return TimeGrid(beta, std::move(t));
}

BridgeSpec::BridgeSpec(double beta, double diff, std::vector<double> x, std::vector<double> y)
    : horizon(beta), diffusion(diff), start(std::move(x)), end(std::move(y)) {
  if (beta <= 0) throw DomainError("horizon must be positive");
  if (diffusion <= 0) throw DomainError("diffusion scale must be positive");
  if (start.empty() || start.size() != end.size()) throw DomainError("endpoint dimension mismatch");
}

GaussianMarginal bridge_marginal(const BridgeSpec& spec, double s) {
  if (s < 0 || s > spec.horizon) throw DomainError("time outside [0, horizon]");
  GaussianMarginal g;
  g.mean.resize(spec.dim());
  const double f = s / spec.horizon;
  for (int c = 0; c < spec.dim(); ++c) g.mean[c] = spec.start[c] + f * (spec.end[c] - spec.start[c]);
  g.variance = spec.diffusion * s * (spec.horizon - s) / spec.horizon;
  return g;
}

CylinderFunctional::CylinderFunctional(std::vector<double> times, double bound,
                                       std::function<double(const std::vector<double>&)> fn,
                                       std::string name)
    : times_(std::move(times)), bound_(bound), fn_(std::move(fn)), name_(std::move(name)) {
  if (!std::isfinite(bound_)) throw DomainError("cylinder functional must declare a finite bound");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] <= times_[i - 1]) throw DomainError("cylinder times must be strictly increasing");
  }
}

double CylinderFunctional::operator()(const std::vector<double>& values) const {
  const double v = fn_(values);
  if (std::abs(v) > bound_ + 1e-12) {
    throw DomainError("cylinder functional exceeded its declared bound");
  }
  return v;
}

CylinderFunctional CylinderFunctional::zero() {
  return CylinderFunctional({}, 0.0, [](const std::vector<double>&) { return 0.0; }, "zero");
}

CylinderFunctional CylinderFunctional::constant(double c) {
  return CylinderFunctional({}, std::abs(c), [c](const std::vector<double>&) { return c; }, "const");
}

CylinderFunctional CylinderFunctional::quadratic(double a, double t, double clip) {
  const double bound = std::abs(a) * clip * clip;
  return CylinderFunctional(
      {t}, bound,
      [a, clip](const std::vector<double>& v) {
        double s2 = 0.0;
        for (double x : v) s2 += x * x;
        return -a * std::min(s2, clip * clip);
      },
      "quad");
}

namespace {

// One conditional step of the pinned Gaussian path: from (t0, value v) to t1
// given the endpoint (beta, y).
double step_mean(double v, double y, double t0, double t1, double beta) {
  return v + (t1 - t0) / (beta - t0) * (y - v);
}

double step_variance(double diffusion, double t0, double t1, double beta) {
  return diffusion * (t1 - t0) * (beta - t1) / (beta - t0);
}

}  // namespace

PathEnsemble sample_ensemble(const FirstLayerSampler& layer1, double diffusion, const TimeGrid& grid,
                             int n, RngHandle& rng) {
  if (n < 1) throw DomainError("ensemble size must be >= 1");
  if (diffusion <= 0) throw DomainError("diffusion scale must be positive");
  const IndexedSample x = layer1.draw(n, rng);
  const Permutation sigma = sample_permutation(n, rng);
  const AlphabetPtr& alphabet = x.alphabet();
  const int d = alphabet->dim();
  if (d < 1) throw DomainError("alphabet points need coordinates for bridge sampling");
  const int m = grid.points();
  PathEnsemble ens{grid, d, {}, x, sigma};
  ens.paths.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& xs = alphabet->point(x.at(i)).coords;
    const auto& ys = alphabet->point(x.at(sigma(i))).coords;
    Grid2<double> path(m, d, 0.0);
    for (int c = 0; c < d; ++c) path(0, c) = xs[c];
    for (int t = 1; t < m; ++t) {
      const double t0 = grid.times[t - 1], t1 = grid.times[t];
      if (t == m - 1) {
        for (int c = 0; c < d; ++c) path(t, c) = ys[c];  // exact pinning
        break;
      }
      const double var = step_variance(diffusion, t0, t1, grid.horizon);
      const double sd = std::sqrt(std::max(var, 0.0));
      for (int c = 0; c < d; ++c) {
        const double mean = step_mean(path(t - 1, c), ys[c], t0, t1, grid.horizon);
        path(t, c) = mean + sd * rng.next_normal();
      }
    }
    ens.paths.push_back(std::move(path));
  }
  return ens;
}

namespace {

struct ConditionalGaussian {
  std::vector<double> times;        // the random (unpinned) cylinder times
  std::vector<double> fixed_value;  // time-major values for pinned times
  std::vector<char> is_fixed;       // per cylinder time
  std::vector<std::vector<double>> mean;  // per random time, per coordinate
  Grid2<double> chol;               // Cholesky factor of the per-coordinate covariance
};

// Joint law of the bridge at the cylinder times: Brownian-bridge covariance
// s(beta-t)/beta * diffusion for s <= t, identical across coordinates.
ConditionalGaussian conditional_at_times(const BridgeSpec& spec, const std::vector<double>& times) {
  ConditionalGaussian g;
  const double beta = spec.horizon;
  for (double t : times) {
    if (t < 0 || t > beta) throw DomainError("cylinder time outside [0, horizon]");
    const double var = spec.diffusion * t * (beta - t) / beta;
    g.is_fixed.push_back(var < 1e-14);
  }
  std::vector<int> rnd;
  for (std::size_t q = 0; q < times.size(); ++q) {
    const double t = times[q];
    const double f = t / beta;
    if (g.is_fixed[q]) {
      for (int c = 0; c < spec.dim(); ++c) {
        g.fixed_value.push_back(spec.start[c] + f * (spec.end[c] - spec.start[c]));
      }
    } else {
      rnd.push_back(static_cast<int>(q));
      g.times.push_back(t);
      std::vector<double> mean(spec.dim());
      for (int c = 0; c < spec.dim(); ++c) mean[c] = spec.start[c] + f * (spec.end[c] - spec.start[c]);
      g.mean.push_back(std::move(mean));
      g.fixed_value.insert(g.fixed_value.end(), spec.dim(), 0.0);  // placeholder
    }
  }
  const int q = static_cast<int>(g.times.size());
  Grid2<double> cov(q, q, 0.0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double s = std::min(g.times[i], g.times[j]);
      const double t = std::max(g.times[i], g.times[j]);
      cov(i, j) = spec.diffusion * s * (beta - t) / beta;
    }
  // Cholesky
  Grid2<double> chol(q, q, 0.0);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = cov(i, j);
      for (int p = 0; p < j; ++p) s -= chol(i, p) * chol(j, p);
      if (i == j) {
        if (s <= 0) throw DomainError("degenerate cylinder covariance");
        chol(i, i) = std::sqrt(s);
      } else {
        chol(i, j) = s / chol(j, j);
      }
    }
  }
  g.chol = std::move(chol);
  return g;
}

double quadrature_over(const BridgeSpec& spec, const CylinderFunctional& phi,
                       const std::function<double(double)>& transform, double tol) {
  const auto& times = phi.times();
  const int d = spec.dim();
  if (times.empty()) {
    return transform(phi(std::vector<double>{}));
  }
  const ConditionalGaussian g = conditional_at_times(spec, times);
  const int q = static_cast<int>(g.times.size());
  const int dims = q * d;
  if (static_cast<int>(times.size()) > 3) throw CapError("cylinder functionals are capped at 3 times");
  if (dims > 6) throw CapError("quadrature dimension cap exceeded");

  std::vector<double> values(times.size() * d, 0.0);
  // prefill pinned values
  {
    int vi = 0;
    for (std::size_t t = 0; t < times.size(); ++t)
      for (int c = 0; c < d; ++c, ++vi)
        if (g.is_fixed[t]) values[vi] = g.fixed_value[vi];
  }
  if (dims == 0) {
    return transform(phi(values));
  }

  auto evaluate = [&](int nodes) {
    const HermiteRule& rule = gauss_hermite(nodes);
    const double norm = std::pow(M_PI, -0.5 * dims);
    // map random-time index -> position in `values`
    std::vector<int> pos;
    for (std::size_t t = 0; t < times.size(); ++t)
      if (!g.is_fixed[t]) pos.push_back(static_cast<int>(t));
    double total = 0.0;
    std::vector<int> idx(dims, 0);
    std::vector<double> z(q, 0.0);
    while (true) {
      double w = 1.0;
      for (int a = 0; a < dims; ++a) w *= rule.weights[idx[a]];
      // coordinates are independent; per coordinate c the block z_c has the
      // same Cholesky factor
      for (int c = 0; c < d; ++c) {
        for (int i = 0; i < q; ++i) z[i] = rule.nodes[idx[c * q + i]];
        for (int i = 0; i < q; ++i) {
          double s = 0.0;
          for (int p = 0; p <= i; ++p) s += g.chol(i, p) * z[p];
          values[pos[i] * d + c] = g.mean[i][c] + std::sqrt(2.0) * s;
        }
      }
      total += w * transform(phi(values));
      int a = 0;
      for (; a < dims; ++a) {
        if (++idx[a] < nodes) break;
        idx[a] = 0;
      }
      if (a == dims) break;
    }
    return norm * total;
  };

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int nodes = 8; nodes <= 256; nodes *= 2) {
    const double cur = evaluate(nodes);
    if (!std::isnan(prev) && std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  const double last = evaluate(512);
  if (std::abs(last - prev) <= tol * (1.0 + std::abs(last))) return last;
  throw ConvergenceError("cylinder quadrature did not converge", {prev, last});
}

}  // namespace

double cylinder_expectation(const BridgeSpec& spec, const CylinderFunctional& phi, double tol) {
  return quadrature_over(spec, phi, [](double v) { return std::exp(v); }, tol);
}

double cylinder_mean(const BridgeSpec& spec, const CylinderFunctional& phi, double tol) {
  return quadrature_over(spec, phi, [](double v) { return v; }, tol);
}

namespace {

// sample the bridge exactly at the cylinder times only
std::vector<double> sample_at_times(const BridgeSpec& spec, const std::vector<double>& times,
                                    RngHandle& rng) {
  const int d = spec.dim();
  std::vector<double> out(times.size() * d, 0.0);
  std::vector<double> cur = spec.start;
  double t0 = 0.0;
  for (std::size_t q = 0; q < times.size(); ++q) {
    const double t1 = times[q];
    if (t1 >= spec.horizon - 1e-15) {
      for (int c = 0; c < d; ++c) out[q * d + c] = spec.end[c];
      cur = spec.end;
      t0 = spec.horizon;
      continue;
    }
    const double var = step_variance(spec.diffusion, t0, t1, spec.horizon);
    const double sd = std::sqrt(std::max(var, 0.0));
    for (int c = 0; c < d; ++c) {
      const double mean = step_mean(cur[c], spec.end[c], t0, t1, spec.horizon);
      cur[c] = mean + sd * rng.next_normal();
      out[q * d + c] = cur[c];
    }
    t0 = t1;
  }
  return out;
}

}  // namespace

CumulantEstimate cumulant_fixed_n(const std::vector<EndpointPair>& pairs, double horizon,
                                  double diffusion, const CylinderFunctional& phi, int draws,
                                  RngHandle& rng) {
  if (pairs.empty()) throw DomainError("no endpoint pairs");
  if (draws < 2) throw DomainError("need at least two Monte Carlo draws");
  const int n = static_cast<int>(pairs.size());
  // group identical endpoint pairs; the per-pair quantities coincide
  std::map<EndpointPair, int> groups;
  for (const auto& p : pairs) ++groups[p];
  CumulantEstimate est;
  double var_sum = 0.0;
  for (const auto& [pr, mult] : groups) {
    const BridgeSpec spec(horizon, diffusion, pr.first, pr.second);
    const double exact = cylinder_expectation(spec, phi);
    est.exact += mult * std::log(exact);
    // Monte Carlo mean of e^phi over bridge draws
    double sum = 0.0, sumsq = 0.0;
    for (int dr = 0; dr < draws; ++dr) {
      const std::vector<double> v = sample_at_times(spec, phi.times(), rng);
      const double e = std::exp(phi(v));
      sum += e;
      sumsq += e * e;
    }
    const double mean = sum / draws;
    const double var = std::max(0.0, sumsq / draws - mean * mean) / (draws - 1);
    est.mc += mult * std::log(mean);
    var_sum += static_cast<double>(mult) * mult * var / (mean * mean);  // delta method
  }
  est.exact /= n;
  est.mc /= n;
  est.mc_stderr = std::sqrt(var_sum) / n;
  return est;
}

double cumulant_limit(const PairMeasure& endpoint_law, double horizon, double diffusion,
                      const CylinderFunctional& phi) {
  const AlphabetPtr& a = endpoint_law.alphabet();
  if (a->dim() < 1) throw DomainError("alphabet points need coordinates");
  double total = 0.0;
  const int k = endpoint_law.size();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double w = endpoint_law.weight(i, j);
      if (w <= 0) continue;
      const BridgeSpec spec(horizon, diffusion, a->point(i).coords, a->point(j).coords);
      total += w * std::log(cylinder_expectation(spec, phi));
    }
  return total;
}

double mixture_phi_mean(const PairMeasure& endpoint_law, double horizon, double diffusion,
                        const CylinderFunctional& phi) {
  const AlphabetPtr& a = endpoint_law.alphabet();
  double total = 0.0;
  const int k = endpoint_law.size();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double w = endpoint_law.weight(i, j);
      if (w <= 0) continue;
      const BridgeSpec spec(horizon, diffusion, a->point(i).coords, a->point(j).coords);
      total += w * cylinder_mean(spec, phi);
    }
  return total;
}

double path_term_lower_bound(const std::vector<double>& phi_means, const PairMeasure& mu0beta,
                             double horizon, double diffusion,
                             const std::vector<CylinderFunctional>& dictionary) {
  if (phi_means.size() != dictionary.size()) throw DomainError("dictionary/means size mismatch");
  double best = 0.0;  // phi = 0 is always feasible
  for (std::size_t i = 0; i < dictionary.size(); ++i) {
    const double term = phi_means[i] - cumulant_limit(mu0beta, horizon, diffusion, dictionary[i]);
    best = std::max(best, term);
  }
  return best;
}

PathRate rate_path_ensemble(const PairMeasure& mu0beta, const RateOracle& s, double path_term) {
  if (path_term < 0) throw DomainError("path term lower bound must be nonnegative");
  const double static_part = rate_two_layer(mu0beta, s);
  PathRate out;
  out.value = std::isinf(static_part) ? static_part : static_part + path_term;
  out.is_lower_bound = true;
  return out;
}

std::vector<CumulantRow> cumulant_convergence_table(
    const std::vector<std::vector<EndpointPair>>& arrays, const PairMeasure& limit_law, double horizon,
    double diffusion, const CylinderFunctional& phi) {
  const double limit = cumulant_limit(limit_law, horizon, diffusion, phi);
  std::vector<CumulantRow> rows;
  for (const auto& pairs : arrays) {
    if (pairs.empty()) throw DomainError("empty endpoint array");
    double lam = 0.0;
    std::map<EndpointPair, int> groups;
    for (const auto& p : pairs) ++groups[p];
    for (const auto& [pr, mult] : groups) {
      const BridgeSpec spec(horizon, diffusion, pr.first, pr.second);
      lam += mult * std::log(cylinder_expectation(spec, phi));
    }
    lam /= static_cast<double>(pairs.size());
    rows.push_back({static_cast<int>(pairs.size()), lam, limit, std::abs(lam - limit)});
  }
  return rows;
}

std::vector<EndpointPair> apportioned_endpoint_pairs(const PairMeasure& law, int n) {
  if (n < 1) throw DomainError("n must be >= 1");
  const int k = law.size();
  const AlphabetPtr& a = law.alphabet();
  if (a->dim() < 1) throw DomainError("alphabet points need coordinates");
  std::vector<std::int64_t> cells(k * k, 0);
  std::vector<double> raw(k * k, 0.0);
  std::int64_t assigned = 0;
  for (int i = 0; i < k * k; ++i) {
    raw[i] = n * law.weights().v[i];
    cells[i] = static_cast<std::int64_t>(std::floor(raw[i] + 1e-9));
    assigned += cells[i];
  }
  std::vector<int> order(k * k);
  for (int i = 0; i < k * k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return raw[x] - std::floor(raw[x] + 1e-9) > raw[y] - std::floor(raw[y] + 1e-9);
  });
  for (int t = 0; assigned < n; ++t, ++assigned) ++cells[order[t % (k * k)]];
  std::vector<EndpointPair> out;
  out.reserve(n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (std::int64_t c = 0; c < cells[i * k + j]; ++c) {
        out.emplace_back(a->point(i).coords, a->point(j).coords);
      }
  return out;
}

}  // namespace symld
