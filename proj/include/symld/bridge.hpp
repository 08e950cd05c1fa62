#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "symld/grid2.hpp"
#include "symld/measure.hpp"
#include "symld/permutation.hpp"
#include "symld/rate.hpp"
#include "symld/sampler.hpp"

namespace symld {

struct TimeGrid {
  double horizon = 1.0;        // beta
  std::vector<double> times;   // 0 = t_0 < ... < t_M = beta

  TimeGrid(double beta, std::vector<double> t);
  static TimeGrid regular(double beta, int steps);
  int points() const { return static_cast<int>(times.size()); }
};

// Gaussian bridge parameters: start/end points in R^d, horizon beta, variance
// scale per unit time.
struct BridgeSpec {
  double horizon = 1.0;
  double diffusion = 1.0;
  std::vector<double> start;
  std::vector<double> end;

  BridgeSpec(double beta, double diff, std::vector<double> x, std::vector<double> y);
  int dim() const { return static_cast<int>(start.size()); }
};

struct GaussianMarginal {
  std::vector<double> mean;
  double variance;  // per coordinate
};

// Closed-form marginal of the bridge at time s: mean x + (s/beta)(y-x),
// variance diffusion * s (beta - s) / beta per coordinate.
GaussianMarginal bridge_marginal(const BridgeSpec& spec, double s);

// Bounded continuous functional of the path values at finitely many times.
// Values are laid out time-major: [t0 coords..., t1 coords, ...].
class CylinderFunctional {
 public:
  CylinderFunctional(std::vector<double> times, double bound,
                     std::function<double(const std::vector<double>&)> fn, std::string name = "");

  double operator()(const std::vector<double>& values) const;  // enforces |phi| <= bound
  const std::vector<double>& times() const { return times_; }
  double bound() const { return bound_; }
  const std::string& name() const { return name_; }

  static CylinderFunctional zero();
  static CylinderFunctional constant(double c);
  // -a * min(|xi_t|^2, clip^2); declared bound a * clip^2
  static CylinderFunctional quadratic(double a, double t, double clip = 100.0);

 private:
  std::vector<double> times_;
  double bound_;
  std::function<double(const std::vector<double>&)> fn_;
  std::string name_;
};

struct PathEnsemble {
  TimeGrid grid;
  int dim = 1;
  std::vector<Grid2<double>> paths;  // per path: times x dim
  IndexedSample endpoints;           // the first-layer sample
  Permutation sigma;                 // path i runs from x_i to x_{sigma(i)}
};

// Endpoints from the first layer, a uniform permutation, and exact Gaussian
// sampling at the grid times by sequential conditioning (no discretization
// bias at grid points; endpoints pinned exactly).
PathEnsemble sample_ensemble(const FirstLayerSampler& layer1, double diffusion, const TimeGrid& grid,
                             int n, RngHandle& rng);

// E^xi_{x,y} e^{phi(xi)} by tensorized Gauss-Hermite quadrature over the
// conditional Gaussian at the cylinder times; node count doubles until two
// successive values agree within tol * (1 + |value|).
double cylinder_expectation(const BridgeSpec& spec, const CylinderFunctional& phi, double tol = 1e-8);

// Same quadrature applied to phi itself (used by the dictionary bound).
double cylinder_mean(const BridgeSpec& spec, const CylinderFunctional& phi, double tol = 1e-8);

using EndpointPair = std::pair<std::vector<double>, std::vector<double>>;

struct CumulantEstimate {
  double exact = 0.0;      // (1/n) sum_i log E e^phi, quadrature per pair
  double mc = 0.0;         // same quantity, Monte Carlo over bridge paths
  double mc_stderr = 0.0;  // delta-method standard error of the MC estimate
};

// (1/n) * Lambda_n(phi) for fixed endpoint pairs, computed two ways.
CumulantEstimate cumulant_fixed_n(const std::vector<EndpointPair>& pairs, double horizon,
                                  double diffusion, const CylinderFunctional& phi, int draws,
                                  RngHandle& rng);

// Lambda(phi) = sum over endpoint cells of mu(x,y) log E^xi_{x,y} e^phi.
double cumulant_limit(const PairMeasure& endpoint_law, double horizon, double diffusion,
                      const CylinderFunctional& phi);

// Expected phi under the bridge mixture with the given endpoint law.
double mixture_phi_mean(const PairMeasure& endpoint_law, double horizon, double diffusion,
                        const CylinderFunctional& phi);

// Certified lower bound for the variational path term: max over the
// dictionary (and phi = 0) of <phi, mu> - int mu_{0,beta} log E e^phi.
double path_term_lower_bound(const std::vector<double>& phi_means, const PairMeasure& mu0beta,
                             double horizon, double diffusion,
                             const std::vector<CylinderFunctional>& dictionary);

struct PathRate {
  double value = 0.0;
  bool is_lower_bound = true;  // the path term is a dictionary lower bound
};

// S(mu_0) + H(mu_{0,beta} | mu_0 x mu_beta) + path term, or +inf when the
// endpoint marginals differ. The first two terms share the two-layer rate
// code path exactly.
PathRate rate_path_ensemble(const PairMeasure& mu0beta, const RateOracle& s, double path_term);

struct CumulantRow {
  int n = 0;
  double lambda_n = 0.0;     // (1/n) Lambda_n, exact
  double lambda_limit = 0.0;
  double gap = 0.0;
};

// Table of (n, (1/n)Lambda_n, Lambda, gap) along endpoint arrays whose pair
// empirical approaches the limit law.
std::vector<CumulantRow> cumulant_convergence_table(
    const std::vector<std::vector<EndpointPair>>& arrays, const PairMeasure& limit_law, double horizon,
    double diffusion, const CylinderFunctional& phi);

// Endpoint pairs realizing the largest-remainder apportionment of n * law,
// reading coordinates from the alphabet.
std::vector<EndpointPair> apportioned_endpoint_pairs(const PairMeasure& law, int n);

}  // namespace symld
