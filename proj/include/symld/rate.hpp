#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "symld/measure.hpp"
#include "symld/transport.hpp"

namespace symld {

// First-layer rate function: an evaluable map on discrete measures.
struct RateOracle {
  std::function<double(const DiscreteMeasure&)> eval;

  double operator()(const DiscreteMeasure& m) const { return eval(m); }

  // rho -> H(rho | m)
  static RateOracle sanov(DiscreteMeasure m);
  // 0 at mu (cellwise within tol), +infinity elsewhere
  static RateOracle indicator(DiscreteMeasure mu, double tol = 1e-10);
};

// Rate of the permutation-symmetrised pair empirical for a fixed sample with
// empirical mu: H(nu | mu x mu) when both marginals equal mu, +inf otherwise.
double rate_fixed_sample(const PairMeasure& nu, const DiscreteMeasure& mu, double marginal_tol = 1e-10);

// Two-layer rate: S(nu_1) + H(nu | nu_1 x nu_1) when nu_1 = nu_2, else +inf.
double rate_two_layer(const PairMeasure& nu, const RateOracle& s, double marginal_tol = 1e-10);

struct Observable {
  Grid2<double> g;  // linear functional on pair cells
  double target;
};

struct BallConstraint {
  PairMeasure center;
  double radius;  // beta_{W, dt2+} ball
};

struct ConstraintSet {
  std::optional<DiscreteMeasure> common_marginal;  // nu_1 = nu_2 = this
  std::vector<Observable> observables;
  std::optional<BallConstraint> ball;  // at most one by construction
};

struct ProjectionResult {
  PairMeasure minimizer;
  double value = 0.0;            // H(minimizer | reference)
  double marginal_residual = 0.0;  // L1
  double observable_gap = 0.0;     // max abs
  bool certified = true;
  int outer_iterations = 0;
};

// Minimizer of H(.|reference) over the constraint set. Observables are
// handled by an exponential tilt with an outer dual bisection, marginal
// constraints by iterative proportional fitting. Ball constraints are exact
// (grid-certified) for k = 2 with a pure marginal constraint, and a penalty
// heuristic otherwise (certified = false).
ProjectionResult entropy_project(const PairMeasure& reference, const ConstraintSet& constraints);

struct BallInfimum {
  double value = 0.0;
  bool certified = false;
  bool feasible = true;
};

// inf of rate_fixed_sample(., mu) over the beta_{W,dt2+} ball around center.
BallInfimum ball_infimum(const DiscreteMeasure& mu, const PairMeasure& center, double radius);

// project-wide tolerances
inline constexpr double kEntropyTol = 1e-8;
inline constexpr double kMarginalTol = 1e-10;
inline constexpr double kLpTol = 1e-9;

}  // namespace symld
