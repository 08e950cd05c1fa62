#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "symld/exact.hpp"
#include "symld/measure.hpp"
#include "symld/permutation.hpp"

namespace symld {

class RngHandle;

enum class BaseMetric { plain, tilde };  // d or d/(1+d)
enum class PairMode { max, sum };

double point_metric(const Alphabet& a, int x, int y, BaseMetric base);
double pair_metric(const Alphabet& a, std::pair<int, int> p, std::pair<int, int> q, PairMode mode,
                   BaseMetric base);

// Nonnegative mass matrix between two atomic measures. Row sums reproduce the
// source weights and column sums the target weights within 1e-10.
struct TransportPlan {
  Grid2<double> mass;
  std::vector<double> source;
  std::vector<double> target;
};

struct WassersteinResult {
  double cost = 0.0;
  TransportPlan plan;
  // dual potentials certifying optimality: u_i + v_j <= c_ij with equality on
  // the support of the plan
  std::vector<double> source_potential;
  std::vector<double> target_potential;
};

// Dense square assignment, O(n^3) shortest augmenting path.
// Returns row -> column map and the unnormalized optimal cost.
std::pair<std::vector<int>, double> solve_assignment(const Grid2<double>& cost);

// Exact optimal transport for arbitrary nonnegative weights with equal total
// mass (transportation simplex with Bland's rule).
WassersteinResult transport_dense(const std::vector<double>& source, const std::vector<double>& target,
                                  const Grid2<double>& cost);

WassersteinResult wasserstein_atomic(const DiscreteMeasure& rho, const DiscreteMeasure& nu,
                                     BaseMetric ground);
WassersteinResult wasserstein_atomic(const PairMeasure& rho, const PairMeasure& nu, PairMode mode,
                                     BaseMetric base);

// Dual bounded-Lipschitz distance: LP over functions f on the joint support
// with ||f||_inf + ||f||_Lip <= 1.
double bl_distance(const DiscreteMeasure& rho, const DiscreteMeasure& nu, BaseMetric ground);
double bl_distance(const PairMeasure& rho, const PairMeasure& nu, PairMode mode, BaseMetric base);

// Min-cost matching between two equal-length samples under a point metric.
struct AssignmentResult {
  Permutation perm;   // u_i matched to x_{perm(i)}
  double cost;        // (1/n) sum_i metric(u_i, x_{perm(i)})
  bool multiple_optima;
};
AssignmentResult assignment_between(const IndexedSample& u, const IndexedSample& x, BaseMetric ground);

// Equal-weight atomic measure on the alphabet square, kept as its atom list.
struct PairAtoms {
  AlphabetPtr alphabet;
  std::vector<std::pair<int, int>> atoms;
};

PairMeasure atoms_measure(const PairAtoms& a);
PairAtoms table_atoms(AlphabetPtr alphabet, const PairTypeTable& t);

// beta_{W, dt2+} between equal-weight atom lists (assignment / n).
double pair_atoms_distance(const PairAtoms& a, const PairAtoms& b);

// The set of pair measures realizable from a fixed sample by a permutation.
// Enumerable (distinct elements with multiplicities) for n <= 8.
class SymSet {
 public:
  explicit SymSet(IndexedSample sample);

  const IndexedSample& sample() const { return sample_; }
  int n() const { return sample_.size(); }

  struct Element {
    PairTypeTable table;
    std::int64_t multiplicity;  // number of permutations realizing it
  };
  const std::vector<Element>& elements() const;  // CapError when n > 8

 private:
  IndexedSample sample_;
  mutable std::optional<std::vector<Element>> elements_;
};

// Extremal assignment with tie handling: for n <= 8 the optimizer set is
// enumerated and one optimizer is drawn uniformly; for larger n an
// infinitesimal random cost perturbation is applied before the exact solve,
// which deviates from exact uniformity over ties.
std::vector<int> extremal_assignment_uniform(const Grid2<double>& cost, bool maximize, RngHandle& rng);

// Projection of an atomic pair measure onto the sym set of a sample: two
// independent d~-assignments (u side and v side), uniform tie-breaking.
struct ProjectionToSym {
  PairMeasure measure;
  Permutation left;   // u_i -> x_{left(i)}
  Permutation right;  // v_i -> x_{right(i)}
  Permutation rep;    // measure == pair_empirical(sample, rep)
  double left_cost;   // normalized by n
  double right_cost;
};
ProjectionToSym project_to_symset(const PairAtoms& gamma, const SymSet& sym, RngHandle& rng);

// Couplings of the equal-weight pair measure w with the sym set, built from
// two independent extremal assignments with uniform tie-breaking (the
// construction whose law matches the permutation-sampled pair empirical
// exactly). couple_min attains min over the sym set of beta_{W,dt2+};
// couple_max is the max-assignment analogue and need not attain the
// enumerated maximum distance.
struct CoupleResult {
  PairMeasure measure;
  double distance;  // beta_{W,dt2+}(w, measure)
};
CoupleResult couple_min(const PairAtoms& w, const SymSet& sym, RngHandle& rng);
CoupleResult couple_max(const PairAtoms& w, const SymSet& sym, RngHandle& rng);

// Exhaustive min/max of beta_{W,dt2+}(w, .) over the enumerated sym set.
std::pair<double, double> symset_distance_range(const PairAtoms& w, const SymSet& sym);

}  // namespace symld
