#pragma once

#include <vector>

#include "symld/grid2.hpp"

namespace symld {

// Dense two-phase primal simplex with Bland's rule. Desk scale: tens of
// variables and constraints. maximize c.x subject to A_ub x <= b_ub,
// A_eq x = b_eq, x >= 0.
struct LpProblem {
  std::vector<double> c;
  Grid2<double> a_ub;
  std::vector<double> b_ub;
  Grid2<double> a_eq;
  std::vector<double> b_eq;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> x;
};

LpSolution solve_lp(const LpProblem& p);

}  // namespace symld
