#include "symld/lp.hpp"

#include <cmath>
#include <limits>

#include "symld/errors.hpp"

namespace symld {

namespace {

constexpr double kEps = 1e-11;
constexpr int kMaxPivots = 200000;

struct Tableau {
  // rows x (cols + 1); last column is the rhs
  int rows, cols;
  std::vector<double> t;
  std::vector<int> basis;  // basic variable per row

  Tableau(int r, int c) : rows(r), cols(c), t(static_cast<std::size_t>(r) * (c + 1), 0.0), basis(r, -1) {}
  double& at(int i, int j) { return t[static_cast<std::size_t>(i) * (cols + 1) + j]; }
  double at(int i, int j) const { return t[static_cast<std::size_t>(i) * (cols + 1) + j]; }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    for (int j = 0; j <= cols; ++j) at(pr, j) /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) at(i, j) -= f * at(pr, j);
    }
    basis[pr] = pc;
  }
};

// Maximize obj over the tableau with Bland's rule. `allowed` masks columns
// permitted to enter. Returns false on unboundedness.
bool run_simplex(Tableau& tb, std::vector<double>& obj, double& objval, const std::vector<char>& allowed) {
  for (int iter = 0; iter < kMaxPivots; ++iter) {
    int enter = -1;
    for (int j = 0; j < tb.cols; ++j) {
      if (allowed[j] && obj[j] > kEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tb.rows; ++i) {
      const double a = tb.at(i, enter);
      if (a > kEps) {
        const double ratio = tb.at(i, tb.cols) / a;
        if (ratio < best - kEps || (ratio < best + kEps && (leave < 0 || tb.basis[i] < tb.basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    tb.pivot(leave, enter);
    // eliminate entering variable from the objective row
    const double f = obj[enter];
    if (f != 0.0) {
      for (int j = 0; j < tb.cols; ++j) obj[j] -= f * tb.at(leave, j);
      objval += f * tb.at(leave, tb.cols);
    }
  }
  throw ConvergenceError("simplex pivot cap exceeded", {});
}

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const int nvar = static_cast<int>(p.c.size());
  const int nub = static_cast<int>(p.b_ub.size());
  const int neq = static_cast<int>(p.b_eq.size());
  const int rows = nub + neq;

  // column layout: [x (nvar)] [slack/surplus (nub)] [artificial (<= rows)]
  std::vector<int> art_of_row(rows, -1);
  int nart = 0;
  for (int i = 0; i < nub; ++i) {
    if (p.b_ub[i] < 0) ++nart;  // negated >= row needs an artificial
  }
  nart += neq;

  const int cols = nvar + nub + nart;
  Tableau tb(rows, cols);

  int art = nvar + nub;
  for (int i = 0; i < nub; ++i) {
    const double sgn = p.b_ub[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < nvar; ++j) tb.at(i, j) = sgn * p.a_ub(i, j);
    tb.at(i, nvar + i) = sgn;  // slack (or surplus after negation)
    tb.at(i, cols) = sgn * p.b_ub[i];
    if (sgn < 0) {
      tb.at(i, art) = 1.0;
      art_of_row[i] = art;
      tb.basis[i] = art++;
    } else {
      tb.basis[i] = nvar + i;
    }
  }
  for (int e = 0; e < neq; ++e) {
    const int i = nub + e;
    const double sgn = p.b_eq[e] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < nvar; ++j) tb.at(i, j) = sgn * p.a_eq(e, j);
    tb.at(i, cols) = sgn * p.b_eq[e];
    tb.at(i, art) = 1.0;
    art_of_row[i] = art;
    tb.basis[i] = art++;
  }

  std::vector<char> allowed(cols, 1);

  // phase 1: maximize -sum(artificials). With artificial a_i basic in row i,
  // -sum a_i = -sum rhs_i + sum_j (sum_i T_ij) x_j over non-artificial columns.
  if (nart > 0) {
    std::vector<double> obj(cols, 0.0);
    double objval = 0.0;
    for (int i = 0; i < rows; ++i) {
      if (art_of_row[i] >= 0) {
        for (int j = 0; j < cols; ++j) obj[j] += tb.at(i, j);
        objval -= tb.at(i, cols);
      }
    }
    for (int j = nvar + nub; j < cols; ++j) obj[j] = 0.0;
    if (!run_simplex(tb, obj, objval, allowed)) {
      return {LpStatus::unbounded, 0.0, {}};
    }
    if (objval < -1e-8) return {LpStatus::infeasible, 0.0, {}};
    // drive leftover artificials out of the basis where possible
    for (int i = 0; i < rows; ++i) {
      if (tb.basis[i] >= nvar + nub) {
        int pc = -1;
        for (int j = 0; j < nvar + nub; ++j) {
          if (std::abs(tb.at(i, j)) > 1e-9) {
            pc = j;
            break;
          }
        }
        if (pc >= 0) tb.pivot(i, pc);
        // otherwise the row is redundant; keep the zero-valued artificial basic
      }
    }
    for (int j = nvar + nub; j < cols; ++j) allowed[j] = 0;
  }

  // phase 2
  std::vector<double> obj(cols, 0.0);
  double objval = 0.0;
  for (int j = 0; j < nvar; ++j) obj[j] = p.c[j];
  // express objective in nonbasic variables
  for (int i = 0; i < rows; ++i) {
    const int b = tb.basis[i];
    if (b < nvar && obj[b] != 0.0) {
      const double f = obj[b];
      for (int j = 0; j < cols; ++j) obj[j] -= f * tb.at(i, j);
      objval += f * tb.at(i, tb.cols);
    }
  }
  if (!run_simplex(tb, obj, objval, allowed)) {
    return {LpStatus::unbounded, 0.0, {}};
  }

  std::vector<double> x(nvar, 0.0);
  for (int i = 0; i < rows; ++i) {
    if (tb.basis[i] < nvar) x[tb.basis[i]] = tb.at(i, tb.cols);
  }
  double value = 0.0;
  for (int j = 0; j < nvar; ++j) value += p.c[j] * x[j];
  return {LpStatus::optimal, value, std::move(x)};
}

}  // namespace symld
