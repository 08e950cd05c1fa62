#pragma once

#include <memory>
#include <string>
#include <vector>

#include "symld/grid2.hpp"

namespace symld {

struct Point {
  std::string id;
  std::vector<double> coords;
};

// Finite metric point set. Point ids must be distinct; coordinate ties are
// allowed. The metric defaults to the Euclidean distance on the coordinates
// and may be overridden by an explicit matrix, which is validated for
// symmetry, zero diagonal, nonnegativity and the triangle inequality.
class Alphabet {
 public:
  static constexpr int kDefaultMaxPoints = 16;

  explicit Alphabet(std::vector<Point> points, int max_points = kDefaultMaxPoints);
  Alphabet(std::vector<Point> points, Grid2<double> metric, int max_points = kDefaultMaxPoints);

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return points_.empty() ? 0 : static_cast<int>(points_[0].coords.size()); }
  const Point& point(int i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  double distance(int i, int j) const { return metric_(i, j); }
  // Bounded transform d/(1+d), always in [0,1).
  double tilde(int i, int j) const { return tilde_(i, j); }

  int index_of(const std::string& id) const;  // DomainError if absent

 private:
  void validate_and_finish();

  std::vector<Point> points_;
  Grid2<double> metric_;
  Grid2<double> tilde_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

AlphabetPtr make_alphabet(std::vector<Point> points, int max_points = Alphabet::kDefaultMaxPoints);
AlphabetPtr make_alphabet(std::vector<Point> points, Grid2<double> metric,
                          int max_points = Alphabet::kDefaultMaxPoints);

// k points 0,1,...,k-1 on the real line with unit spacing, ids "p0","p1",...
AlphabetPtr line_alphabet(int k, double spacing = 1.0);

}  // namespace symld
