#include "symld/alphabet.hpp"

#include <cmath>
#include <set>
#include <string>

#include "symld/errors.hpp"

namespace symld {

namespace {

Grid2<double> euclidean_metric(const std::vector<Point>& pts) {
  const int k = static_cast<int>(pts.size());
  Grid2<double> m(k, k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < pts[i].coords.size(); ++c) {
        const double d = pts[i].coords[c] - pts[j].coords[c];
        s += d * d;
      }
      m(i, j) = m(j, i) = std::sqrt(s);
    }
  }
  return m;
}

}  // namespace

Alphabet::Alphabet(std::vector<Point> points, int max_points)
    : points_(std::move(points)), metric_(euclidean_metric(points_)) {
  if (static_cast<int>(points_.size()) > max_points) {
    throw CapError("alphabet exceeds configured point cap");
  }
  validate_and_finish();
}

Alphabet::Alphabet(std::vector<Point> points, Grid2<double> metric, int max_points)
    : points_(std::move(points)), metric_(std::move(metric)) {
  if (static_cast<int>(points_.size()) > max_points) {
    throw CapError("alphabet exceeds configured point cap");
  }
  validate_and_finish();
}

void Alphabet::validate_and_finish() {
  const int k = size();
  if (k == 0) throw DomainError("alphabet must have at least one point");
  std::set<std::string> ids;
  std::size_t dim = points_[0].coords.size();
  for (const auto& p : points_) {
    if (!ids.insert(p.id).second) throw DomainError("duplicate point id: " + p.id);
    if (p.coords.size() != dim) throw DomainError("inconsistent coordinate dimensions");
  }
  if (metric_.rows != k || metric_.cols != k) throw DomainError("metric matrix shape mismatch");
  constexpr double tol = 1e-12;
  for (int i = 0; i < k; ++i) {
    if (std::abs(metric_(i, i)) > tol) throw DomainError("metric diagonal must be zero");
    for (int j = 0; j < k; ++j) {
      if (metric_(i, j) < 0) throw DomainError("metric must be nonnegative");
      if (std::abs(metric_(i, j) - metric_(j, i)) > tol) throw DomainError("metric must be symmetric");
    }
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l)
        if (metric_(i, j) > metric_(i, l) + metric_(l, j) + tol) {
          throw DomainError("metric violates the triangle inequality");
        }
  tilde_ = Grid2<double>(k, k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) tilde_(i, j) = metric_(i, j) / (1.0 + metric_(i, j));
}

int Alphabet::index_of(const std::string& id) const {
  for (int i = 0; i < size(); ++i)
    if (points_[i].id == id) return i;
  throw DomainError("unknown point id: " + id);
}

AlphabetPtr make_alphabet(std::vector<Point> points, int max_points) {
  return std::make_shared<const Alphabet>(std::move(points), max_points);
}

AlphabetPtr make_alphabet(std::vector<Point> points, Grid2<double> metric, int max_points) {
  return std::make_shared<const Alphabet>(std::move(points), std::move(metric), max_points);
}

AlphabetPtr line_alphabet(int k, double spacing) {
  std::vector<Point> pts;
  pts.reserve(k);
  for (int i = 0; i < k; ++i) pts.push_back({"p" + std::to_string(i), {spacing * i}});
  return make_alphabet(std::move(pts));
}

}  // namespace symld
