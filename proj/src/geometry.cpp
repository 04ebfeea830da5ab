#include "excut/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "excut/errors.hpp"

namespace excut {

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
  if (d_ == 0) throw ShapeMismatch("point dimension must be at least 1");
  if (values_.size() != n_ * d_) throw ShapeMismatch("value count is not n*d");
  for (double v : values_)
    if (!std::isfinite(v)) throw NonFiniteInput("coordinates must be finite");
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeMismatch("no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (const auto& row : rows) {
    if (row.size() != d) throw ShapeMismatch("ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return PointCloud(rows.size(), d, std::move(values));
}

std::size_t PointCloud::count_distinct() const {
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < n_; ++i) {
    auto p = (*this)[i];
    seen.emplace(p.begin(), p.end());
  }
  return seen.size();
}

CenterSet::CenterSet(PointCloud centers) : centers_(std::move(centers)) {
  if (centers_.empty()) throw ShapeMismatch("need at least one center");
  if (centers_.count_distinct() != centers_.size())
    throw DuplicateCenters("reference centers must be pairwise distinct");
  for (double v : centers_.values()) bound_ = std::max(bound_, std::abs(v));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a[j] - b[j]);
  return sum;
}

std::size_t nearest_center(std::span<const double> x, const CenterSet& centers) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double dist = l1_distance(x, centers[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

double reference_cost(const PointCloud& data, const CenterSet& centers) {
  if (data.dim() != centers.dim()) throw ShapeMismatch("data and centers differ in dimension");
  double sum = 0.0;
  for (std::size_t p = 0; p < data.size(); ++p)
    sum += l1_distance(data[p], centers[nearest_center(data[p], centers)]);
  return sum;
}

double lower_median(std::span<double> values) {
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace excut
