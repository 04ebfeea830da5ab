#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace excut {

/// n points in d-dimensional real space, stored row-major.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws ShapeMismatch if values.size() != n*d or d == 0, NonFiniteInput on NaN/inf.
  PointCloud(std::size_t n, std::size_t d, std::vector<double> values);
  /// Throws ShapeMismatch on ragged rows.
  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  bool empty() const noexcept { return n_ == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }
  std::span<const double> values() const noexcept { return values_; }

  /// Number of distinct rows (exact comparison).
  std::size_t count_distinct() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
};

/// k pairwise-distinct reference centers with bounding magnitude M = max |c_j|.
class CenterSet {
 public:
  /// Throws DuplicateCenters, NonFiniteInput, ShapeMismatch (k == 0).
  explicit CenterSet(PointCloud centers);

  std::size_t size() const noexcept { return centers_.size(); }
  std::size_t dim() const noexcept { return centers_.dim(); }
  std::span<const double> operator[](std::size_t i) const { return centers_[i]; }
  const PointCloud& points() const noexcept { return centers_; }
  double bound() const noexcept { return bound_; }

 private:
  PointCloud centers_;
  double bound_ = 0.0;
};

double l1_distance(std::span<const double> a, std::span<const double> b);

/// Index of the nearest center in l1; lowest index on ties.
std::size_t nearest_center(std::span<const double> x, const CenterSet& centers);

/// sum_x min_i ||x - c^i||_1.
double reference_cost(const PointCloud& data, const CenterSet& centers);

/// Lower median (element (n-1)/2 of the sorted values). values is reordered.
double lower_median(std::span<double> values);

}  // namespace excut
