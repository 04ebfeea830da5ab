#pragma once

#include <cstddef>
#include <vector>

#include "excut/geometry.hpp"
#include "excut/rng.hpp"

namespace excut {

struct KMediansResult {
  CenterSet centers;
  std::vector<std::size_t> assignment;  // nearest center in l1, lowest index on ties
  double objective = 0.0;               // sum_x min_i ||x - c^i||_1
  std::size_t iterations = 0;
  std::vector<double> objective_history;  // one entry per assignment step
};

/// D^1 seeding: the first center is a uniform data point, each next one is drawn
/// with probability proportional to its l1 distance to the nearest chosen center.
/// Throws TooFewDistinctPoints when k exceeds the number of distinct points.
CenterSet seed_centers(const PointCloud& data, std::size_t k, Rng& rng);

struct LloydOptions {
  std::size_t max_iters = 100;
  double tol = 1e-9;  // relative objective improvement
};

/// Alternates nearest-center assignment and per-cluster coordinate-wise lower
/// medians. An empty cluster is moved to the point farthest from its center.
KMediansResult lloyd_medians(const PointCloud& data, const CenterSet& init,
                             LloydOptions options = {});

}  // namespace excut
