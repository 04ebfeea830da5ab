#include "excut/reference_centers.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "excut/errors.hpp"

namespace excut {

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const PointCloud& cloud) {
  Rows rows;
  rows.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) rows.emplace_back(cloud[i].begin(), cloud[i].end());
  return rows;
}

struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<double> dist;
  double objective = 0.0;
};

Assignment assign(const PointCloud& data, const Rows& centers) {
  Assignment a;
  a.labels.resize(data.size());
  a.dist.resize(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    std::size_t best = 0;
    double best_dist = l1_distance(data[p], centers[0]);
    for (std::size_t i = 1; i < centers.size(); ++i) {
      const double dist = l1_distance(data[p], centers[i]);
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    a.labels[p] = best;
    a.dist[p] = best_dist;
    a.objective += best_dist;
  }
  return a;
}

}  // namespace

CenterSet seed_centers(const PointCloud& data, std::size_t k, Rng& rng) {
  if (k == 0) throw ShapeMismatch("k must be at least 1");
  if (data.empty() || k > data.count_distinct())
    throw TooFewDistinctPoints("k = " + std::to_string(k) + " exceeds the number of distinct points");
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(data.size()))};
  std::vector<double> dist(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) dist[p] = l1_distance(data[p], data[chosen[0]]);

  while (chosen.size() < k) {
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    double target = rng.uniform_open() * total;
    std::size_t pick = data.size();
    for (std::size_t p = 0; p < data.size(); ++p) {
      if (dist[p] <= 0.0) continue;
      pick = p;
      target -= dist[p];
      if (target < 0.0) break;
    }
    chosen.push_back(pick);
    for (std::size_t p = 0; p < data.size(); ++p)
      dist[p] = std::min(dist[p], l1_distance(data[p], data[pick]));
  }

  std::vector<double> values;
  values.reserve(k * data.dim());
  for (std::size_t p : chosen) values.insert(values.end(), data[p].begin(), data[p].end());
  return CenterSet(PointCloud(k, data.dim(), std::move(values)));
}

KMediansResult lloyd_medians(const PointCloud& data, const CenterSet& init, LloydOptions options) {
  if (data.empty()) throw ShapeMismatch("no data");
  if (data.dim() != init.dim()) throw ShapeMismatch("data and centers differ in dimension");
  const std::size_t k = init.size();
  const std::size_t d = data.dim();

  Rows centers = to_rows(init.points());
  Assignment current = assign(data, centers);
  std::vector<double> history{current.objective};
  std::size_t iterations = 0;

  std::vector<double> column;
  for (std::size_t it = 1; it <= options.max_iters && current.objective > 0.0; ++it) {
    Rows next(k, std::vector<double>(d));
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t p = 0; p < data.size(); ++p) members[current.labels[p]].push_back(p);

    std::vector<bool> needs_repair(k, false);
    std::set<std::vector<double>> taken;
    for (std::size_t i = 0; i < k; ++i) {
      if (members[i].empty()) {
        needs_repair[i] = true;
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) {
        column.clear();
        for (std::size_t p : members[i]) column.push_back(data[p][j]);
        next[i][j] = lower_median(column);
      }
      if (!taken.insert(next[i]).second) needs_repair[i] = true;
    }

    // Repair empty or duplicated clusters with the points farthest from the
    // median of their own cluster.
    if (std::find(needs_repair.begin(), needs_repair.end(), true) != needs_repair.end()) {
      std::vector<std::pair<double, std::size_t>> far;
      far.reserve(data.size());
      for (std::size_t p = 0; p < data.size(); ++p)
        far.emplace_back(l1_distance(data[p], next[current.labels[p]]), p);
      std::stable_sort(far.begin(), far.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (!needs_repair[i]) continue;
        for (;; ++cursor) {
          if (cursor == far.size())
            throw TooFewDistinctPoints("cannot repair an empty cluster: no free data point");
          std::vector<double> candidate(data[far[cursor].second].begin(),
                                        data[far[cursor].second].end());
          if (taken.insert(candidate).second) {
            next[i] = std::move(candidate);
            ++cursor;
            break;
          }
        }
      }
    }

    Assignment updated = assign(data, next);
    if (updated.objective > current.objective) break;
    const double improvement = current.objective - updated.objective;
    centers = std::move(next);
    current = std::move(updated);
    history.push_back(current.objective);
    iterations = it;
    if (improvement <= options.tol * history[history.size() - 2]) break;
  }

  std::vector<double> flat;
  flat.reserve(k * d);
  for (const auto& c : centers) flat.insert(flat.end(), c.begin(), c.end());
  return {CenterSet(PointCloud(k, d, std::move(flat))), std::move(current.labels),
          current.objective, iterations, std::move(history)};
}

}  // namespace excut
