#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "excut/geometry.hpp"
#include "excut/rng.hpp"
#include "excut/set_system.hpp"

namespace excut {

/// Axis-aligned cut: points with x[coordinate] <= threshold go left.
struct ThresholdCut {
  std::size_t coordinate = 0;
  double threshold = 0.0;

  bool goes_left(std::span<const double> x) const { return x[coordinate] <= threshold; }
  bool separates(std::span<const double> a, std::span<const double> b) const {
    return goes_left(a) != goes_left(b);
  }
  bool operator==(const ThresholdCut&) const = default;
};

/// Axis-aligned cell: lower[j] < x_j <= upper[j] for every coordinate.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  bool contains(std::span<const double> x) const;
};

/// Binary space-partitioning tree of threshold cuts. Node 0 is the root; every
/// node keeps the list C_u of centers inside its cell.
class ThresholdTree {
 public:
  struct Node {
    std::optional<ThresholdCut> cut;  // set on internal nodes
    std::size_t left = 0;
    std::size_t right = 0;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> centers;
    bool is_leaf() const noexcept { return !cut.has_value(); }
  };

  /// Single leaf holding centers 0..k-1.
  ThresholdTree(std::size_t num_centers, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_centers() const noexcept { return num_centers_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t num_leaves() const;

  /// True when every leaf holds exactly one center.
  bool complete() const;

  /// Leaf node whose cell contains x.
  std::size_t leaf_of(std::span<const double> x) const;
  /// Center of the leaf containing x. Requires complete().
  std::size_t assign(std::span<const double> x) const;

  /// Leaf nodes in left-to-right order.
  std::vector<std::size_t> leaves() const;
  Box cell(std::size_t node) const;

  /// Splits a leaf by the cut if it separates the leaf's centers. Returns
  /// whether the leaf was split.
  bool split(std::size_t leaf, const ThresholdCut& cut, const CenterSet& centers);

  /// {"cut": {"j": .., "theta": ..}, "left": .., "right": ..} / {"center": i}.
  nlohmann::json to_json() const;
  /// Throws ParseError on malformed input or leaves that are not a permutation.
  static ThresholdTree from_json(const nlohmann::json& j, std::size_t dim);

  /// Throws std::logic_error if a structural invariant fails.
  void check_invariants(const CenterSet& centers) const;

 private:
  std::size_t num_centers_;
  std::size_t dim_;
  std::vector<Node> nodes_;
};

/// Incremental RandomCoordinateCut state: applies cuts to every leaf that
/// still holds two or more centers.
class TreeBuilder {
 public:
  explicit TreeBuilder(const CenterSet& centers);

  /// Splits every unresolved leaf separated by the cut. Returns whether any split happened.
  bool apply(const ThresholdCut& cut);
  bool done() const noexcept { return active_.empty(); }
  const ThresholdTree& tree() const noexcept { return tree_; }
  ThresholdTree release() && { return std::move(tree_); }

 private:
  const CenterSet& centers_;
  ThresholdTree tree_;
  std::vector<std::size_t> active_;
};

/// Coordinate uniform on [0, d), threshold uniform on (-M, M).
ThresholdCut sample_cut(std::size_t dim, double bound, Rng& rng);

struct BuildResult {
  ThresholdTree tree;
  std::vector<ThresholdCut> cuts;  // every sampled cut, including no-ops
};

inline constexpr std::size_t kMaxCuts = 1'000'000;

/// RandomCoordinateCut. Throws CutLimitExceeded past max_cuts sampled cuts.
BuildResult build_tree(const CenterSet& centers, Rng& rng, std::size_t max_cuts = kMaxCuts);

enum class CostMode {
  proxy,    // each point charged to its leaf's reference center
  optimal,  // each point charged to its cluster's coordinate-wise lower median
};

double tree_cost(const ThresholdTree& tree, const PointCloud& data, const CenterSet& centers,
                 CostMode mode);

/// Leaf center of every data point.
std::vector<std::size_t> assign_points(const ThresholdTree& tree, const PointCloud& data);

/// Thresholds on one coordinate in [lo, hi).
struct CutInterval {
  std::size_t coordinate;
  double lo;
  double hi;
};

/// All cuts separating a point from a center. Total length = ||x - c||_1 inside the cube.
struct CutSet {
  std::vector<CutInterval> intervals;
  double measure() const;
  bool contains(const ThresholdCut& cut) const;
};

/// Per coordinate [min(x_j, c_j), max(x_j, c_j)) intersected with [-M, M].
CutSet cut_set(std::span<const double> x, std::span<const double> c, double bound);

/// Interval of thresholds mapped to one discrete element of a quotient system.
struct QuotientPiece {
  std::size_t coordinate;
  double lo;
  double hi;
  std::size_t element;
};

struct QuotientSystem {
  SetSystem system;
  std::vector<QuotientPiece> pieces;

  /// Element holding the cut, or kNoElement when the cut lies in no set.
  std::size_t element_of(const ThresholdCut& cut) const;
};

/// Discretizes the cut sets of x against every center. Pieces with the same
/// membership pattern are merged when merge_equivalent is set. Throws
/// DegenerateSystem if the resulting system is not valid.
QuotientSystem quotient_system(std::span<const double> x, const CenterSet& centers,
                               bool merge_equivalent = true);

struct ReplayReport {
  /// cells[n]: centers sharing x's cell after n cuts (n = 0..cuts.size()).
  std::vector<std::vector<std::size_t>> cells;
  std::size_t survivor;
};

/// Replays a cut sequence on the tree and on the game over quotient_system(x),
/// checking after every cut that the remaining sets equal the centers in x's
/// cell. Throws ReductionMismatch, DegenerateSystem.
ReplayReport replay_reduction(std::span<const double> x, const CenterSet& centers,
                              std::span<const ThresholdCut> cuts);

}  // namespace excut
