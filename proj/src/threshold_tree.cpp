#include "excut/threshold_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "excut/elimination_game.hpp"
#include "excut/errors.hpp"

namespace excut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

}  // namespace

bool Box::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!(x[j] > lower[j] && x[j] <= upper[j])) return false;
  return true;
}

ThresholdTree::ThresholdTree(std::size_t num_centers, std::size_t dim)
    : num_centers_(num_centers), dim_(dim) {
  Node root;
  root.centers.resize(num_centers);
  for (std::size_t i = 0; i < num_centers; ++i) root.centers[i] = i;
  nodes_.push_back(std::move(root));
}

std::size_t ThresholdTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

bool ThresholdTree::complete() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const Node& n) { return !n.is_leaf() || n.centers.size() == 1; });
}

std::size_t ThresholdTree::leaf_of(std::span<const double> x) const {
  std::size_t u = 0;
  while (!nodes_[u].is_leaf()) u = nodes_[u].cut->goes_left(x) ? nodes_[u].left : nodes_[u].right;
  return u;
}

std::size_t ThresholdTree::assign(std::span<const double> x) const {
  const Node& leaf = nodes_[leaf_of(x)];
  if (leaf.centers.size() != 1) throw std::logic_error("tree is not complete");
  return leaf.centers.front();
}

std::vector<std::size_t> ThresholdTree::leaves() const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (nodes_[u].is_leaf()) {
      out.push_back(u);
    } else {
      stack.push_back(nodes_[u].right);
      stack.push_back(nodes_[u].left);
    }
  }
  return out;
}

Box ThresholdTree::cell(std::size_t node) const {
  Box box{std::vector<double>(dim_, -kInf), std::vector<double>(dim_, kInf)};
  std::size_t child = node;
  while (auto parent = nodes_.at(child).parent) {
    const Node& p = nodes_[*parent];
    const ThresholdCut& cut = *p.cut;
    if (p.left == child)
      box.upper[cut.coordinate] = std::min(box.upper[cut.coordinate], cut.threshold);
    else
      box.lower[cut.coordinate] = std::max(box.lower[cut.coordinate], cut.threshold);
    child = *parent;
  }
  return box;
}

bool ThresholdTree::split(std::size_t leaf, const ThresholdCut& cut, const CenterSet& centers) {
  if (!nodes_.at(leaf).is_leaf()) throw std::logic_error("split on an internal node");
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t c : nodes_[leaf].centers) (cut.goes_left(centers[c]) ? left : right).push_back(c);
  if (left.empty() || right.empty()) return false;

  Node l;
  l.parent = leaf;
  l.centers = std::move(left);
  Node r;
  r.parent = leaf;
  r.centers = std::move(right);
  nodes_[leaf].cut = cut;
  nodes_[leaf].left = nodes_.size();
  nodes_[leaf].right = nodes_.size() + 1;
  nodes_.push_back(std::move(l));
  nodes_.push_back(std::move(r));
  return true;
}

nlohmann::json ThresholdTree::to_json() const {
  auto emit = [&](auto&& self, std::size_t u) -> nlohmann::json {
    const Node& n = nodes_[u];
    if (n.is_leaf()) {
      if (n.centers.size() == 1) return {{"center", n.centers.front()}};
      return {{"centers", n.centers}};
    }
    return {{"cut", {{"j", n.cut->coordinate}, {"theta", n.cut->threshold}}},
            {"left", self(self, n.left)},
            {"right", self(self, n.right)}};
  };
  return emit(emit, 0);
}

ThresholdTree ThresholdTree::from_json(const nlohmann::json& j, std::size_t dim) {
  ThresholdTree tree(0, dim);
  tree.nodes_.clear();
  auto parse = [&](auto&& self, const nlohmann::json& obj,
                   std::optional<std::size_t> parent) -> std::size_t {
    if (!obj.is_object()) throw ParseError("tree node must be an object");
    const std::size_t u = tree.nodes_.size();
    tree.nodes_.emplace_back();
    tree.nodes_[u].parent = parent;
    if (obj.contains("center")) {
      if (!obj["center"].is_number_unsigned()) throw ParseError("leaf center must be an index");
      tree.nodes_[u].centers = {obj["center"].get<std::size_t>()};
      return u;
    }
    if (!obj.contains("cut") || !obj.contains("left") || !obj.contains("right"))
      throw ParseError("internal node needs cut, left and right");
    const auto& cut = obj["cut"];
    if (!cut.is_object() || !cut.contains("j") || !cut.contains("theta") ||
        !cut["j"].is_number_unsigned() || !cut["theta"].is_number())
      throw ParseError("cut must be {\"j\": index, \"theta\": number}");
    ThresholdCut parsed{cut["j"].get<std::size_t>(), cut["theta"].get<double>()};
    if (parsed.coordinate >= dim) throw ParseError("cut coordinate out of range");
    if (!std::isfinite(parsed.threshold)) throw ParseError("cut threshold must be finite");
    const std::size_t left = self(self, obj["left"], u);
    const std::size_t right = self(self, obj["right"], u);
    Node& n = tree.nodes_[u];
    n.cut = parsed;
    n.left = left;
    n.right = right;
    n.centers = tree.nodes_[left].centers;
    n.centers.insert(n.centers.end(), tree.nodes_[right].centers.begin(),
                     tree.nodes_[right].centers.end());
    std::sort(n.centers.begin(), n.centers.end());
    return u;
  };
  try {
    parse(parse, j, std::nullopt);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed tree JSON: ") + e.what());
  }
  const auto& all = tree.nodes_.front().centers;
  tree.num_centers_ = all.size();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i] != i) throw ParseError("leaf centers are not a permutation of 0..k-1");
  return tree;
}

void ThresholdTree::check_invariants(const CenterSet& centers) const {
  const auto leaf_ids = leaves();
  if (leaf_ids.size() != num_centers_) throw std::logic_error("leaf count differs from k");
  std::vector<int> seen(num_centers_, 0);
  for (std::size_t leaf : leaf_ids) {
    const Node& n = nodes_[leaf];
    if (n.centers.size() != 1) throw std::logic_error("leaf does not hold exactly one center");
    if (seen.at(n.centers.front())++) throw std::logic_error("center appears in two leaves");
    if (!cell(leaf).contains(centers[n.centers.front()]))
      throw std::logic_error("center violates a cut on its root-to-leaf path");
  }
  for (const Node& n : nodes_) {
    if (n.is_leaf()) continue;
    auto l = nodes_[n.left].centers;
    auto r = nodes_[n.right].centers;
    if (l.empty() || r.empty()) throw std::logic_error("empty child");
    l.insert(l.end(), r.begin(), r.end());
    std::sort(l.begin(), l.end());
    auto parent = n.centers;
    std::sort(parent.begin(), parent.end());
    if (l != parent) throw std::logic_error("children do not partition the parent's centers");
  }
}

TreeBuilder::TreeBuilder(const CenterSet& centers)
    : centers_(centers), tree_(centers.size(), centers.dim()) {
  if (centers.size() > 1) active_.push_back(0);
}

bool TreeBuilder::apply(const ThresholdCut& cut) {
  bool any = false;
  std::vector<std::size_t> next;
  next.reserve(active_.size() + 2);
  for (std::size_t leaf : active_) {
    if (tree_.split(leaf, cut, centers_)) {
      any = true;
      for (std::size_t child : {tree_.node(leaf).left, tree_.node(leaf).right})
        if (tree_.node(child).centers.size() > 1) next.push_back(child);
    } else {
      next.push_back(leaf);
    }
  }
  active_ = std::move(next);
  return any;
}

ThresholdCut sample_cut(std::size_t dim, double bound, Rng& rng) {
  ThresholdCut cut;
  cut.coordinate = static_cast<std::size_t>(rng.below(dim));
  cut.threshold = rng.uniform_open(-bound, bound);
  return cut;
}

BuildResult build_tree(const CenterSet& centers, Rng& rng, std::size_t max_cuts) {
  TreeBuilder builder(centers);
  std::vector<ThresholdCut> cuts;
  while (!builder.done()) {
    if (cuts.size() >= max_cuts)
      throw CutLimitExceeded("no separation after " + std::to_string(max_cuts) + " cuts");
    cuts.push_back(sample_cut(centers.dim(), centers.bound(), rng));
    builder.apply(cuts.back());
  }
  return {std::move(builder).release(), std::move(cuts)};
}

std::vector<std::size_t> assign_points(const ThresholdTree& tree, const PointCloud& data) {
  if (data.dim() != tree.dim()) throw ShapeMismatch("data and tree differ in dimension");
  std::vector<std::size_t> out(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) out[p] = tree.assign(data[p]);
  return out;
}

double tree_cost(const ThresholdTree& tree, const PointCloud& data, const CenterSet& centers,
                 CostMode mode) {
  if (data.dim() != centers.dim() || tree.num_centers() != centers.size())
    throw ShapeMismatch("tree, data and centers do not match");
  const auto assignment = assign_points(tree, data);
  if (mode == CostMode::proxy) {
    double sum = 0.0;
    for (std::size_t p = 0; p < data.size(); ++p)
      sum += l1_distance(data[p], centers[assignment[p]]);
    return sum;
  }
  std::vector<std::vector<std::size_t>> clusters(centers.size());
  for (std::size_t p = 0; p < data.size(); ++p) clusters[assignment[p]].push_back(p);
  double sum = 0.0;
  std::vector<double> column;
  for (const auto& members : clusters) {
    if (members.empty()) continue;
    for (std::size_t j = 0; j < data.dim(); ++j) {
      column.clear();
      for (std::size_t p : members) column.push_back(data[p][j]);
      const double median = lower_median(column);
      for (std::size_t p : members) sum += std::abs(data[p][j] - median);
    }
  }
  return sum;
}

double CutSet::measure() const {
  double sum = 0.0;
  for (const auto& iv : intervals) sum += iv.hi - iv.lo;
  return sum;
}

bool CutSet::contains(const ThresholdCut& cut) const {
  return std::any_of(intervals.begin(), intervals.end(), [&](const CutInterval& iv) {
    return iv.coordinate == cut.coordinate && cut.threshold >= iv.lo && cut.threshold < iv.hi;
  });
}

CutSet cut_set(std::span<const double> x, std::span<const double> c, double bound) {
  if (x.size() != c.size()) throw ShapeMismatch("point and center differ in dimension");
  CutSet out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = std::max(std::min(x[j], c[j]), -bound);
    const double hi = std::min(std::max(x[j], c[j]), bound);
    if (hi > lo) out.intervals.push_back({j, lo, hi});
  }
  return out;
}

std::size_t QuotientSystem::element_of(const ThresholdCut& cut) const {
  for (const auto& piece : pieces)
    if (piece.coordinate == cut.coordinate && cut.threshold >= piece.lo &&
        cut.threshold < piece.hi)
      return piece.element;
  return kNoElement;
}

QuotientSystem quotient_system(std::span<const double> x, const CenterSet& centers,
                               bool merge_equivalent) {
  const std::size_t d = centers.dim();
  const std::size_t k = centers.size();
  if (x.size() != d) throw ShapeMismatch("point and centers differ in dimension");
  const double bound = centers.bound();
  auto clamp = [bound](double v) { return std::clamp(v, -bound, bound); };

  std::vector<double> weights;
  std::vector<std::vector<std::size_t>> patterns;
  std::map<std::vector<std::size_t>, std::size_t> element_by_pattern;
  std::vector<QuotientPiece> pieces;

  std::vector<double> breaks;
  for (std::size_t j = 0; j < d; ++j) {
    breaks.assign({clamp(x[j])});
    for (std::size_t i = 0; i < k; ++i) breaks.push_back(clamp(centers[i][j]));
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double lo = breaks[b];
      const double hi = breaks[b + 1];
      const double mid = lo + 0.5 * (hi - lo);
      std::vector<std::size_t> pattern;
      for (std::size_t i = 0; i < k; ++i) {
        const double a = std::min(x[j], centers[i][j]);
        const double z = std::max(x[j], centers[i][j]);
        if (mid >= a && mid < z) pattern.push_back(i);
      }
      if (pattern.empty()) continue;
      std::size_t element;
      auto found = merge_equivalent ? element_by_pattern.find(pattern) : element_by_pattern.end();
      if (found != element_by_pattern.end()) {
        element = found->second;
        weights[element] += hi - lo;
      } else {
        element = weights.size();
        weights.push_back(hi - lo);
        if (merge_equivalent) element_by_pattern.emplace(pattern, element);
        patterns.push_back(std::move(pattern));
      }
      pieces.push_back({j, lo, hi, element});
    }
  }
  if (weights.empty())
    throw DegenerateSystem("point coincides with every center; all cut sets are empty");

  std::vector<std::vector<std::size_t>> sets(k);
  for (std::size_t e = 0; e < patterns.size(); ++e)
    for (std::size_t i : patterns[e]) sets[i].push_back(e);

  SetSystem system(MeasureSpace(std::move(weights)), std::move(sets));
  if (!system.report().ok())
    throw DegenerateSystem("quotient system is not valid: " + system.report().describe());
  return {std::move(system), std::move(pieces)};
}

ReplayReport replay_reduction(std::span<const double> x, const CenterSet& centers,
                              std::span<const ThresholdCut> cuts) {
  const QuotientSystem quotient = quotient_system(x, centers);
  std::vector<std::size_t> draws;
  draws.reserve(cuts.size());
  for (const auto& cut : cuts) draws.push_back(quotient.element_of(cut));

  std::vector<std::size_t> everyone(centers.size());
  for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
  const LocalGameResult game = play_local_game(quotient.system, everyone, draws);

  ReplayReport report;
  TreeBuilder builder(centers);
  auto cell_centers = [&] {
    auto cs = builder.tree().node(builder.tree().leaf_of(x)).centers;
    std::sort(cs.begin(), cs.end());
    return cs;
  };
  report.cells.push_back(cell_centers());
  for (std::size_t n = 0; n <= cuts.size(); ++n) {
    if (n > 0) {
      builder.apply(cuts[n - 1]);
      report.cells.push_back(cell_centers());
    }
    if (report.cells[n] != game.remaining[n])
      throw ReductionMismatch("after " + std::to_string(n) + " cuts the cell holds " +
                              join(report.cells[n]) + " but the game keeps " +
                              join(game.remaining[n]));
  }
  if (report.cells.back().size() != 1)
    throw std::invalid_argument("cut sequence does not isolate the point's center");
  report.survivor = report.cells.back().front();
  if (!game.winner || *game.winner != report.survivor)
    throw ReductionMismatch("game winner differs from the assigned center");
  return report;
}

}  // namespace excut
