#include "excut/set_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "excut/errors.hpp"

namespace excut {

namespace {

std::vector<std::string> positional_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

}  // namespace

MeasureSpace::MeasureSpace(std::vector<double> weights) {
  labels_ = positional_labels(weights.size());
  weights_ = std::move(weights);
  init();
}

MeasureSpace::MeasureSpace(std::vector<std::string> labels, std::vector<double> weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
  init();
}

void MeasureSpace::init() {
  if (weights_.empty()) throw InvalidMeasure("measure space has no elements");
  if (labels_.size() != weights_.size())
    throw InvalidMeasure("label count does not match weight count");
  std::unordered_set<std::string> seen;
  cumulative_.reserve(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidMeasure("weight of element " + std::to_string(i) +
                           " must be positive and finite");
    if (!seen.insert(labels_[i]).second)
      throw InvalidMeasure("duplicate element label '" + labels_[i] + "'");
    total_ += w;
    cumulative_.push_back(total_);
  }
  if (!std::isfinite(total_)) throw InvalidMeasure("total mass is not finite");
}

double MeasureSpace::measure(std::span<const std::size_t> elements) const {
  double sum = 0.0;
  for (std::size_t e : elements) sum += weights_.at(e);
  return sum;
}

std::size_t sample_element(const MeasureSpace& space, Rng& rng) {
  const double target = rng.uniform_open() * space.total_;
  auto it = std::upper_bound(space.cumulative_.begin(), space.cumulative_.end(), target);
  if (it == space.cumulative_.end()) --it;  // target rounded up to total
  return static_cast<std::size_t>(it - space.cumulative_.begin());
}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t v = 0; v < violations.size(); ++v) {
    const auto& viol = violations[v];
    if (v) out << "; ";
    if (viol.kind == Violation::Kind::zero_measure)
      out << "(a) set " << viol.first << " has zero measure";
    else
      out << "(b) sets " << viol.first << " and " << viol.second
          << " have zero-measure symmetric difference";
  }
  return out.str();
}

SetSystem::SetSystem(MeasureSpace space, std::vector<std::vector<std::size_t>> sets)
    : space_(std::move(space)), sets_(std::move(sets)) {
  if (sets_.empty()) throw std::invalid_argument("set system needs at least one set");
  containing_.resize(space_.size());
  set_measures_.reserve(sets_.size());
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    auto& s = sets_[i];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (std::size_t e : s) {
      if (e >= space_.size())
        throw std::out_of_range("set " + std::to_string(i) + " references element " +
                                std::to_string(e) + " outside the measure space");
      containing_[e].push_back(i);
    }
    set_measures_.push_back(space_.measure(s));
  }
  smallest_ = static_cast<std::size_t>(
      std::min_element(set_measures_.begin(), set_measures_.end()) - set_measures_.begin());

  // With strictly positive element weights, mu(S_i xor S_j) > 0 iff the index
  // sets differ, and mu(S_i) > 0 iff S_i is nonempty.
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (sets_[i].empty() || !(set_measures_[i] > 0.0))
      report_.violations.push_back({Violation::Kind::zero_measure, i, i});
  }
  for (std::size_t i = 0; i < sets_.size(); ++i)
    for (std::size_t j = i + 1; j < sets_.size(); ++j)
      if (sets_[i] == sets_[j])
        report_.violations.push_back({Violation::Kind::zero_symmetric_diff, i, j});
}

bool SetSystem::contains(std::size_t set_index, std::size_t element) const {
  const auto& s = sets_.at(set_index);
  return std::binary_search(s.begin(), s.end(), element);
}

void SetSystem::require_valid() const {
  if (!report_.ok()) throw InvalidSystem("invalid set system: " + report_.describe());
}

SetSystem SetSystem::reordered(std::span<const std::size_t> order) const {
  if (order.size() != sets_.size())
    throw std::invalid_argument("reorder permutation has wrong length");
  std::vector<std::vector<std::size_t>> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(sets_.at(i));
  return SetSystem(space_, std::move(out));
}

ValidationReport validate(const SetSystem& system) { return system.report(); }

}  // namespace excut
