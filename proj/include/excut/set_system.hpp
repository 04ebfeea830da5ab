#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "excut/rng.hpp"

namespace excut {

/// Discrete finite measure space: an ordered list of labelled elements with
/// strictly positive finite weights.
class MeasureSpace {
 public:
  /// Elements are labelled by their 0-based position.
  explicit MeasureSpace(std::vector<double> weights);
  MeasureSpace(std::vector<std::string> labels, std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t element) const { return weights_.at(element); }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::string& label(std::size_t element) const { return labels_.at(element); }
  double total() const noexcept { return total_; }

  /// Sum of weights over a list of element indices.
  double measure(std::span<const std::size_t> elements) const;

 private:
  void init();
  friend std::size_t sample_element(const MeasureSpace&, Rng&);

  std::vector<std::string> labels_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// Draws one element with probability weight / total. Deterministic given rng state.
std::size_t sample_element(const MeasureSpace& space, Rng& rng);

/// One failed validity condition.
struct Violation {
  enum class Kind {
    zero_measure,         // (a) mu(S_i) = 0
    zero_symmetric_diff,  // (b) mu(S_i xor S_j) = 0
  };
  Kind kind;
  std::size_t first;
  std::size_t second;  // equal to first for zero_measure

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string describe() const;
};

/// k indexed subsets S_0..S_{k-1} of a measure space. Membership lists are
/// stored sorted and deduplicated. Construction never rejects an invalid
/// system; validity is computed once and exposed through validate().
class SetSystem {
 public:
  SetSystem(MeasureSpace space, std::vector<std::vector<std::size_t>> sets);

  const MeasureSpace& space() const noexcept { return space_; }
  std::size_t num_sets() const noexcept { return sets_.size(); }
  std::size_t num_elements() const noexcept { return space_.size(); }

  std::span<const std::size_t> set(std::size_t i) const { return sets_.at(i); }
  const std::vector<std::vector<std::size_t>>& sets() const noexcept { return sets_; }

  /// Indices of the sets containing a given element, ascending.
  std::span<const std::size_t> containing(std::size_t element) const {
    return containing_.at(element);
  }
  bool contains(std::size_t set_index, std::size_t element) const;

  double set_measure(std::size_t i) const { return set_measures_.at(i); }
  std::span<const double> set_measures() const noexcept { return set_measures_; }

  /// Index attaining min mu(S_i); lowest index on ties.
  std::size_t smallest_index() const noexcept { return smallest_; }

  const ValidationReport& report() const noexcept { return report_; }

  /// Throws InvalidSystem if the validity conditions fail.
  void require_valid() const;

  /// Same space, sets listed in the given order.
  SetSystem reordered(std::span<const std::size_t> order) const;

 private:
  MeasureSpace space_;
  std::vector<std::vector<std::size_t>> sets_;
  std::vector<std::vector<std::size_t>> containing_;
  std::vector<double> set_measures_;
  std::size_t smallest_ = 0;
  ValidationReport report_;
};

/// Checks mu(S_i) > 0 for all i and mu(S_i xor S_j) > 0 for all i != j.
ValidationReport validate(const SetSystem& system);

}  // namespace excut
