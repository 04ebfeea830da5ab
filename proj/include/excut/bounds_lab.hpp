#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "excut/elimination_game.hpp"
#include "excut/geometry.hpp"
#include "excut/set_system.hpp"

namespace excut {

enum class ClaimKind {
  upper_bound,  // estimate <= bound + sigmas * std_error
  identity,     // |estimate - bound| <= sigmas * std_error; bound holds the target
};

/// Outcome of one statistical claim check. pass is a pure function of the
/// other fields; see evaluate_pass().
struct EstimateReport {
  std::string name;
  ClaimKind kind = ClaimKind::upper_bound;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  double sigmas = 3.0;
  /// Floating-point slack added to the sigma band.
  double abs_tolerance = 0.0;
  /// Exact value from an oracle; must agree with the estimate within 4 sigma.
  std::optional<double> reference;
  /// Standard error implied by the exact distribution, when known. Identity and
  /// oracle bands use the larger of this and std_error.
  std::optional<double> exact_std_error;
  std::size_t trials = 0;
  /// Trials on which a pathwise property failed; must be zero.
  std::size_t violations = 0;
  bool pass = false;
  bool low_power = false;
  std::uint64_t seed = 0;
  std::string note;

  nlohmann::json to_json() const;
};

inline constexpr double kBoundSigmas = 3.0;
inline constexpr double kIdentitySigmas = 4.0;
inline constexpr std::size_t kLowPowerTrials = 1000;

bool evaluate_pass(const EstimateReport& report);

/// Fills std_error, trials, low_power and pass from a sample.
void finalize(EstimateReport& report, double mean, double sample_std, std::size_t trials);

/// Sample standard deviation of a 0/1 variable.
double bernoulli_std(std::size_t hits, std::size_t trials);

/// 2 ln k + 2.
double competitive_bound(std::size_t k);

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double sample_std() const noexcept {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Set order putting the smallest set first; the others keep their relative order.
std::vector<std::size_t> smallest_first_order(const SetSystem& system);

/// E[mu(win)] <= (2 ln k + 2) min_i mu(S_i). Compared with exact_expected_cost
/// when the system has at most oracle_cap elements.
EstimateReport check_game_cost_bound(const SetSystem& system, std::size_t trials, std::uint64_t seed,
                              std::size_t oracle_cap = kDefaultOracleCap);

/// Pr(Y >= X >= T) = lx/(lx+ly) exp(-(lx+ly) T) for independent exponentials.
/// exact_std_error is the binomial one under the closed-form target.
EstimateReport check_exponential_tail(double rate_x, double rate_y, double level,
                                      std::size_t trials, std::uint64_t seed);
double exponential_tail_probability(double rate_x, double rate_y, double level);

struct SurpriseReports {
  std::vector<EstimateReport> per_set;  // one per set other than the smallest
  EstimateReport aggregate;             // sum_i Pr(surprise) mu(S_i) <= mu(S_1)
};

/// Pr(S_i surprise) <= (1/k) mu(S_1)/mu(S_i). Requires k >= 2.
SurpriseReports check_surprise_bound(const SetSystem& system, std::size_t trials,
                                     std::uint64_t seed);

/// Identity check of Pr(S_i surprise) against a known value; exact_std_error
/// is the binomial one under the target.
EstimateReport check_surprise_probability(const SetSystem& system, std::size_t set_index,
                                          double target, std::size_t trials, std::uint64_t seed);

/// Pr(set i is hit last) among independent exponential clocks with the given
/// rates, by inclusion-exclusion over the other clocks.
std::vector<double> last_hit_probabilities(std::span<const double> masses);

/// Disjoint singleton sets: Monte Carlo expected cost against the closed form,
/// plus a per-trial check of the winner characterization. exact_std_error comes
/// from the closed-form winner distribution.
EstimateReport check_disjoint_case(std::span<const double> masses, std::size_t trials,
                                   std::uint64_t seed);

/// E[cost(w)] <= 2 ln(k) mu(w) for w in the smallest set, plus a per-trial check
/// that win(K) is S_1, win(I-) or win(I+). Throws ElementNotInS1.
EstimateReport check_element_cost_bound(const SetSystem& system, std::size_t element, std::size_t trials,
                            std::uint64_t seed);

/// Zero-tolerance pathwise checks on clocked traces:
/// min(e(S_i), h(S_1)) <= h(S_i \ S_1) whenever S_i \ S_1 is nonempty.
EstimateReport check_hitting_order(const SetSystem& system, std::size_t trials, std::uint64_t seed);

/// win(K) is one of the part winners, and R_n(K) & I_j is R_n(I_j) or empty
/// at every round, for every part I_j.
EstimateReport check_partition_coupling(const SetSystem& system,
                                        const std::vector<std::vector<std::size_t>>& partition,
                                        std::size_t trials, std::uint64_t seed);

/// Total-variation distance between the Monte Carlo winner distribution and
/// exact_winner_distribution; pass iff below max_tv.
EstimateReport check_oracle_agreement(const SetSystem& system, std::size_t trials,
                                      std::uint64_t seed, double max_tv = 0.02,
                                      std::size_t oracle_cap = kDefaultOracleCap);

/// E[proxy tree cost] / sum_x min_i ||x - c^i||_1 <= 2 ln k + 2 over independent
/// trees. Throws ZeroOptimal when every point sits on a center.
EstimateReport check_competitive_ratio(const PointCloud& data, const CenterSet& centers,
                                       std::size_t trees, std::uint64_t seed);

// Instance families.

/// S_i = {i} with mu(i) = masses[i].
SetSystem disjoint_system(std::span<const double> masses);
/// Cut sets of x = 0 against centers 1..k on the line: S_i = [0, i), nested.
SetSystem nested_system(std::size_t k);
/// num_elements elements with weights in [0.5, 2); each set holds each element
/// with the given probability. Resamples until valid.
SetSystem random_overlap_system(std::size_t k, std::size_t num_elements, double density,
                                std::uint64_t seed);

/// n points around k means drawn uniformly from [-spread, spread]^d, unit
/// Gaussian noise, cluster labels uniform.
PointCloud gaussian_mixture(std::size_t n, std::size_t d, std::size_t k, double spread,
                            std::uint64_t seed);

/// Data, reference k-medians centers, and the data clamped into [-M, M]^d.
struct RatioInstance {
  PointCloud data;  // clamped into the centers' bounding cube
  CenterSet centers;
  double objective;  // sum_x min_i ||x - c^i||_1 on the clamped data
};

/// gaussian_mixture -> seed_centers -> lloyd_medians -> clamp.
RatioInstance mixture_instance(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed);

}  // namespace excut
