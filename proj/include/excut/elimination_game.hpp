#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "excut/rng.hpp"
#include "excut/set_system.hpp"

namespace excut {

/// Time of an event that never happens (the winner's elimination, an element
/// never drawn). Compares greater than every finite time.
inline constexpr double kNever = std::numeric_limits<double>::infinity();

inline bool is_never(double t) noexcept { return t == kNever; }

/// Rounds: round n happens at time n. Exponential: inter-round gaps are
/// exponential, so every element is hit by an independent Poisson clock.
enum class Clock { rounds, exponential };

struct Draw {
  std::size_t round;  // 1-based
  double time;
  std::size_t element;
};

/// One realization of the game.
struct GameTrace {
  Clock clock = Clock::rounds;
  std::uint64_t seed = 0;
  std::vector<Draw> draws;
  /// remaining[n] is R_n (ascending set indices), n = 0..draws.size().
  /// Empty when history recording was disabled.
  std::vector<std::vector<std::size_t>> remaining;
  /// Set when exactly one set remains after the last draw.
  std::optional<std::size_t> winner;
  std::vector<double> hit_times;   // per element, kNever if not drawn
  std::vector<double> elim_times;  // per set, kNever if never eliminated
};

/// First-hit order of every element together with its hit time.
struct HitSchedule {
  std::vector<std::size_t> order;
  std::vector<double> times;  // ascending, aligned with order
};

/// Samples the first-hit order of all elements: h(w) ~ Exp(mu(w)) independently,
/// sorted ascending. Equivalent in law to drawing unseen elements without
/// replacement with renormalized weights, with gaps ~ Exp(mass of unseen).
HitSchedule sample_first_hits(const MeasureSpace& space, Rng& rng);

/// Applies the elimination rule to an explicit draw sequence. Draws may repeat;
/// a repeated draw never eliminates anything. times must be strictly increasing
/// and aligned with draws.
GameTrace replay_game(const SetSystem& system, std::span<const std::size_t> draws,
                      std::span<const double> times, Clock clock,
                      bool record_history = true);

/// Plays one full game. Every element is drawn exactly once, in first-hit order,
/// so the trace carries the hit time of every element. Throws InvalidSystem.
GameTrace run_game(const SetSystem& system, Rng& rng, Clock clock,
                   bool record_history = true);

/// Literal with-replacement process: each round draws an element with probability
/// mu(w)/mu(Omega); with the exponential clock gaps are Exp(mu(Omega)). Stops as
/// soon as one set remains. Used to cross-check run_game.
GameTrace run_game_with_replacement(const SetSystem& system, Rng& rng, Clock clock,
                                    std::size_t max_rounds = 1'000'000);

/// Draw value for an element outside every set of the system (eliminates nothing).
inline constexpr std::size_t kNoElement = std::numeric_limits<std::size_t>::max();

/// Game restricted to a subsystem I of set indices, driven by a shared draw sequence.
struct LocalGameResult {
  std::vector<std::size_t> subsystem;
  std::optional<std::size_t> winner;
  /// remaining[n] is R_n(I); empty when history recording was disabled.
  std::vector<std::vector<std::size_t>> remaining;
};

/// draws may contain kNoElement.
LocalGameResult play_local_game(const SetSystem& system,
                                std::span<const std::size_t> subsystem,
                                std::span<const std::size_t> draws,
                                bool record_history = true);

struct CoupledGames {
  GameTrace global;
  std::vector<LocalGameResult> local;
};

/// Runs the game on K and on every part of a partition of K with one shared
/// draw sequence. Throws InvalidPartition, InvalidSystem.
CoupledGames run_local_games(const SetSystem& system,
                             const std::vector<std::vector<std::size_t>>& partition,
                             Rng& rng, Clock clock = Clock::exponential);

/// Throws InvalidPartition unless the parts are disjoint and cover 0..k-1.
void check_partition(std::size_t num_sets,
                     const std::vector<std::vector<std::size_t>>& partition);

/// min over the subset of the element hit times; kNever if none was hit.
/// Throws EmptySubset.
double hitting_time(const GameTrace& trace, std::span<const std::size_t> subset);

/// Indices i != smallest_index with e(S_i) >= h(S_*) >= ln(k) / mu(S_i).
/// Throws UnclockedTrace.
std::vector<std::size_t> surprise_sets(const GameTrace& trace, const SetSystem& system);

inline constexpr std::size_t kDefaultOracleCap = 9;

/// Exact winner probabilities, enumerating first-hit orders. The order
/// w_(1)..w_(m) has probability prod_j mu(w_(j)) / sum_{l>=j} mu(w_(l)).
/// Throws TooManyElements above the cap, InvalidSystem.
std::vector<double> exact_winner_distribution(const SetSystem& system,
                                              std::size_t cap = kDefaultOracleCap);

/// sum_i Pr(winner = i) * mu(S_i).
double exact_expected_cost(const SetSystem& system, std::size_t cap = kDefaultOracleCap);

}  // namespace excut
