#include "excut/elimination_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "excut/errors.hpp"

namespace excut {

namespace {

// Remaining-set bookkeeping for a game in a subsystem I of K.
class Remaining {
 public:
  Remaining(const SetSystem& system, std::span<const std::size_t> subsystem)
      : system_(system), alive_(system.num_sets(), 0), count_(0) {
    for (std::size_t i : subsystem) {
      if (i >= system.num_sets()) throw std::out_of_range("subsystem index out of range");
      if (!alive_[i]) {
        alive_[i] = 1;
        ++count_;
      }
    }
  }

  // R_n = R_{n-1} \ {S : w in S} unless every remaining set contains w.
  // Calls on_eliminated(i) for every removed set.
  template <typename F>
  void apply(std::size_t element, F&& on_eliminated) {
    if (element == kNoElement) return;
    std::size_t hits = 0;
    for (std::size_t i : system_.containing(element)) hits += alive_[i];
    if (hits == 0 || hits == count_) return;
    for (std::size_t i : system_.containing(element)) {
      if (alive_[i]) {
        alive_[i] = 0;
        on_eliminated(i);
      }
    }
    count_ -= hits;
  }

  std::size_t count() const noexcept { return count_; }
  bool alive(std::size_t i) const noexcept { return alive_[i] != 0; }

  std::optional<std::size_t> sole_survivor() const {
    if (count_ != 1) return std::nullopt;
    return static_cast<std::size_t>(std::find(alive_.begin(), alive_.end(), 1) -
                                    alive_.begin());
  }

  std::vector<std::size_t> snapshot() const {
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < alive_.size(); ++i)
      if (alive_[i]) out.push_back(i);
    return out;
  }

 private:
  const SetSystem& system_;
  std::vector<char> alive_;
  std::size_t count_;
};

std::vector<std::size_t> all_sets(std::size_t k) {
  std::vector<std::size_t> all(k);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

HitSchedule sample_first_hits(const MeasureSpace& space, Rng& rng) {
  const std::size_t m = space.size();
  std::vector<double> hit(m);
  for (std::size_t e = 0; e < m; ++e) hit[e] = rng.exponential(space.weight(e));
  HitSchedule schedule;
  schedule.order.resize(m);
  std::iota(schedule.order.begin(), schedule.order.end(), std::size_t{0});
  std::sort(schedule.order.begin(), schedule.order.end(),
            [&](std::size_t a, std::size_t b) { return hit[a] < hit[b] || (hit[a] == hit[b] && a < b); });
  schedule.times.reserve(m);
  for (std::size_t e : schedule.order) schedule.times.push_back(hit[e]);
  return schedule;
}

GameTrace replay_game(const SetSystem& system, std::span<const std::size_t> draws,
                      std::span<const double> times, Clock clock, bool record_history) {
  if (draws.size() != times.size())
    throw std::invalid_argument("draws and times must have equal length");
  GameTrace trace;
  trace.clock = clock;
  trace.hit_times.assign(system.num_elements(), kNever);
  trace.elim_times.assign(system.num_sets(), kNever);
  trace.draws.reserve(draws.size());

  const auto everything = all_sets(system.num_sets());
  Remaining remaining(system, everything);
  if (record_history) {
    trace.remaining.reserve(draws.size() + 1);
    trace.remaining.push_back(remaining.snapshot());
  }
  double previous = -kNever;
  for (std::size_t n = 0; n < draws.size(); ++n) {
    const std::size_t element = draws[n];
    const double t = times[n];
    if (element >= system.num_elements()) throw std::out_of_range("draw outside the measure space");
    if (!(t > previous)) throw std::invalid_argument("draw times must be strictly increasing");
    previous = t;
    trace.draws.push_back({n + 1, t, element});
    if (is_never(trace.hit_times[element])) trace.hit_times[element] = t;
    remaining.apply(element, [&](std::size_t i) { trace.elim_times[i] = t; });
    if (record_history) trace.remaining.push_back(remaining.snapshot());
  }
  trace.winner = remaining.sole_survivor();
  return trace;
}

GameTrace run_game(const SetSystem& system, Rng& rng, Clock clock, bool record_history) {
  system.require_valid();
  HitSchedule schedule = sample_first_hits(system.space(), rng);
  if (clock == Clock::rounds)
    for (std::size_t n = 0; n < schedule.times.size(); ++n)
      schedule.times[n] = static_cast<double>(n + 1);
  GameTrace trace = replay_game(system, schedule.order, schedule.times, clock, record_history);
  trace.seed = rng.seed();
  return trace;
}

GameTrace run_game_with_replacement(const SetSystem& system, Rng& rng, Clock clock,
                                    std::size_t max_rounds) {
  system.require_valid();
  GameTrace trace;
  trace.clock = clock;
  trace.seed = rng.seed();
  trace.hit_times.assign(system.num_elements(), kNever);
  trace.elim_times.assign(system.num_sets(), kNever);
  const auto everything = all_sets(system.num_sets());
  Remaining remaining(system, everything);
  trace.remaining.push_back(remaining.snapshot());
  const double rate = system.space().total();
  double t = 0.0;
  for (std::size_t n = 1; remaining.count() > 1; ++n) {
    if (n > max_rounds) throw std::runtime_error("with-replacement game exceeded round cap");
    const std::size_t element = sample_element(system.space(), rng);
    t = clock == Clock::exponential ? t + rng.exponential(rate) : static_cast<double>(n);
    trace.draws.push_back({n, t, element});
    if (is_never(trace.hit_times[element])) trace.hit_times[element] = t;
    remaining.apply(element, [&](std::size_t i) { trace.elim_times[i] = t; });
    trace.remaining.push_back(remaining.snapshot());
  }
  trace.winner = remaining.sole_survivor();
  return trace;
}

LocalGameResult play_local_game(const SetSystem& system,
                                std::span<const std::size_t> subsystem,
                                std::span<const std::size_t> draws, bool record_history) {
  LocalGameResult result;
  result.subsystem.assign(subsystem.begin(), subsystem.end());
  std::sort(result.subsystem.begin(), result.subsystem.end());
  Remaining remaining(system, result.subsystem);
  if (record_history) {
    result.remaining.reserve(draws.size() + 1);
    result.remaining.push_back(remaining.snapshot());
  }
  for (std::size_t element : draws) {
    remaining.apply(element, [](std::size_t) {});
    if (record_history) result.remaining.push_back(remaining.snapshot());
  }
  result.winner = remaining.sole_survivor();
  return result;
}

void check_partition(std::size_t num_sets,
                     const std::vector<std::vector<std::size_t>>& partition) {
  std::vector<int> seen(num_sets, 0);
  for (const auto& part : partition) {
    if (part.empty()) throw InvalidPartition("partition contains an empty part");
    for (std::size_t i : part) {
      if (i >= num_sets)
        throw InvalidPartition("partition index " + std::to_string(i) + " out of range");
      if (seen[i]++)
        throw InvalidPartition("set " + std::to_string(i) + " appears in two parts");
    }
  }
  for (std::size_t i = 0; i < num_sets; ++i)
    if (!seen[i]) throw InvalidPartition("set " + std::to_string(i) + " is not covered");
}

CoupledGames run_local_games(const SetSystem& system,
                             const std::vector<std::vector<std::size_t>>& partition,
                             Rng& rng, Clock clock) {
  check_partition(system.num_sets(), partition);
  CoupledGames games;
  games.global = run_game(system, rng, clock);
  std::vector<std::size_t> draws;
  draws.reserve(games.global.draws.size());
  for (const Draw& d : games.global.draws) draws.push_back(d.element);
  games.local.reserve(partition.size());
  for (const auto& part : partition) games.local.push_back(play_local_game(system, part, draws));
  return games;
}

double hitting_time(const GameTrace& trace, std::span<const std::size_t> subset) {
  if (subset.empty()) throw EmptySubset("hitting time of an empty subset");
  double h = kNever;
  for (std::size_t e : subset) h = std::min(h, trace.hit_times.at(e));
  return h;
}

std::vector<std::size_t> surprise_sets(const GameTrace& trace, const SetSystem& system) {
  if (trace.clock != Clock::exponential)
    throw UnclockedTrace("surprise sets need exponential-clock times");
  const std::size_t k = system.num_sets();
  std::vector<std::size_t> out;
  if (k < 2) return out;
  const double level = std::log(static_cast<double>(k));
  const std::size_t smallest = system.smallest_index();
  const double h_smallest = hitting_time(trace, system.set(smallest));
  for (std::size_t i = 0; i < k; ++i) {
    if (i == smallest) continue;
    if (trace.elim_times.at(i) >= h_smallest && h_smallest >= level / system.set_measure(i))
      out.push_back(i);
  }
  return out;
}

namespace {

class WinnerEnumerator {
 public:
  explicit WinnerEnumerator(const SetSystem& system)
      : system_(system), probs_(system.num_sets(), 0.0), unseen_(system.num_elements(), 1) {}

  std::vector<double> run() {
    const auto everything = all_sets(system_.num_sets());
    Remaining remaining(system_, everything);
    if (auto w = remaining.sole_survivor()) {
      probs_[*w] = 1.0;
      return probs_;
    }
    descend(remaining, 1.0);
    return probs_;
  }

 private:
  void descend(const Remaining& remaining, double prefix) {
    double unseen_mass = 0.0;
    for (std::size_t e = 0; e < unseen_.size(); ++e)
      if (unseen_[e]) unseen_mass += system_.space().weight(e);
    for (std::size_t e = 0; e < unseen_.size(); ++e) {
      if (!unseen_[e]) continue;
      const double p = prefix * system_.space().weight(e) / unseen_mass;
      Remaining next = remaining;
      next.apply(e, [](std::size_t) {});
      if (auto w = next.sole_survivor()) {
        // Every completion of this prefix yields the same winner; their
        // probabilities sum to the prefix probability.
        probs_[*w] += p;
        continue;
      }
      unseen_[e] = 0;
      descend(next, p);
      unseen_[e] = 1;
    }
  }

  const SetSystem& system_;
  std::vector<double> probs_;
  std::vector<char> unseen_;
};

}  // namespace

std::vector<double> exact_winner_distribution(const SetSystem& system, std::size_t cap) {
  system.require_valid();
  if (system.num_elements() > cap)
    throw TooManyElements("exact oracle supports at most " + std::to_string(cap) +
                          " elements, got " + std::to_string(system.num_elements()));
  return WinnerEnumerator(system).run();
}

double exact_expected_cost(const SetSystem& system, std::size_t cap) {
  const auto probs = exact_winner_distribution(system, cap);
  double cost = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cost += probs[i] * system.set_measure(i);
  return cost;
}

}  // namespace excut
