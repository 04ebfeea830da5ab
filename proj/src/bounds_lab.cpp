#include "excut/bounds_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "excut/errors.hpp"
#include "excut/reference_centers.hpp"
#include "excut/rng.hpp"
#include "excut/threshold_tree.hpp"

namespace excut {

namespace {

Rng trial_rng(std::uint64_t seed, std::size_t trial) {
  return Rng(derive_seed(seed, "trial", 0, trial));
}

double slack(double a, double b = 0.0) {
  return 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

EstimateReport make_report(std::string name, ClaimKind kind, double bound, std::uint64_t seed) {
  EstimateReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.bound = bound;
  r.sigmas = kind == ClaimKind::identity ? kIdentitySigmas : kBoundSigmas;
  r.seed = seed;
  return r;
}

// Zero-tolerance report: estimate is the violation rate.
EstimateReport pathwise_report(std::string name, std::size_t violations, std::size_t trials,
                               std::uint64_t seed) {
  EstimateReport r = make_report(std::move(name), ClaimKind::upper_bound, 0.0, seed);
  r.sigmas = 0.0;
  r.violations = violations;
  finalize(r, trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0, 0.0,
           trials);
  return r;
}

std::vector<std::size_t> set_minus(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::size_t> draw_sequence(const GameTrace& trace) {
  std::vector<std::size_t> draws;
  draws.reserve(trace.draws.size());
  for (const Draw& d : trace.draws) draws.push_back(d.element);
  return draws;
}

}  // namespace

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"kind", kind == ClaimKind::identity ? "identity" : "upper_bound"},
                      {"estimate", estimate},
                      {"std_error", std_error},
                      {"bound", bound},
                      {"sigmas", sigmas},
                      {"abs_tolerance", abs_tolerance},
                      {"trials", trials},
                      {"violations", violations},
                      {"pass", pass},
                      {"low_power", low_power},
                      {"seed", seed}};
  j["reference"] = reference ? nlohmann::json(*reference) : nlohmann::json(nullptr);
  j["exact_std_error"] =
      exact_std_error ? nlohmann::json(*exact_std_error) : nlohmann::json(nullptr);
  if (!note.empty()) j["note"] = note;
  return j;
}

bool evaluate_pass(const EstimateReport& r) {
  if (r.violations != 0) return false;
  // Identity and oracle comparisons never use a band narrower than the one
  // implied by the exact distribution, so a degenerate sample cannot shrink it.
  const double se = std::max(r.std_error, r.exact_std_error.value_or(0.0));
  bool ok = r.kind == ClaimKind::identity
                ? std::abs(r.estimate - r.bound) <= r.sigmas * se + r.abs_tolerance
                : r.estimate <= r.bound + r.sigmas * r.std_error + r.abs_tolerance;
  if (r.reference)
    ok = ok && std::abs(r.estimate - *r.reference) <= kIdentitySigmas * se + r.abs_tolerance;
  return ok;
}

void finalize(EstimateReport& r, double mean, double sample_std, std::size_t trials) {
  r.estimate = mean;
  r.trials = trials;
  r.std_error = trials ? sample_std / std::sqrt(static_cast<double>(trials)) : 0.0;
  r.low_power = trials < kLowPowerTrials;
  r.abs_tolerance = slack(r.bound, r.reference.value_or(0.0));
  r.pass = evaluate_pass(r);
}

double bernoulli_std(std::size_t hits, std::size_t trials) {
  if (trials < 2) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  return std::sqrt(p * (1.0 - p) * n / (n - 1.0));
}

double competitive_bound(std::size_t k) { return 2.0 * std::log(static_cast<double>(k)) + 2.0; }

std::vector<std::size_t> smallest_first_order(const SetSystem& system) {
  std::vector<std::size_t> order{system.smallest_index()};
  for (std::size_t i = 0; i < system.num_sets(); ++i)
    if (i != system.smallest_index()) order.push_back(i);
  return order;
}

EstimateReport check_game_cost_bound(const SetSystem& system, std::size_t trials, std::uint64_t seed,
                              std::size_t oracle_cap) {
  system.require_valid();
  const std::size_t k = system.num_sets();
  const double smallest = system.set_measure(system.smallest_index());
  EstimateReport r = make_report("game_cost", ClaimKind::upper_bound,
                                 competitive_bound(k) * smallest, seed);
  std::optional<double> exact_sd;
  if (system.num_elements() <= oracle_cap) {
    const auto probs = exact_winner_distribution(system, oracle_cap);
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mean += probs[i] * system.set_measure(i);
      second += probs[i] * system.set_measure(i) * system.set_measure(i);
    }
    r.reference = mean;
    exact_sd = std::sqrt(std::max(0.0, second - mean * mean));
  }
  RunningStats stats;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(system, rng, Clock::rounds, false);
    stats.add(system.set_measure(*trace.winner));
  }
  if (exact_sd && trials) r.exact_std_error = *exact_sd / std::sqrt(static_cast<double>(trials));
  finalize(r, stats.mean(), stats.sample_std(), trials);
  return r;
}

double exponential_tail_probability(double rate_x, double rate_y, double level) {
  return rate_x / (rate_x + rate_y) * std::exp(-(rate_x + rate_y) * level);
}

EstimateReport check_exponential_tail(double rate_x, double rate_y, double level,
                                      std::size_t trials, std::uint64_t seed) {
  if (!(rate_x > 0.0) || !(rate_y > 0.0) || !std::isfinite(rate_x) || !std::isfinite(rate_y))
    throw NonPositiveRate("exponential rates must be positive and finite");
  if (!(level >= 0.0)) throw std::invalid_argument("level must be non-negative");
  EstimateReport r = make_report("exponential_tail", ClaimKind::identity,
                                 exponential_tail_probability(rate_x, rate_y, level), seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const double x = rng.exponential(rate_x);
    const double y = rng.exponential(rate_y);
    hits += (y >= x && x >= level);
  }
  const double p = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  if (trials)
    r.exact_std_error = std::sqrt(r.bound * (1.0 - r.bound) / static_cast<double>(trials));
  finalize(r, p, bernoulli_std(hits, trials), trials);
  return r;
}

SurpriseReports check_surprise_bound(const SetSystem& original, std::size_t trials,
                                     std::uint64_t seed) {
  original.require_valid();
  const std::size_t k = original.num_sets();
  if (k < 2) throw std::invalid_argument("surprise bound needs at least two sets");
  const auto order = smallest_first_order(original);
  const SetSystem system = original.reordered(order);
  const double mu1 = system.set_measure(0);

  std::vector<RunningStats> freq(k);
  RunningStats aggregate;
  std::vector<char> flag(k);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(system, rng, Clock::exponential, false);
    std::fill(flag.begin(), flag.end(), 0);
    double mass = 0.0;
    for (std::size_t i : surprise_sets(trace, system)) {
      flag[i] = 1;
      mass += system.set_measure(i);
    }
    for (std::size_t i = 1; i < k; ++i) freq[i].add(flag[i]);
    aggregate.add(mass);
  }

  SurpriseReports out;
  for (std::size_t i = 1; i < k; ++i) {
    const double bound = mu1 / (static_cast<double>(k) * system.set_measure(i));
    EstimateReport r =
        make_report("surprise[" + std::to_string(order[i]) + "]", ClaimKind::upper_bound, bound, seed);
    finalize(r, freq[i].mean(), freq[i].sample_std(), trials);
    out.per_set.push_back(std::move(r));
  }
  out.aggregate = make_report("surprise_mass", ClaimKind::upper_bound, mu1, seed);
  finalize(out.aggregate, aggregate.mean(), aggregate.sample_std(), trials);
  return out;
}

EstimateReport check_surprise_probability(const SetSystem& original, std::size_t set_index,
                                          double target, std::size_t trials, std::uint64_t seed) {
  original.require_valid();
  if (set_index >= original.num_sets() || set_index == original.smallest_index())
    throw std::invalid_argument("set index must name a set other than the smallest");
  EstimateReport r = make_report("surprise_probability[" + std::to_string(set_index) + "]",
                                 ClaimKind::identity, target, seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(original, rng, Clock::exponential, false);
    const auto s = surprise_sets(trace, original);
    hits += std::find(s.begin(), s.end(), set_index) != s.end();
  }
  const double p = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  if (trials)
    r.exact_std_error = std::sqrt(target * (1.0 - target) / static_cast<double>(trials));
  finalize(r, p, bernoulli_std(hits, trials), trials);
  return r;
}

std::vector<double> last_hit_probabilities(std::span<const double> masses) {
  const std::size_t k = masses.size();
  if (k > 30) throw std::invalid_argument("inclusion-exclusion limited to 30 clocks");
  std::vector<double> probs(k, 0.0);
  // Pr(h_i > h_j for all j != i) = int m_i e^{-m_i t} prod_{j != i} (1 - e^{-m_j t}) dt
  //                              = sum_{A} (-1)^{|A|} m_i / (m_i + m(A)).
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) others.push_back(masses[j]);
    double sum = 0.0;
    const std::uint64_t subsets = std::uint64_t{1} << others.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      double rate = masses[i];
      int sign = 1;
      for (std::size_t b = 0; b < others.size(); ++b)
        if (mask >> b & 1U) {
          rate += others[b];
          sign = -sign;
        }
      sum += sign * masses[i] / rate;
    }
    probs[i] = sum;
  }
  return probs;
}

SetSystem disjoint_system(std::span<const double> masses) {
  std::vector<std::vector<std::size_t>> sets(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) sets[i] = {i};
  return SetSystem(MeasureSpace(std::vector<double>(masses.begin(), masses.end())), std::move(sets));
}

EstimateReport check_disjoint_case(std::span<const double> masses, std::size_t trials,
                                   std::uint64_t seed) {
  if (masses.size() < 2) throw std::invalid_argument("disjoint case needs at least two sets");
  for (double m : masses)
    if (!(m > 0.0) || !std::isfinite(m)) throw NonPositiveMass("masses must be positive and finite");
  const SetSystem system = disjoint_system(masses);
  const std::size_t k = system.num_sets();
  const std::size_t smallest = system.smallest_index();

  const auto probs = last_hit_probabilities(masses);
  double expected = 0.0;
  double second = 0.0;
  double total_prob = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    expected += probs[i] * masses[i];
    second += probs[i] * masses[i] * masses[i];
    total_prob += probs[i];
  }
  EstimateReport r = make_report("disjoint_case", ClaimKind::identity, expected, seed);
  if (std::abs(total_prob - 1.0) > 1e-12) ++r.violations;

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < k; ++i)
    if (i != smallest) rest.push_back(i);

  RunningStats stats;
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(system, rng, Clock::exponential, false);
    const std::size_t winner = *trace.winner;
    stats.add(masses[winner]);
    // Last surviving set is the last one hit.
    const std::size_t last_hit = trace.draws.back().element;
    // S_1 wins iff h(S_1) > e(win(I-)); otherwise win(I-) wins.
    const LocalGameResult rest_game = play_local_game(system, rest, draw_sequence(trace), false);
    const std::size_t rest_winner = *rest_game.winner;
    const double h1 = trace.hit_times[smallest];
    const std::size_t predicted = h1 > trace.elim_times[rest_winner] ? smallest : rest_winner;
    if (winner != last_hit || winner != predicted) ++violations;
  }
  r.violations += violations;
  if (trials)
    r.exact_std_error = std::sqrt(std::max(0.0, second - expected * expected) /
                                  static_cast<double>(trials));
  finalize(r, stats.mean(), stats.sample_std(), trials);
  return r;
}

EstimateReport check_element_cost_bound(const SetSystem& original, std::size_t element, std::size_t trials,
                            std::uint64_t seed) {
  original.require_valid();
  const auto order = smallest_first_order(original);
  const SetSystem system = original.reordered(order);
  if (!system.contains(0, element))
    throw ElementNotInS1("element " + std::to_string(element) + " is not in the smallest set");
  const std::size_t k = system.num_sets();
  const double level = std::log(static_cast<double>(k));
  EstimateReport r = make_report("element_cost", ClaimKind::upper_bound,
                                 2.0 * level * system.space().weight(element), seed);

  std::vector<std::size_t> without, with;
  for (std::size_t i = 1; i < k; ++i) (system.contains(i, element) ? with : without).push_back(i);

  RunningStats stats;
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(system, rng, Clock::exponential, false);
    const std::size_t winner = *trace.winner;
    double cost = 0.0;
    if (winner != 0 && hitting_time(trace, system.set(0)) == trace.hit_times[element]) {
      const auto surprises = surprise_sets(trace, system);
      if (std::find(surprises.begin(), surprises.end(), winner) == surprises.end())
        cost = system.set_measure(winner);
    }
    stats.add(cost);

    bool explained = winner == 0;
    const auto draws = draw_sequence(trace);
    for (const auto* part : {&without, &with}) {
      if (part->empty()) continue;
      const auto local = play_local_game(system, *part, draws, false);
      explained = explained || local.winner == winner;
    }
    violations += !explained;
  }
  r.violations = violations;
  finalize(r, stats.mean(), stats.sample_std(), trials);
  return r;
}

EstimateReport check_hitting_order(const SetSystem& original, std::size_t trials, std::uint64_t seed) {
  original.require_valid();
  const SetSystem system = original.reordered(smallest_first_order(original));
  const std::size_t k = system.num_sets();
  std::vector<std::vector<std::size_t>> outside(k);
  for (std::size_t i = 1; i < k; ++i) outside[i] = set_minus(system.set(i), system.set(0));

  std::size_t violations = 0;
  std::size_t checked = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const GameTrace trace = run_game(system, rng, Clock::exponential, false);
    const double h1 = hitting_time(trace, system.set(0));
    bool ok = true;
    for (std::size_t i = 1; i < k; ++i) {
      if (outside[i].empty()) continue;
      const double h = hitting_time(trace, outside[i]);
      if (is_never(h)) continue;
      ++checked;
      ok = ok && std::min(trace.elim_times[i], h1) <= h;
    }
    violations += !ok;
  }
  EstimateReport r = pathwise_report("hitting_order", violations, trials, seed);
  r.note = std::to_string(checked) + " (trace, set) pairs checked";
  return r;
}

EstimateReport check_partition_coupling(const SetSystem& system,
                                        const std::vector<std::vector<std::size_t>>& partition,
                                        std::size_t trials, std::uint64_t seed) {
  system.require_valid();
  check_partition(system.num_sets(), partition);
  auto contained = [](const std::vector<std::size_t>& big, const std::vector<std::size_t>& part,
                      const std::vector<std::size_t>& small_history) {
    // R_n(Y) & X equals R_n(X) or is empty; all lists ascending.
    std::vector<std::size_t> inter;
    std::set_intersection(big.begin(), big.end(), part.begin(), part.end(),
                          std::back_inserter(inter));
    return inter.empty() || inter == small_history;
  };

  // Nested pair X = I_0 inside Y = I_0 + I_1, when there are two parts.
  std::vector<std::size_t> y_pair;
  if (partition.size() >= 2) {
    y_pair = partition[0];
    y_pair.insert(y_pair.end(), partition[1].begin(), partition[1].end());
    std::sort(y_pair.begin(), y_pair.end());
  }

  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    const CoupledGames games = run_local_games(system, partition, rng);
    const GameTrace& global = games.global;
    bool ok = std::any_of(games.local.begin(), games.local.end(),
                          [&](const LocalGameResult& l) { return l.winner == global.winner; });
    for (const auto& local : games.local)
      for (std::size_t n = 0; ok && n < global.remaining.size(); ++n)
        ok = contained(global.remaining[n], local.subsystem, local.remaining[n]);
    if (ok && !y_pair.empty()) {
      const auto y_game = play_local_game(system, y_pair, draw_sequence(global));
      const auto& x = games.local[0];
      for (std::size_t n = 0; ok && n < y_game.remaining.size(); ++n)
        ok = contained(y_game.remaining[n], x.subsystem, x.remaining[n]);
    }
    violations += !ok;
  }
  return pathwise_report("partition_coupling", violations, trials, seed);
}

EstimateReport check_oracle_agreement(const SetSystem& system, std::size_t trials,
                                      std::uint64_t seed, double max_tv, std::size_t oracle_cap) {
  const auto exact = exact_winner_distribution(system, oracle_cap);
  std::vector<std::size_t> counts(system.num_sets(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, t);
    ++counts[*run_game(system, rng, Clock::rounds, false).winner];
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::abs(static_cast<double>(counts[i]) / static_cast<double>(trials) - exact[i]);
  tv *= 0.5;
  EstimateReport r = make_report("oracle_agreement", ClaimKind::upper_bound, max_tv, seed);
  r.sigmas = 0.0;
  finalize(r, tv, 0.0, trials);
  return r;
}

EstimateReport check_competitive_ratio(const PointCloud& data, const CenterSet& centers,
                                       std::size_t trees, std::uint64_t seed) {
  const double optimal = reference_cost(data, centers);
  std::size_t on_center = 0;
  for (std::size_t p = 0; p < data.size(); ++p)
    on_center += l1_distance(data[p], centers[nearest_center(data[p], centers)]) == 0.0;
  if (!(optimal > 0.0))
    throw ZeroOptimal("every point coincides with a center (" + std::to_string(on_center) +
                      " points); the ratio is undefined");
  EstimateReport r = make_report("competitive_ratio", ClaimKind::upper_bound,
                                 competitive_bound(centers.size()), seed);
  RunningStats stats;
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(seed, "tree", 0, t));
    const BuildResult built = build_tree(centers, rng);
    stats.add(tree_cost(built.tree, data, centers, CostMode::proxy) / optimal);
  }
  finalize(r, stats.mean(), stats.sample_std(), trees);
  r.note = std::to_string(on_center) + " points coincide with a center";
  return r;
}

SetSystem nested_system(std::size_t k) {
  std::vector<double> values(k);
  std::iota(values.begin(), values.end(), 1.0);
  const CenterSet centers(PointCloud(k, 1, std::move(values)));
  const double origin = 0.0;
  return quotient_system(std::span<const double>(&origin, 1), centers).system;
}

SetSystem random_overlap_system(std::size_t k, std::size_t num_elements, double density,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random_overlap", k, num_elements));
  for (std::size_t attempt = 0; attempt < 10'000; ++attempt) {
    std::vector<double> weights(num_elements);
    for (double& w : weights) w = 0.5 + 1.5 * rng.uniform_open();
    std::vector<std::vector<std::size_t>> sets(k);
    for (auto& s : sets)
      for (std::size_t e = 0; e < num_elements; ++e)
        if (rng.uniform_open() < density) s.push_back(e);
    SetSystem system(MeasureSpace(std::move(weights)), std::move(sets));
    if (system.report().ok()) return system;
  }
  throw InvalidSystem("could not sample a valid random set system");
}

PointCloud gaussian_mixture(std::size_t n, std::size_t d, std::size_t k, double spread,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, "mixture", k, n));
  std::vector<double> means(k * d);
  for (double& m : means) m = rng.uniform_open(-spread, spread);
  std::vector<double> values(n * d);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t c = static_cast<std::size_t>(rng.below(k));
    for (std::size_t j = 0; j < d; ++j) values[p * d + j] = means[c * d + j] + rng.normal();
  }
  return PointCloud(n, d, std::move(values));
}

RatioInstance mixture_instance(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  const PointCloud raw = gaussian_mixture(n, d, k, 10.0, seed);
  Rng rng(derive_seed(seed, "mixture_seed_centers", k, n));
  const CenterSet init = seed_centers(raw, k, rng);
  KMediansResult fit = lloyd_medians(raw, init);
  const double bound = fit.centers.bound();
  std::vector<double> values(raw.values().begin(), raw.values().end());
  for (double& v : values) v = std::clamp(v, -bound, bound);
  PointCloud data(n, d, std::move(values));
  const double objective = reference_cost(data, fit.centers);
  return {std::move(data), std::move(fit.centers), objective};
}

}  // namespace excut
