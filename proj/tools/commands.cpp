#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "excut/errors.hpp"
#include "excut/io.hpp"
#include "excut/reference_centers.hpp"
#include "excut/rng.hpp"
#include "excut/threshold_tree.hpp"

namespace excut::cli {

namespace {

template <class T>
T config_value(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("config key \"") + key + "\" has the wrong type");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command},   {"input", c.input.string()},
                      {"k", c.k},               {"seed", c.seed},
                      {"trials", c.trials},     {"trees", c.trees},
                      {"oracle_cap", c.oracle_cap}, {"header", c.header},
                      {"emit_traces", c.emit_traces}};
  j["bound_sigmas"] = c.bound_sigmas ? nlohmann::json(*c.bound_sigmas) : nlohmann::json(nullptr);
  j["identity_sigmas"] =
      c.identity_sigmas ? nlohmann::json(*c.identity_sigmas) : nlohmann::json(nullptr);
  return j;
}

void apply_overrides(EstimateReport& r, const RunConfig& c) {
  // Pathwise and distance checks carry sigmas == 0 and are never widened.
  if (r.sigmas == 0.0) return;
  if (r.kind == ClaimKind::upper_bound && c.bound_sigmas) r.sigmas = *c.bound_sigmas;
  if (r.kind == ClaimKind::identity && c.identity_sigmas) r.sigmas = *c.identity_sigmas;
  r.pass = evaluate_pass(r);
}

// Consecutive job ids give every battery entry its own seed stream.
class Battery {
 public:
  explicit Battery(const RunConfig& c) : config_(c) {}

  std::uint64_t next_seed() { return derive_seed(config_.seed, "verify", job_++); }

  void add(EstimateReport r, const std::string& name) {
    r.name = name;
    apply_overrides(r, config_);
    reports_.push_back(std::move(r));
  }

  std::vector<EstimateReport> release() && { return std::move(reports_); }

 private:
  const RunConfig& config_;
  std::uint64_t job_ = 0;
  std::vector<EstimateReport> reports_;
};

std::vector<std::vector<std::size_t>> round_robin_partition(std::size_t k, std::size_t parts,
                                                            std::uint64_t seed) {
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> partition(std::min(parts, k));
  for (std::size_t i = 0; i < k; ++i) partition[i % partition.size()].push_back(order[i]);
  return partition;
}

}  // namespace

void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") c.command = config_value<std::string>(j, "command");
    else if (key == "input") c.input = config_value<std::string>(j, "input");
    else if (key == "out") c.out = config_value<std::string>(j, "out");
    else if (key == "header") c.header = config_value<bool>(j, "header");
    else if (key == "emit_traces") c.emit_traces = config_value<bool>(j, "emit_traces");
    else if (key == "k") c.k = config_value<std::size_t>(j, "k");
    else if (key == "seed") c.seed = config_value<std::uint64_t>(j, "seed");
    else if (key == "trials") c.trials = config_value<std::size_t>(j, "trials");
    else if (key == "trees") c.trees = config_value<std::size_t>(j, "trees");
    else if (key == "oracle_cap") c.oracle_cap = config_value<std::size_t>(j, "oracle_cap");
    else if (key == "bound_sigmas") c.bound_sigmas = config_value<double>(j, "bound_sigmas");
    else if (key == "identity_sigmas") c.identity_sigmas = config_value<double>(j, "identity_sigmas");
    else throw ParseError("unknown config key \"" + key + "\"");
  }
}

void check_config(const RunConfig& c) {
  if (c.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (c.trees == 0) throw std::invalid_argument("trees must be at least 1");
  if (c.k == 0) throw std::invalid_argument("k must be at least 1");
  for (auto s : {c.bound_sigmas, c.identity_sigmas})
    if (s && !(*s > 0.0 && std::isfinite(*s)))
      throw std::invalid_argument("sigma overrides must be positive");
}

int cmd_cluster(const RunConfig& c, std::ostream& err) {
  PointCloud data;
  try {
    data = read_points_csv(c.input, c.header);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }
  try {
    Rng seed_rng(derive_seed(c.seed, "cluster", 0));
    const CenterSet init = seed_centers(data, c.k, seed_rng);
    const KMediansResult km = lloyd_medians(data, init);
    Rng tree_rng(derive_seed(c.seed, "cluster", 1));
    const BuildResult built = build_tree(km.centers, tree_rng);
    const double proxy = tree_cost(built.tree, data, km.centers, CostMode::proxy);
    const double optimal = tree_cost(built.tree, data, km.centers, CostMode::optimal);

    std::filesystem::create_directories(c.out);
    write_json(c.out / "tree.json", built.tree.to_json());
    {
      auto out = open_output(c.out / "centers.csv");
      write_points_csv(out, km.centers.points());
    }
    {
      auto out = open_output(c.out / "assignment.csv");
      for (std::size_t leaf : assign_points(built.tree, data)) out << leaf << '\n';
    }
    write_json(c.out / "cost.json", {{"k", c.k},
                                     {"n", data.size()},
                                     {"d", data.dim()},
                                     {"seed", c.seed},
                                     {"reference_objective", km.objective},
                                     {"tree_cost_proxy", proxy},
                                     {"tree_cost_optimal", optimal},
                                     {"ratio_proxy", km.objective > 0 ? nlohmann::json(proxy / km.objective)
                                                                      : nlohmann::json(nullptr)},
                                     {"cuts_sampled", built.cuts.size()},
                                     {"lloyd_iterations", km.iterations}});
    return kOk;
  } catch (const TooFewDistinctPoints& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerateData;
  } catch (const DuplicateCenters& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerateData;
  }
}

int cmd_game(const RunConfig& c, std::ostream& err) {
  nlohmann::json j;
  {
    std::ifstream in(c.input);
    if (!in) {
      err << "error: cannot open " << c.input.string() << '\n';
      return kParseError;
    }
    j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      err << "error: " << c.input.string() << " is not valid JSON\n";
      return kParseError;
    }
  }
  std::optional<SetSystem> parsed;
  try {
    parsed.emplace(set_system_from_json(j));
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const InvalidMeasure& e) {
    err << "error: " << e.what() << '\n';
    std::filesystem::create_directories(c.out);
    write_json(c.out / "error.json", {{"error", "invalid_measure"}, {"message", e.what()}});
    return kInvalidSystem;
  }
  const SetSystem& system = *parsed;
  const ValidationReport& report = system.report();
  if (!report.ok()) {
    err << "error: invalid set system: " << report.describe() << '\n';
    nlohmann::json violations = nlohmann::json::array();
    for (const Violation& v : report.violations) {
      nlohmann::json item;
      if (v.kind == Violation::Kind::zero_measure) {
        item = {{"kind", "zero_measure"}, {"set", v.first}};
      } else {
        item = {{"kind", "zero_symmetric_difference"}, {"sets", {v.first, v.second}}};
      }
      violations.push_back(item);
    }
    std::filesystem::create_directories(c.out);
    write_json(c.out / "error.json", {{"error", "invalid_system"}, {"violations", violations}});
    return kInvalidSystem;
  }

  const std::size_t k = system.num_sets();
  std::vector<std::size_t> counts(k, 0);
  RunningStats cost;
  std::filesystem::create_directories(c.out);
  std::optional<std::ofstream> traces;
  if (c.emit_traces) traces.emplace(open_output(c.out / "traces.jsonl"));
  const std::uint64_t game_seed = derive_seed(c.seed, "game", 0);
  for (std::size_t t = 0; t < c.trials; ++t) {
    Rng rng(derive_seed(game_seed, "trial", 0, t));
    const GameTrace trace = run_game(system, rng, Clock::exponential, c.emit_traces);
    ++counts[*trace.winner];
    cost.add(system.set_measure(*trace.winner));
    if (traces) {
      for (std::size_t n = 0; n < trace.draws.size(); ++n) {
        const Draw& d = trace.draws[n];
        nlohmann::json line = {{"trial", t},
                               {"n", d.round},
                               {"t", d.time},
                               {"omega", d.element},
                               {"remaining", trace.remaining[n + 1]}};
        *traces << line.dump() << '\n';
      }
    }
  }

  nlohmann::json empirical = nlohmann::json::array();
  for (std::size_t i = 0; i < k; ++i)
    empirical.push_back(static_cast<double>(counts[i]) / static_cast<double>(c.trials));
  nlohmann::json doc = {{"seed", c.seed},
                        {"trials", c.trials},
                        {"k", k},
                        {"set_measures", nlohmann::json::array()},
                        {"empirical", empirical},
                        {"counts", counts},
                        {"mean_cost", cost.mean()},
                        {"mean_cost_std_error",
                         cost.sample_std() / std::sqrt(static_cast<double>(c.trials))},
                        {"bound", competitive_bound(k) * system.set_measure(system.smallest_index())}};
  for (std::size_t i = 0; i < k; ++i) doc["set_measures"].push_back(system.set_measure(i));
  if (system.num_elements() <= c.oracle_cap) {
    doc["exact"] = exact_winner_distribution(system, c.oracle_cap);
    doc["exact_cost"] = exact_expected_cost(system, c.oracle_cap);
  } else {
    doc["exact"] = nullptr;
    doc["exact_cost"] = nullptr;
  }
  write_json(c.out / "winners.json", doc);
  return kOk;
}

std::vector<EstimateReport> run_battery(const RunConfig& c) {
  Battery b(c);
  const std::size_t trials = c.trials;
  const std::vector<std::size_t> ks = {2, 4, 8, 16, 32, 64};

  // Set-system families for each k.
  for (std::size_t k : ks) {
    std::vector<double> masses(k);
    Rng mass_rng(derive_seed(c.seed, "masses", k));
    for (double& m : masses) m = mass_rng.uniform_open(0.5, 2.0);
    const std::uint64_t overlap_seed = derive_seed(c.seed, "overlap", k);
    const std::vector<std::pair<std::string, SetSystem>> families = {
        {"disjoint", disjoint_system(masses)},
        {"nested", nested_system(k)},
        {"overlap", random_overlap_system(k, 2 * k, 0.3, overlap_seed)},
    };
    for (const auto& [family, system] : families) {
      const std::string tag = family + ":k=" + std::to_string(k);
      b.add(check_game_cost_bound(system, trials, b.next_seed(), c.oracle_cap), "game_cost:" + tag);

      const SurpriseReports s = check_surprise_bound(system, trials, b.next_seed());
      b.add(s.aggregate, "surprise_mass:" + tag);
      for (const EstimateReport& r : s.per_set) {
        // "surprise[i]" -> "surprise:<family>:k=<k>:set=i"
        const std::string index = r.name.substr(9, r.name.size() - 10);
        b.add(r, "surprise:" + tag + ":set=" + index);
      }

      const std::size_t smallest = system.smallest_index();
      const std::size_t element = system.sets()[smallest].front();
      b.add(check_element_cost_bound(system, element, trials, b.next_seed()),
            "element_cost:" + tag + ":element=" + std::to_string(element));
      b.add(check_hitting_order(system, trials, b.next_seed()), "hitting_order:" + tag);
    }
  }

  // Two disjoint sets of equal mass: the larger index is a surprise w.p. 1/8.
  {
    const std::vector<double> equal = {1.0, 1.0};
    b.add(check_surprise_probability(disjoint_system(equal), 1, 0.125, trials, b.next_seed()),
          "surprise_probability:disjoint_equal:k=2");
  }

  // Exponential race tail grid.
  for (double lx : {0.5, 1.0, 2.0})
    for (double ly : {0.5, 1.0, 2.0})
      for (double level : {0.0, 0.5, 1.0}) {
        std::ostringstream name;
        name << "exponential_tail:lx=" << lx << ":ly=" << ly << ":T=" << level;
        b.add(check_exponential_tail(lx, ly, level, trials, b.next_seed()), name.str());
      }

  // Disjoint closed form.
  {
    std::vector<double> random_masses(6);
    Rng rng(derive_seed(c.seed, "disjoint", 0));
    for (double& m : random_masses) m = rng.uniform_open(0.1, 3.0);
    const std::vector<std::pair<std::string, std::vector<double>>> cases = {
        {"1_2", {1.0, 2.0}},
        {"1_2_3", {1.0, 2.0, 3.0}},
        {"equal_5", {1.0, 1.0, 1.0, 1.0, 1.0}},
        {"random_6", random_masses},
    };
    for (const auto& [label, masses] : cases)
      b.add(check_disjoint_case(masses, trials, b.next_seed()), "disjoint_closed_form:" + label);
  }

  // Partition coupling.
  const std::size_t coupling_trials = std::min<std::size_t>(trials, 10'000);
  for (std::size_t k : {4, 8, 16}) {
    const SetSystem system = random_overlap_system(k, 2 * k, 0.3, derive_seed(c.seed, "coupling", k));
    const auto partition = round_robin_partition(k, 3, derive_seed(c.seed, "partition", k));
    b.add(check_partition_coupling(system, partition, coupling_trials, b.next_seed()),
          "partition_coupling:overlap:k=" + std::to_string(k));
  }
  b.add(check_partition_coupling(nested_system(6), {{0, 2, 4}, {1, 3, 5}}, coupling_trials,
                                 b.next_seed()),
        "partition_coupling:nested:k=6");

  // Monte Carlo against the exact oracle. The TV threshold is 0.02 at 1e5
  // trials and grows like 1/sqrt(trials) below that.
  const double max_tv = 0.02 * std::max(1.0, std::sqrt(1e5 / static_cast<double>(trials)));
  for (std::size_t s = 0; s < 20; ++s) {
    Rng shape(derive_seed(c.seed, "oracle_shape", s));
    const std::size_t k = 2 + shape.below(4);                  // 2..5
    const std::size_t m = std::max<std::size_t>(3, k) + shape.below(8 - std::max<std::size_t>(3, k));
    const SetSystem system = random_overlap_system(k, m, 0.5, derive_seed(c.seed, "oracle", s));
    b.add(check_oracle_agreement(system, trials, b.next_seed(), max_tv, c.oracle_cap),
          "oracle_agreement:" + std::to_string(s) + ":k=" + std::to_string(k) +
              ":m=" + std::to_string(m));
  }

  // Competitive ratio of the tree on clustered data.
  for (std::size_t k : {2, 8, 32}) {
    const RatioInstance inst = mixture_instance(500, 5, k, derive_seed(c.seed, "mixture", k));
    b.add(check_competitive_ratio(inst.data, inst.centers, c.trees, b.next_seed()),
          "competitive_ratio:mixture:k=" + std::to_string(k));
  }
  return std::move(b).release();
}

nlohmann::json reports_document(const std::vector<EstimateReport>& reports, const RunConfig& c,
                                const std::string& timestamp) {
  nlohmann::json j;
  j["header"] = {{"timestamp", timestamp}};
  nlohmann::json conf = config_json(c);
  conf.erase("out");
  j["config"] = conf;
  j["reports"] = nlohmann::json::array();
  std::size_t failed = 0;
  for (const EstimateReport& r : reports) {
    j["reports"].push_back(r.to_json());
    failed += !r.pass;
  }
  j["summary"] = {{"total", reports.size()}, {"failed", failed}};
  return j;
}

std::string summary_csv(const std::vector<EstimateReport>& reports) {
  std::ostringstream out;
  out << "name,kind,estimate,std_error,bound,sigmas,reference,trials,violations,low_power,pass\n";
  for (const EstimateReport& r : reports) {
    out << r.name << ',' << (r.kind == ClaimKind::identity ? "identity" : "upper_bound") << ','
        << format_double(r.estimate) << ',' << format_double(r.std_error) << ','
        << format_double(r.bound) << ',' << format_double(r.sigmas) << ','
        << (r.reference ? format_double(*r.reference) : "") << ',' << r.trials << ','
        << r.violations << ',' << (r.low_power ? "true" : "false") << ','
        << (r.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

int cmd_verify(const RunConfig& c, std::ostream& err) {
  const std::vector<EstimateReport> reports = run_battery(c);
  std::filesystem::create_directories(c.out);
  write_json(c.out / "reports.json", reports_document(reports, c, utc_timestamp()));
  {
    auto out = open_output(c.out / "summary.csv");
    out << summary_csv(reports);
  }
  std::size_t failed = 0;
  for (const EstimateReport& r : reports) {
    if (!r.pass) {
      ++failed;
      err << "FAIL " << r.name << ": estimate " << r.estimate << ", bound " << r.bound
          << ", std_error " << r.std_error << ", violations " << r.violations << '\n';
    }
  }
  if (failed) {
    err << failed << " of " << reports.size() << " claims failed\n";
    return kClaimFailure;
  }
  return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explainable k-medians via random coordinate cuts"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;
  std::string input;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t k = 0, trials = 0, trees = 0, oracle_cap = 0;
  double bound_sigmas = 0, identity_sigmas = 0;

  std::vector<CLI::App*> subs = {
      app.add_subcommand("cluster", "Fit reference centers and build a threshold tree"),
      app.add_subcommand("game", "Play the set elimination game on a JSON set system"),
      app.add_subcommand("verify", "Run the claim battery and write reports"),
  };
  struct Opts {
    CLI::Option *config, *input, *header, *k, *seed, *trials, *trees, *cap, *out, *traces, *bs, *is;
  };
  std::vector<Opts> opts;
  for (CLI::App* sub : subs) {
    Opts o{};
    o.config = sub->add_option("--config", config_path, "JSON config file; flags override it");
    o.input = sub->add_option("--input", input, "Input CSV (cluster) or set system JSON (game)");
    o.header = sub->add_flag("--header", "Skip the first CSV row");
    o.k = sub->add_option("--k", k, "Number of centers");
    o.seed = sub->add_option("--seed", seed, "Master seed");
    o.trials = sub->add_option("--trials", trials, "Monte Carlo trials per claim");
    o.trees = sub->add_option("--trees", trees, "Trees per competitive-ratio instance");
    o.cap = sub->add_option("--oracle-cap", oracle_cap, "Largest element count for the exact oracle");
    o.out = sub->add_option("--out", out_dir, "Output directory");
    o.traces = sub->add_flag("--emit-traces", "Write per-trial traces (game)");
    o.bs = sub->add_option("--bound-sigmas", bound_sigmas, "Sigma band for upper-bound claims");
    o.is = sub->add_option("--identity-sigmas", identity_sigmas, "Sigma band for identity claims");
    opts.push_back(o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kParseError;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Opts& o = opts[which];
  RunConfig c;
  try {
    if (o.config->count()) {
      std::ifstream in(config_path);
      if (!in) throw ParseError("cannot open config " + config_path);
      const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) throw ParseError("config " + config_path + " is not valid JSON");
      apply_config_json(c, j);
    }
    c.command = subs[which]->get_name();
    if (o.input->count()) c.input = input;
    if (o.header->count()) c.header = true;
    if (o.k->count()) c.k = k;
    if (o.seed->count()) c.seed = seed;
    if (o.trials->count()) c.trials = trials;
    if (o.trees->count()) c.trees = trees;
    if (o.cap->count()) c.oracle_cap = oracle_cap;
    if (o.out->count()) c.out = out_dir;
    if (o.traces->count()) c.emit_traces = true;
    if (o.bs->count()) c.bound_sigmas = bound_sigmas;
    if (o.is->count()) c.identity_sigmas = identity_sigmas;
    check_config(c);
    if (c.command != "verify" && c.input.empty()) throw std::invalid_argument("--input is required");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  try {
    if (c.command == "cluster") return cmd_cluster(c, err);
    if (c.command == "game") return cmd_game(c, err);
    return cmd_verify(c, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kClaimFailure;
  }
}

}  // namespace excut::cli
