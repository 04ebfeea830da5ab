#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "excut/bounds_lab.hpp"

namespace excut::cli {

enum ExitCode : int {
  kOk = 0,
  kClaimFailure = 1,
  kParseError = 2,
  kDegenerateData = 3,
  kInvalidSystem = 4,
};

struct RunConfig {
  std::string command;  // cluster | game | verify
  std::filesystem::path input;
  bool header = false;
  std::size_t k = 2;
  std::uint64_t seed = 1;
  std::size_t trials = 100'000;
  std::size_t trees = 1'000;
  std::size_t oracle_cap = kDefaultOracleCap;
  std::filesystem::path out = ".";
  bool emit_traces = false;
  std::optional<double> bound_sigmas;     // override for upper-bound claims
  std::optional<double> identity_sigmas;  // override for identity claims
};

/// Reads keys of RunConfig from a JSON object ("input", "k", "seed", "trials",
/// "trees", "oracle_cap", "out", "header", "emit_traces", "bound_sigmas",
/// "identity_sigmas"). Throws ParseError on unknown keys or wrong types.
void apply_config_json(RunConfig& config, const nlohmann::json& j);

/// Throws std::invalid_argument when trials, trees or k are zero.
void check_config(const RunConfig& config);

/// Writes tree.json, centers.csv, assignment.csv and cost.json to config.out.
int cmd_cluster(const RunConfig& config, std::ostream& err);

/// Writes winners.json (and traces.jsonl with emit_traces) to config.out.
int cmd_game(const RunConfig& config, std::ostream& err);

/// Runs the claim battery; writes reports.json and summary.csv to config.out.
int cmd_verify(const RunConfig& config, std::ostream& err);

/// The verify battery itself, with tolerance overrides applied.
std::vector<EstimateReport> run_battery(const RunConfig& config);

/// reports.json body; the timestamp lives only in the "header" object.
nlohmann::json reports_document(const std::vector<EstimateReport>& reports,
                                const RunConfig& config, const std::string& timestamp);

/// name,estimate,std_error,bound,pass
std::string summary_csv(const std::vector<EstimateReport>& reports);

/// Parses argv and dispatches. Returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace excut::cli
