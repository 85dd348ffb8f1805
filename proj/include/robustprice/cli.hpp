#pragma once

// Command-line front end. Reports go to stdout as JSON (fractions); sweep
// tables go to .dat files in percent. Exit codes: 0 success, 2 usage or
// domain error, 1 internal error.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustprice/lp.hpp"
#include "robustprice/mechanism.hpp"

namespace robustprice::cli {

/// Bad flags, unreadable files, or malformed mechanism text. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContextEcho {
  double alpha = 0.0;
  double w = 1.0;
  /// Set for point contexts.
  std::optional<double> q;
  double q_min = 0.0;
  double q_max = 0.0;
  /// Set when the interval came from a confidence interval.
  std::optional<double> q_hat;
  std::optional<long long> samples;

  bool operator==(const ContextEcho&) const = default;
};

struct DeterministicEcho {
  double price = 0.0;
  double ratio = 0.0;
  std::string regime;
  std::string method;

  bool operator==(const DeterministicEcho&) const = default;
};

struct RandomizedEcho {
  double lower = 0.0;
  double upper = 0.0;
  /// Worst-case ratio of the mechanism under the nature oracle.
  double certificate = 0.0;
  std::vector<double> atoms;
  std::vector<double> probs;

  bool operator==(const RandomizedEcho&) const = default;
};

struct EvaluationEcho {
  double ratio = 0.0;
  double argmin_r = 0.0;
  std::string side;
  double truncation_slack = 0.0;

  bool operator==(const EvaluationEcho&) const = default;
};

struct ParamsEcho {
  int n = 0;
  double eta = 0.0;
  double b = 0.0;
  double tol = 0.0;

  bool operator==(const ParamsEcho&) const = default;
};

struct SolveReport {
  std::string command;
  ContextEcho context;
  std::optional<DeterministicEcho> deterministic;
  std::optional<RandomizedEcho> randomized;
  std::optional<EvaluationEcho> evaluation;
  std::optional<ParamsEcho> params;
  double seconds = 0.0;

  bool operator==(const SolveReport&) const = default;
};

/// Non-finite numbers are written as the strings "inf", "-inf", "nan".
nlohmann::json to_json(const SolveReport& report);
SolveReport report_from_json(const nlohmann::json& j);

/// One `price probability` pair per line; `#` starts a comment. Pairs may
/// come in any order; equal prices are merged.
Mechanism parse_mechanism(std::istream& in);
Mechanism read_mechanism_file(const std::string& path);
void write_mechanism(std::ostream& out, const Mechanism& m);

/// LP defaults after ROBUSTPRICE_N, ROBUSTPRICE_ETA and ROBUSTPRICE_B.
LpOptions lp_options_from_env(LpOptions defaults = {});

SolveReport run_deterministic(const PricingContext& ctx);
SolveReport run_randomized(const PricingContext& ctx, const LpOptions& options);
/// Interval contexts (or zero-width ones) through the interval program.
SolveReport run_interval(const PricingContext& ctx, const LpOptions& options);
SolveReport run_evaluate(const PricingContext& ctx, const Mechanism& m);

enum class SweepMode { Deterministic, Randomized, Interval };

struct SweepRow {
  double q = 0.0;
  double ylw = 0.0;
  double yup = 0.0;
  SolveReport report;
};

struct SweepRequest {
  Alpha alpha{0.0};
  double w = 1.0;
  std::vector<double> qs;
  SweepMode mode = SweepMode::Deterministic;
  LpOptions lp;
  /// Interval mode: each q is a q_hat with this many samples.
  long long samples = 1000;
  unsigned jobs = 1;
};

/// Rows sorted by q; ylw and yup are fractions.
std::vector<SweepRow> run_sweep(const SweepRequest& request);

/// Header `q ylw yup`, then one row per q in percent.
void write_dat(std::ostream& out, const std::vector<SweepRow>& rows);

/// Entry point behind the executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace robustprice::cli
