#include "robustprice/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "robustprice/deterministic.hpp"

namespace robustprice::cli {

using nlohmann::json;

namespace {

// Tolerance of the one-dimensional searches, echoed in reports.
constexpr double kReportTol = 1e-10;

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::nan("");
  throw UsageError("report: bad number '" + s + "'");
}

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::vector<double> numbers_from(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from(x));
  return out;
}

ContextEcho echo(const PricingContext& ctx) {
  ContextEcho e;
  e.alpha = ctx.alpha().value();
  e.w = ctx.w();
  if (ctx.is_point()) e.q = ctx.q();
  e.q_min = ctx.q_min();
  e.q_max = ctx.q_max();
  return e;
}

ParamsEcho params(const LpOptions& o) { return {o.n, o.eta, o.b, kReportTol}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DeterministicEcho deterministic_echo(const PricingContext& ctx) {
  const DeterministicSolution s = solve_deterministic(ctx);
  return {s.price, s.ratio, to_string(s.regime), to_string(s.method)};
}

RandomizedEcho randomized_echo(const PricingContext& ctx, const LpOptions& options) {
  const LpBounds bounds = solve_bounds(ctx, options);
  NatureOptions nature;
  nature.r_cap = kInf;
  RandomizedEcho e;
  e.lower = bounds.lower;
  e.upper = bounds.upper;
  e.certificate = nature_worst_case(bounds.mechanism, ctx, nature).ratio;
  e.atoms.assign(bounds.mechanism.atoms().begin(), bounds.mechanism.atoms().end());
  e.probs.assign(bounds.mechanism.probs().begin(), bounds.mechanism.probs().end());
  return e;
}

}  // namespace

json to_json(const SolveReport& r) {
  json j;
  j["command"] = r.command;
  json c;
  c["alpha"] = number(r.context.alpha);
  c["w"] = number(r.context.w);
  c["q"] = r.context.q ? number(*r.context.q) : json(nullptr);
  c["q_min"] = number(r.context.q_min);
  c["q_max"] = number(r.context.q_max);
  c["q_hat"] = r.context.q_hat ? number(*r.context.q_hat) : json(nullptr);
  c["samples"] = r.context.samples ? json(*r.context.samples) : json(nullptr);
  j["context"] = c;
  if (r.deterministic) {
    const auto& d = *r.deterministic;
    j["deterministic"] = {{"price", number(d.price)}, {"ratio", number(d.ratio)}, {"regime", d.regime},
                          {"method", d.method}};
  } else {
    j["deterministic"] = nullptr;
  }
  if (r.randomized) {
    const auto& d = *r.randomized;
    j["randomized"] = {{"lower", number(d.lower)},
                       {"upper", number(d.upper)},
                       {"certificate", number(d.certificate)},
                       {"mechanism", {{"atoms", numbers(d.atoms)}, {"probs", numbers(d.probs)}}}};
  } else {
    j["randomized"] = nullptr;
  }
  if (r.evaluation) {
    const auto& d = *r.evaluation;
    j["evaluation"] = {{"ratio", number(d.ratio)},
                       {"argmin_r", number(d.argmin_r)},
                       {"side", d.side},
                       {"truncation_slack", number(d.truncation_slack)}};
  } else {
    j["evaluation"] = nullptr;
  }
  if (r.params) {
    j["params"] = {{"n", r.params->n}, {"eta", number(r.params->eta)}, {"b", number(r.params->b)},
                   {"tol", number(r.params->tol)}};
  } else {
    j["params"] = nullptr;
  }
  j["timing"] = {{"seconds", number(r.seconds)}};
  return j;
}

SolveReport report_from_json(const json& j) {
  try {
    SolveReport r;
    r.command = j.at("command").get<std::string>();
    const json& c = j.at("context");
    r.context.alpha = number_from(c.at("alpha"));
    r.context.w = number_from(c.at("w"));
    if (!c.at("q").is_null()) r.context.q = number_from(c.at("q"));
    r.context.q_min = number_from(c.at("q_min"));
    r.context.q_max = number_from(c.at("q_max"));
    if (!c.at("q_hat").is_null()) r.context.q_hat = number_from(c.at("q_hat"));
    if (!c.at("samples").is_null()) r.context.samples = c.at("samples").get<long long>();
    if (const json& d = j.at("deterministic"); !d.is_null()) {
      r.deterministic = DeterministicEcho{number_from(d.at("price")), number_from(d.at("ratio")),
                                          d.at("regime").get<std::string>(), d.at("method").get<std::string>()};
    }
    if (const json& d = j.at("randomized"); !d.is_null()) {
      r.randomized = RandomizedEcho{number_from(d.at("lower")), number_from(d.at("upper")),
                                    number_from(d.at("certificate")), numbers_from(d.at("mechanism").at("atoms")),
                                    numbers_from(d.at("mechanism").at("probs"))};
    }
    if (const json& d = j.at("evaluation"); !d.is_null()) {
      r.evaluation = EvaluationEcho{number_from(d.at("ratio")), number_from(d.at("argmin_r")),
                                    d.at("side").get<std::string>(), number_from(d.at("truncation_slack"))};
    }
    if (const json& d = j.at("params"); !d.is_null()) {
      r.params = ParamsEcho{d.at("n").get<int>(), number_from(d.at("eta")), number_from(d.at("b")),
                            number_from(d.at("tol"))};
    }
    r.seconds = number_from(j.at("timing").at("seconds"));
    return r;
  } catch (const json::exception& e) {
    throw UsageError(std::string("report: ") + e.what());
  }
}

Mechanism parse_mechanism(std::istream& in) {
  std::map<double, double> mass;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double price = 0.0;
    double prob = 0.0;
    if (!(fields >> price)) {
      if (fields.eof() && line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw UsageError("mechanism line " + std::to_string(line_no) + ": expected 'price probability'");
    }
    std::string extra;
    if (!(fields >> prob) || (fields >> extra)) {
      throw UsageError("mechanism line " + std::to_string(line_no) + ": expected 'price probability'");
    }
    if (!(price > 0.0) || !std::isfinite(price) || !(prob >= 0.0 && prob <= 1.0)) {
      throw UsageError("mechanism line " + std::to_string(line_no) + ": price must be positive, probability in [0,1]");
    }
    mass[price] += prob;
  }
  std::vector<double> atoms;
  std::vector<double> probs;
  for (const auto& [p, m] : mass) {
    atoms.push_back(p);
    probs.push_back(m);
  }
  try {
    return Mechanism(std::move(atoms), std::move(probs));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

Mechanism read_mechanism_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open mechanism file '" + path + "'");
  return parse_mechanism(in);
}

void write_mechanism(std::ostream& out, const Mechanism& m) {
  out << "# price probability\n";
  char buf[64];
  for (std::size_t j = 0; j < m.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m.atoms()[j], m.probs()[j]);
    out << buf;
  }
}

LpOptions lp_options_from_env(LpOptions defaults) {
  auto read = [](const char* name) -> std::optional<double> {
    const char* raw = std::getenv(name);
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (*end != '\0' || !std::isfinite(v)) throw UsageError(std::string(name) + ": not a number");
    return v;
  };
  if (auto n = read("ROBUSTPRICE_N")) {
    if (*n != std::floor(*n) || *n < 2 || *n > 1e6) throw UsageError("ROBUSTPRICE_N: expected an integer >= 2");
    defaults.n = static_cast<int>(*n);
  }
  if (auto eta = read("ROBUSTPRICE_ETA")) defaults.eta = *eta;
  if (auto b = read("ROBUSTPRICE_B")) defaults.b = *b;
  return defaults;
}

SolveReport run_deterministic(const PricingContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport r;
  r.command = "deterministic";
  r.context = echo(ctx);
  r.deterministic = deterministic_echo(ctx);
  r.seconds = seconds_since(t0);
  return r;
}

SolveReport run_randomized(const PricingContext& ctx, const LpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport r;
  r.command = "randomized";
  r.context = echo(ctx);
  r.deterministic = deterministic_echo(ctx);
  r.randomized = randomized_echo(ctx, options);
  r.params = params(options);
  r.seconds = seconds_since(t0);
  return r;
}

SolveReport run_interval(const PricingContext& ctx, const LpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport r;
  r.command = "interval";
  r.context = echo(ctx);
  r.randomized = randomized_echo(ctx, options);
  r.params = params(options);
  r.seconds = seconds_since(t0);
  return r;
}

SolveReport run_evaluate(const PricingContext& ctx, const Mechanism& m) {
  const auto t0 = std::chrono::steady_clock::now();
  NatureOptions nature;
  nature.r_cap = kInf;
  const EvaluationReport e = nature_worst_case(m, ctx, nature);
  SolveReport r;
  r.command = "evaluate";
  r.context = echo(ctx);
  r.evaluation = EvaluationEcho{e.ratio, e.argmin_r, to_string(e.side), e.truncation_slack};
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<SweepRow> run_sweep(const SweepRequest& request) {
  std::vector<double> qs = request.qs;
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  std::vector<SweepRow> rows(qs.size());
  std::vector<std::exception_ptr> errors(qs.size());
  std::atomic<std::size_t> next{0};

  auto task = [&](std::size_t i) {
    const double q = qs[i];
    SweepRow row;
    row.q = q;
    switch (request.mode) {
      case SweepMode::Deterministic:
        row.report = run_deterministic(PricingContext::point(request.alpha, request.w, q));
        row.ylw = row.yup = row.report.deterministic->ratio;
        break;
      case SweepMode::Randomized:
        row.report = run_randomized(PricingContext::point(request.alpha, request.w, q), request.lp);
        row.ylw = row.report.randomized->lower;
        row.yup = row.report.randomized->upper;
        break;
      case SweepMode::Interval: {
        const auto [lo, hi] = ci_interval(q, request.samples);
        row.report = run_interval(PricingContext::interval(request.alpha, request.w, lo, hi), request.lp);
        row.report.context.q_hat = q;
        row.report.context.samples = request.samples;
        row.ylw = row.report.randomized->lower;
        row.yup = row.report.randomized->upper;
        break;
      }
    }
    rows[i] = std::move(row);
  };
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < qs.size();) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(request.jobs, static_cast<unsigned>(qs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_dat(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "q ylw yup\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", row.q, 100.0 * row.ylw, 100.0 * row.yup);
    out << buf;
  }
}

namespace {

constexpr const char* kFooter =
    "Ratios in JSON reports are fractions; .dat tables use percent.\n"
    "ROBUSTPRICE_N, ROBUSTPRICE_ETA and ROBUSTPRICE_B override the LP defaults\n"
    "(2500, 1e-5, 250); flags override both.\n"
    "Exit codes: 0 success, 2 usage or domain error, 1 internal error.";

struct Flags {
  std::string alpha = "regular";
  double w = 1.0;
  double q = 0.0;
  double qm = 0.0;
  double qM = 0.0;
  double q_hat = 0.0;
  long long samples = 0;
  std::string mechanism_path;
  std::string mechanism_out;
  std::string mode = "det";
  std::vector<double> q_list;
  double q_from = 0.0;
  double q_to = 0.0;
  double q_step = 0.0;
  std::string out_path;
  unsigned jobs = 0;
  LpOptions lp;
};

void add_class(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.alpha, "Class: regular, mhr, or a number in [0,1]")->capture_default_str();
  cmd->add_option("--w", f.w, "Incumbent price")->capture_default_str();
}

void add_lp(CLI::App* cmd, Flags& f) {
  cmd->add_option("--n", f.lp.n, "Grid size N")->capture_default_str();
  cmd->add_option("--eta", f.lp.eta, "Gap below w in the lower block")->capture_default_str();
  cmd->add_option("--b", f.lp.b, "Upper truncation of the price grid")->capture_default_str();
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

std::vector<double> sweep_qs(const Flags& f) {
  if (!f.q_list.empty()) return f.q_list;
  if (!(f.q_step > 0.0) || !(f.q_to >= f.q_from)) {
    throw UsageError("sweep: give --q or --q-from/--q-to/--q-step with q-step > 0");
  }
  const long long count = std::llround((f.q_to - f.q_from) / f.q_step);
  std::vector<double> qs;
  for (long long i = 0; i <= count; ++i) {
    const double q = f.q_from + static_cast<double>(i) * f.q_step;
    qs.push_back(std::round(q * 1e12) / 1e12);
  }
  return qs;
}

SweepMode sweep_mode(const std::string& name) {
  if (name == "det") return SweepMode::Deterministic;
  if (name == "rand") return SweepMode::Randomized;
  if (name == "interval") return SweepMode::Interval;
  throw UsageError("sweep: --mode must be det, rand or interval");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  f.lp = LpOptions{};
  try {
    f.lp = lp_options_from_env();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{"Robust posted pricing from one observed conversion rate."};
  app.footer(kFooter);
  app.require_subcommand(1);

  auto* det = app.add_subcommand("deterministic", "Optimal deterministic price and its ratio");
  add_class(det, f);
  det->add_option("--q", f.q, "Conversion rate at w")->required();

  auto* rnd = app.add_subcommand("randomized", "LP bounds and a near-optimal randomized mechanism");
  add_class(rnd, f);
  rnd->add_option("--q", f.q, "Conversion rate at w")->required();
  add_lp(rnd, f);
  rnd->add_option("--mechanism-out", f.mechanism_out, "Also write the mechanism to this file");

  auto* itv = app.add_subcommand("interval", "LP bounds when the rate is only known to lie in an interval");
  add_class(itv, f);
  auto* qm = itv->add_option("--qm", f.qm, "Lower end of the rate interval");
  auto* qM = itv->add_option("--qM", f.qM, "Upper end of the rate interval");
  auto* qh = itv->add_option("--q-hat", f.q_hat, "Observed rate; the interval is its 95% binomial CI");
  auto* ns = itv->add_option("--samples", f.samples, "Sample size behind --q-hat");
  qm->needs(qM);
  qM->needs(qm);
  qh->needs(ns);
  ns->needs(qh);
  qm->excludes(qh);
  qM->excludes(qh);
  add_lp(itv, f);

  auto* eva = app.add_subcommand("evaluate", "Worst-case ratio of a given mechanism");
  add_class(eva, f);
  eva->add_option("--q", f.q, "Conversion rate at w")->required();
  eva->add_option("--mechanism", f.mechanism_path, "File of 'price probability' lines")->required();

  auto* swp = app.add_subcommand("sweep", "Tables of ylw/yup over a range of rates");
  add_class(swp, f);
  swp->add_option("--mode", f.mode, "det, rand or interval")->capture_default_str();
  swp->add_option("--q", f.q_list, "Comma-separated rates (q-hat in interval mode)")->delimiter(',');
  swp->add_option("--q-from", f.q_from, "First rate of a range");
  swp->add_option("--q-to", f.q_to, "Last rate of a range");
  swp->add_option("--q-step", f.q_step, "Step of a range");
  swp->add_option("--samples", f.samples, "Interval mode: sample size")->capture_default_str();
  swp->add_option("--out", f.out_path, "Output .dat path; a .json sidecar is written next to it")->required();
  swp->add_option("--jobs", f.jobs, "Parallel tasks (0: up to 4)");
  add_lp(swp, f);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const Alpha alpha = alpha_for_class(f.alpha);
    SolveReport report;
    if (det->parsed()) {
      report = run_deterministic(PricingContext::point(alpha, f.w, f.q));
    } else if (rnd->parsed()) {
      const PricingContext ctx = PricingContext::point(alpha, f.w, f.q);
      report = run_randomized(ctx, f.lp);
      if (!f.mechanism_out.empty()) {
        std::ofstream file(f.mechanism_out);
        if (!file) throw UsageError("cannot write '" + f.mechanism_out + "'");
        write_mechanism(file, Mechanism(report.randomized->atoms, report.randomized->probs));
      }
    } else if (itv->parsed()) {
      if (qh->count() > 0) {
        const auto [lo, hi] = ci_interval(f.q_hat, f.samples);
        report = run_interval(PricingContext::interval(alpha, f.w, lo, hi), f.lp);
        report.context.q_hat = f.q_hat;
        report.context.samples = f.samples;
      } else if (qm->count() > 0) {
        if (!(f.qm <= f.qM)) throw UsageError("interval: --qm must not exceed --qM");
        report = run_interval(PricingContext::interval(alpha, f.w, f.qm, f.qM), f.lp);
      } else {
        throw UsageError("interval: give --qm/--qM or --q-hat/--samples");
      }
    } else if (eva->parsed()) {
      const Mechanism m = read_mechanism_file(f.mechanism_path);
      report = run_evaluate(PricingContext::point(alpha, f.w, f.q), m);
    } else {
      SweepRequest req;
      req.alpha = alpha;
      req.w = f.w;
      req.qs = sweep_qs(f);
      req.mode = sweep_mode(f.mode);
      req.lp = f.lp;
      req.samples = f.samples > 0 ? f.samples : 1000;
      req.jobs = f.jobs > 0 ? f.jobs : std::clamp(std::thread::hardware_concurrency(), 1u, 4u);
      const auto rows = run_sweep(req);
      std::ofstream dat(f.out_path);
      if (!dat) throw UsageError("cannot write '" + f.out_path + "'");
      write_dat(dat, rows);
      json sidecar = json::array();
      for (const auto& row : rows) sidecar.push_back(to_json(row.report));
      const std::string json_path = f.out_path + ".json";
      std::ofstream side(json_path);
      if (!side) throw UsageError("cannot write '" + json_path + "'");
      side << sidecar.dump(2) << '\n';
      emit(out, {{"command", "sweep"}, {"dat", f.out_path}, {"json", json_path}, {"rows", rows.size()}});
      return 0;
    }
    emit(out, to_json(report));
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace robustprice::cli
