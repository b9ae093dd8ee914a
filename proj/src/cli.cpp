#include "fixprice/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "fixprice/competition.hpp"
#include "fixprice/distributions.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/evt_fit.hpp"
#include "fixprice/format.hpp"
#include "fixprice/guarantees.hpp"
#include "fixprice/policy_eval.hpp"

namespace fixprice {

namespace {

using nlohmann::ordered_json;

/// Raised for flag combinations CLI11 cannot validate on its own.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double num(double v) { return round_significant(v); }

/// Writes `content` to `path` through a sibling temporary file and a rename,
/// so a failed run never leaves a partial file behind.
void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path temp = target;
  temp += ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    file << content;
    file.flush();
    if (!file) {
      file.close();
      std::filesystem::remove(temp);
      throw std::runtime_error("write to " + temp.string() + " failed");
    }
  }
  std::filesystem::rename(temp, target);
}

struct Options {
  // shared
  std::string dist;
  std::string output;
  std::uint64_t seed = kDefaultSeed;

  // guarantees
  long k_max = 50;
  std::vector<double> alpha_grid;

  // evaluate / converge / simulate
  long n = 0;
  long k = 1;
  std::optional<double> threshold;
  std::string mode = "best";
  std::optional<double> u;
  std::vector<long> n_grid;
  long replications = 100000;
  int threads = 1;

  // competition
  std::vector<long> n_list;

  // fit
  std::string input;
  std::string id_col = "bidder";
  std::string bid_col = "bid";
  std::optional<long> k_hill;
  std::optional<double> m_hat;
  std::optional<long> fit_n;
  std::optional<double> realized_max;
  double bin_width = 200.0;
  std::string hill_csv;
  std::string histogram_csv;
  std::vector<long> k_range;
};

/// Output files produced by one command, written only after it succeeds.
struct Outputs {
  std::string primary;
  std::vector<std::pair<std::string, std::string>> side_files;
};

ordered_json evaluation_json(const Distribution& d, const PolicyEvaluation& e) {
  ordered_json j;
  j["distribution"] = d.spec();
  j["n"] = e.n;
  j["k"] = e.k;
  j["threshold"] = num(e.threshold);
  j["fp_value"] = num(e.fp_value);
  j["prophet_value"] = num(e.prophet_value);
  j["ratio"] = num(e.ratio);
  return j;
}

double resolve_u(const Distribution& d, const Options& o) {
  if (o.u) return *o.u;
  const EvtIndex index = d.evt_index();
  if (index.family == EvtFamily::Frechet) return u_star(1.0 / index.gamma);
  throw UsageError("--mode theory needs --u for " + std::string(to_string(index.family)) +
                   "-type models");
}

ConvergenceMode resolve_mode(const Distribution& d, const Options& o) {
  if (o.mode == "best") return {ThresholdMode::BestT, 0.0};
  return {ThresholdMode::TheoryT, resolve_u(d, o)};
}

Outputs cmd_guarantees(const Options& o) {
  for (double a : o.alpha_grid) {
    if (!(a > 1.0)) throw UsageError("--alpha-grid values must exceed 1");
  }
  std::ostringstream csv;
  csv << "k,phi_k_alpha2,sqrt_bound";
  for (double a : o.alpha_grid) csv << ",phi_k_alpha_" << format_real(a);
  csv << '\n';
  for (long k = 1; k <= o.k_max; ++k) {
    csv << k << ',' << format_real(phi_k_alpha2_closed(k)) << ',' << format_real(sqrt_bound(k));
    for (double a : o.alpha_grid) csv << ',' << format_real(phi_k(a, k).value);
    csv << '\n';
  }
  return {csv.str(), {}};
}

Outputs cmd_alpha_value(const AlphaValue& v) {
  ordered_json j;
  j["alpha"] = num(v.alpha);
  j["value"] = num(v.value);
  return {j.dump(2) + "\n", {}};
}

Outputs cmd_evaluate(const Options& o) {
  const Distribution d = parse_distribution(o.dist);
  PolicyEvaluation e{};
  if (o.threshold) {
    e = evaluate_threshold(d, o.n, o.k, *o.threshold);
  } else if (o.mode == "theory") {
    e = evaluate_threshold(d, o.n, o.k, theory_threshold(d, o.n, resolve_u(d, o)));
  } else {
    e = best_fixed_price(d, o.n, o.k);
  }
  return {evaluation_json(d, e).dump(2) + "\n", {}};
}

Outputs cmd_converge(const Options& o) {
  const Distribution d = parse_distribution(o.dist);
  const auto rows = convergence_table(d, o.k, o.n_grid, resolve_mode(d, o));
  std::ostringstream csv;
  write_evaluation_csv(csv, rows);
  return {csv.str(), {}};
}

Outputs cmd_competition(const Options& o) {
  const Distribution d = parse_distribution(o.dist);
  std::vector<long> ns = o.n_list;
  std::sort(ns.begin(), ns.end());
  PolicySequence seq(d);
  ordered_json records = ordered_json::array();
  for (long n : ns) {
    const CompetitionRecord r = empirical_competition_complexity(seq, n);
    ordered_json j;
    j["n"] = r.n;
    j["m_star"] = r.m_star;
    j["empirical_ratio"] = num(r.empirical_ratio);
    j["theoretical"] = num(r.theoretical);
    j["gamma"] = num(r.gamma);
    records.push_back(j);
  }
  ordered_json j;
  j["distribution"] = d.spec();
  j["records"] = records;
  return {j.dump(2) + "\n", {}};
}

Outputs cmd_fit(const Options& o) {
  std::ifstream file(o.input, std::ios::binary);
  if (!file) throw UsageError("cannot open --input " + o.input);
  const auto bids = ingest_bids(file, CsvColumns{o.id_col, o.bid_col});
  const auto values = per_bidder_max(bids);

  FitOptions fit_options;
  fit_options.k_hill = o.k_hill;
  fit_options.m_hat = o.m_hat;
  const FitResult fit = fit_frechet(values, fit_options);
  const long n = o.fit_n.value_or(fit.n_valuations);
  const GuaranteeReport report = guarantee_report(fit, n, o.realized_max);

  ordered_json j;
  j["n_bids"] = static_cast<long>(bids.size());
  j["n_valuations"] = fit.n_valuations;
  j["m_hat"] = num(fit.m_hat);
  j["s_hat"] = num(fit.s_hat);
  j["alpha_hat"] = num(fit.alpha_hat);
  j["k_hill"] = fit.k_hill;
  j["loss"] = num(fit.loss);
  j["n"] = n;
  j["U"] = num(report.u);
  j["T_n"] = num(report.threshold);
  j["guarantee"] = num(report.guarantee);
  j["variance_margin"] = num(report.variance_margin);
  if (report.realized_max) j["realized_max"] = num(*report.realized_max);
  if (report.realized_ratio) j["realized_ratio"] = num(*report.realized_ratio);

  Outputs outputs{j.dump(2) + "\n", {}};
  if (!o.hill_csv.empty()) {
    std::vector<double> shifted(values);
    for (double& v : shifted) v -= fit.m_hat;
    const long k_lo = o.k_range.empty() ? 2 : o.k_range[0];
    const long k_hi = o.k_range.empty() ? fit.n_valuations - 1 : o.k_range[1];
    std::ostringstream csv;
    write_hill_csv(csv, hill_stability_scan(shifted, k_lo, k_hi));
    outputs.side_files.emplace_back(o.hill_csv, csv.str());
  }
  if (!o.histogram_csv.empty()) {
    std::ostringstream csv;
    write_histogram_csv(csv, histogram_export(values, o.bin_width));
    outputs.side_files.emplace_back(o.histogram_csv, csv.str());
  }
  return outputs;
}

Outputs cmd_simulate(const Options& o) {
  const Distribution d = parse_distribution(o.dist);
  const double T = o.threshold ? *o.threshold : best_fixed_price(d, o.n, o.k).threshold;
  SimulationConfig cfg;
  cfg.replications = o.replications;
  cfg.seed = o.seed;
  cfg.parallel_chunks = o.threads;
  const MonteCarloEstimate mc = monte_carlo_evaluate(d, o.n, o.k, T, cfg);
  const double exact = fixed_price_value_exact(d, o.n, o.k, T);

  ordered_json j;
  j["distribution"] = d.spec();
  j["n"] = o.n;
  j["k"] = o.k;
  j["threshold"] = num(T);
  j["seed"] = o.seed;
  j["replications"] = mc.replications;
  j["mean"] = num(mc.mean);
  j["std_error"] = num(mc.std_error);
  j["exact"] = num(exact);
  j["z_score"] = num(mc.std_error > 0.0 ? (mc.mean - exact) / mc.std_error : 0.0);
  return {j.dump(2) + "\n", {}};
}

RunManifest build_manifest(const CLI::App& sub, const Options& o) {
  RunManifest m;
  m.subcommand = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->count() == 0 || opt->get_lnames().empty()) continue;
    std::string joined;
    for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
    m.flags[opt->get_lnames().front()] = joined;
  }
  if (m.flags.count("seed") || m.subcommand == "simulate") m.seed = o.seed;
  if (!o.output.empty()) m.output_path = o.output;
  return m;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-price policies, dynamic pricing and competition complexity in large markets"};
  app.require_subcommand(1);
  Options o;

  const auto add_output = [&](CLI::App* sub) {
    sub->add_option("-o,--output", o.output, "Write to this file (atomically) instead of stdout");
  };
  const auto add_dist = [&](CLI::App* sub) {
    sub->add_option("--dist", o.dist, "Distribution, e.g. pareto:alpha=2 or exp:rate=1")
        ->required();
  };
  const auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "Threshold choice: best or theory")
        ->check(CLI::IsMember({"best", "theory"}));
    sub->add_option("--u", o.u, "Multiplier U for --mode theory (default U*(alpha) for Frechet)");
  };

  std::map<std::string, std::function<Outputs()>> handlers;

  auto* guarantees = app.add_subcommand("guarantees", "phi_k(2) against 1 - 1/sqrt(2 pi k)");
  guarantees->add_option("--k-max", o.k_max, "Largest k")->check(CLI::PositiveNumber);
  guarantees->add_option("--alpha-grid", o.alpha_grid, "Extra shapes alpha > 1 for phi_k columns")
      ->delimiter(',');
  add_output(guarantees);
  handlers["guarantees"] = [&] { return cmd_guarantees(o); };

  auto* phi1 = app.add_subcommand("phi1-min", "Minimum of phi_1 over alpha");
  add_output(phi1);
  handlers["phi1-min"] = [] { return cmd_alpha_value(minimize_phi_1()); };

  auto* gap = app.add_subcommand("adaptivity-gap", "Maximum of nu(alpha) / phi_1(alpha)");
  add_output(gap);
  handlers["adaptivity-gap"] = [] { return cmd_alpha_value(adaptivity_gap()); };

  auto* evaluate = app.add_subcommand("evaluate", "Fixed-price value against the prophet");
  add_dist(evaluate);
  evaluate->add_option("--n", o.n, "Number of buyers")->required()->check(CLI::PositiveNumber);
  evaluate->add_option("--k", o.k, "Units for sale")->check(CLI::PositiveNumber);
  evaluate->add_option("--threshold", o.threshold, "Fixed price T (default: best T)");
  add_mode(evaluate);
  add_output(evaluate);
  handlers["evaluate"] = [&] { return cmd_evaluate(o); };

  auto* converge = app.add_subcommand("converge", "Ratio to the prophet over a grid of n");
  add_dist(converge);
  converge->add_option("--k", o.k, "Units for sale")->check(CLI::PositiveNumber);
  converge->add_option("--n-grid", o.n_grid, "Increasing market sizes, comma separated")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  add_mode(converge);
  add_output(converge);
  handlers["converge"] = [&] { return cmd_converge(o); };

  auto* competition = app.add_subcommand("competition", "Empirical competition complexity");
  add_dist(competition);
  competition->add_option("--n", o.n_list, "Market sizes, comma separated")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  add_output(competition);
  handlers["competition"] = [&] { return cmd_competition(o); };

  auto* fit = app.add_subcommand("fit", "Fit a Frechet model to bids and report T_n");
  fit->add_option("--input", o.input, "Bid CSV")->required();
  fit->add_option("--id-col", o.id_col, "Bidder id column");
  fit->add_option("--bid-col", o.bid_col, "Bid amount column");
  fit->add_option("--k-hill", o.k_hill, "Hill k (default: most stable window)")
      ->check(CLI::Range(2L, std::numeric_limits<long>::max()));
  fit->add_option("--m-hat", o.m_hat, "Location m (default 0)");
  fit->add_option("--n", o.fit_n, "Market size for T_n (default: number of valuations)")
      ->check(CLI::PositiveNumber);
  fit->add_option("--realized-max", o.realized_max, "Realized maximum valuation")
      ->check(CLI::PositiveNumber);
  fit->add_option("--bin-width", o.bin_width, "Histogram bin width")->check(CLI::PositiveNumber);
  fit->add_option("--hill-csv", o.hill_csv, "Write the Hill stability scan here");
  fit->add_option("--k-range", o.k_range, "Hill scan range lo,hi")
      ->delimiter(',')
      ->expected(2);
  fit->add_option("--histogram-csv", o.histogram_csv, "Write the valuation histogram here");
  add_output(fit);
  handlers["fit"] = [&] { return cmd_fit(o); };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the fixed-price value");
  add_dist(simulate);
  simulate->add_option("--n", o.n, "Number of buyers")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--k", o.k, "Units for sale")->check(CLI::PositiveNumber);
  simulate->add_option("--threshold", o.threshold, "Fixed price T (default: best T)");
  simulate->add_option("--reps", o.replications, "Replications")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "64-bit seed");
  simulate->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_output(simulate);
  handlers["simulate"] = [&] { return cmd_simulate(o); };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const RunManifest manifest = build_manifest(*chosen, o);
  try {
    const Outputs outputs = handlers.at(manifest.subcommand)();
    for (const auto& [path, content] : outputs.side_files) write_atomically(path, content);
    if (manifest.output_path) {
      write_atomically(*manifest.output_path, outputs.primary);
    } else {
      out << outputs.primary;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace fixprice
