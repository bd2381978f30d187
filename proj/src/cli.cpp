#include "resbal/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "json.hpp"
#include "resbal/balancing.hpp"
#include "resbal/benchmark.hpp"
#include "resbal/errors.hpp"
#include "resbal/estimators.hpp"
#include "resbal/simulations.hpp"

namespace resbal {

namespace {

using json = nlohmann::json;

json real(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct CommonData {
  std::string data;
  std::string treatment_col = "w";
  std::string outcome_col = "y";
};

void add_data_options(CLI::App* cmd, CommonData& d) {
  cmd->add_option("--data", d.data, "Input CSV with outcome, treatment and covariate columns")->required();
  cmd->add_option("--treatment-col", d.treatment_col, "Name of the 0/1 treatment column")->capture_default_str();
  cmd->add_option("--outcome-col", d.outcome_col, "Name of the outcome column")->capture_default_str();
}

Dataset load(const CommonData& d) { return load_csv(d.data, ColumnSpec{d.treatment_col, d.outcome_col}); }

void write_weights(const std::filesystem::path& path, const std::vector<Index>& rows, const Vector& gamma) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "row,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) out << rows[i] << ',' << gamma(static_cast<Index>(i)) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

json report_json(const EstimateReport& r) {
  json diag = json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = real(v);
  return {{"method", r.method},
          {"tau_hat", real(r.tau_hat)},
          {"mu_t_hat", real(r.mu_t_hat)},
          {"mu_c_hat", real(r.mu_c_hat)},
          {"var_hat", real(r.var_hat)},
          {"se", real(std::sqrt(r.var_hat))},
          {"ci_lo", real(r.ci_lo)},
          {"ci_hi", real(r.ci_hi)},
          {"level", r.level},
          {"diagnostics", diag},
          {"warnings", r.warnings}};
}

bool is_balancing(Method m) { return m == Method::Arb || m == Method::ArbAte || m == Method::BalanceOnly; }

struct EstimateArgs {
  CommonData data;
  std::vector<std::string> methods{"arb"};
  double zeta = 0.5;
  double alpha = 0.9;
  double level = 0.95;
  std::uint64_t seed = 1;
  int k_folds = 10;
  bool ds_two_lasso = false;
  std::string dump_weights;
  std::string out;
  std::string format = "json";
};

int run_estimate(const EstimateArgs& a, const CLI::App& cmd, std::ostream& out) {
  std::vector<Method> methods;
  for (const auto& name : a.methods) methods.push_back(parse_method(name));
  bool balancing = false;
  for (Method m : methods) balancing = balancing || is_balancing(m);
  if (cmd.count("--zeta") && !balancing) throw UsageError("--zeta applies only to arb, arb-ate and balance");
  bool ds = false;
  for (Method m : methods) ds = ds || m == Method::DoubleSelect;
  if (a.ds_two_lasso && !ds) throw UsageError("--ds-two-lasso applies only to double-select");
  if (!a.dump_weights.empty() && methods.size() != 1)
    throw UsageError("--dump-weights needs exactly one --method");

  EstimatorConfig cfg;
  cfg.zeta = a.zeta;
  cfg.alpha = a.alpha;
  cfg.level = a.level;
  cfg.cv_seed = a.seed;
  cfg.k_folds = a.k_folds;
  cfg.ds_two_lasso = a.ds_two_lasso;
  cfg.validate();

  const Dataset data = load(a.data);
  EstimationContext ctx(data, cfg);
  std::vector<EstimateReport> reports;
  for (Method m : methods) reports.push_back(ctx.run(m));

  if (!a.dump_weights.empty()) {
    const EstimateReport& r = reports.front();
    if (r.control_weights.size() == 0) throw UsageError("method " + r.method + " produces no control weights");
    write_weights(a.dump_weights, r.control_rows, r.control_weights);
  }

  std::ostringstream text;
  if (a.format == "json") {
    json est = json::array();
    for (const auto& r : reports) est.push_back(report_json(r));
    json doc = {{"n", data.n()}, {"n_treated", data.n_treated()}, {"p", data.p()}, {"estimates", est}};
    text << doc.dump(1) << '\n';
  } else {
    text << std::setprecision(6);
    for (const auto& r : reports)
      text << r.method << " tau_hat=" << r.tau_hat << " se=" << std::sqrt(r.var_hat) << " ci=[" << r.ci_lo << ", "
           << r.ci_hi << "]\n";
  }
  if (a.out.empty()) {
    out << text.str();
  } else {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write " + a.out);
    f << text.str();
  }
  return kExitOk;
}

struct WeightsArgs {
  CommonData data;
  std::string form = "lagrange";
  std::string target = "att";
  double zeta = 0.5;
  double K = 1.0;
  double threshold = 0.0;
  bool raw_scale = false;
  std::string out;
};

int run_weights(const WeightsArgs& a, const CLI::App& cmd, std::ostream& out) {
  if (cmd.count("--zeta") && a.form != "lagrange") throw UsageError("--zeta applies only to --form lagrange");
  if (cmd.count("--K") && a.form != "constraint") throw UsageError("--K applies only to --form constraint");
  if (cmd.count("--threshold") != (a.form == "stable" ? 1u : 0u))
    throw UsageError("--threshold is required with, and only with, --form stable");

  const Dataset data = load(a.data);
  EstimatorConfig cfg;
  cfg.balance_standardized = !a.raw_scale;
  EstimationContext ctx(data, cfg);
  const ArmView& c = ctx.arms().control;
  if (c.size() == 0) throw DataError("no control units");
  const Vector& target = a.target == "att" ? ctx.xbar_t() : ctx.xbar();

  BalanceProblem prob;
  prob.Xc = ctx.balance_scale(c.X);
  prob.xi = ctx.balance_scale(target);
  prob.zeta = a.zeta;
  prob.K = a.K;
  BalanceWeights w;
  if (a.form == "lagrange") {
    w = solve_lagrange(prob);
  } else if (a.form == "constraint") {
    prob.form = BalanceForm::Constraint;
    w = solve_constraint(prob);
  } else if (a.form == "stable") {
    w = solve_stable(prob, a.threshold);
  } else if (a.form == "stable-auto") {
    w = solve_stable_auto(prob);
  } else {
    w = solve_entropy(prob);
  }
  if (w.status == SolveStatus::Infeasible) throw NumericError("balance constraint is infeasible");

  if (!a.out.empty()) write_weights(a.out, c.indices, w.gamma);
  json doc = {{"form", a.form},
              {"target", a.target},
              {"n_control", c.size()},
              {"status", to_string(w.status)},
              {"sup_imbalance", real(w.sup_imbalance)},
              {"sq_norm", real(w.sq_norm)},
              {"objective", real(w.objective)},
              {"iterations", w.iterations},
              {"duality_gap", real(w.duality_gap)},
              {"radius", real(w.radius)}};
  if (a.out.empty()) {
    json g = json::array();
    for (Index i = 0; i < w.gamma.size(); ++i) g.push_back(w.gamma(i));
    doc["weights"] = g;
  }
  out << doc.dump(1) << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string design = "two_cluster";
  Index n = 200;
  Index p = 400;
  std::uint64_t seed = 1;
  std::uint64_t replication = 0;
  std::string beta;
  double beta_norm = 0.0;
  std::string delta = "sparse";
  double eta = 0.25;
  int n_clusters = 20;
  double rho = 0.5;
  std::string beta_w = "inverse_square";
  double beta_w_norm = 1.0;
  std::string out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SimulationDesign d = default_design(parse_design_kind(a.design));
  d.n = a.n;
  d.p = a.p;
  d.seed = a.seed;
  if (!a.beta.empty()) d.beta.kind = parse_beta_kind(a.beta);
  if (a.beta_norm > 0.0) d.beta.norm = a.beta_norm;
  d.delta = parse_delta_kind(a.delta);
  d.eta = a.eta;
  d.n_clusters = a.n_clusters;
  d.rho = a.rho;
  d.beta_w = {parse_beta_kind(a.beta_w), a.beta_w_norm};
  d.validate();

  const SimDraw s = draw(d, a.replication);
  save_csv(s.data, a.out);
  const std::string sidecar = a.out + ".json";
  json meta = {{"design", to_string(d.kind)},
               {"label", d.label()},
               {"n", d.n},
               {"p", d.p},
               {"seed", d.seed},
               {"replication", a.replication},
               {"n_treated", s.data.n_treated()},
               {"tau_true", s.tau_true},
               {"tau_population", s.tau_population}};
  std::ofstream f(sidecar);
  if (!f) throw DataError("cannot write " + sidecar);
  f << meta.dump(1) << '\n';
  if (!f) throw DataError("failed writing " + sidecar);
  out << "wrote " << a.out << " and " << sidecar << '\n';
  return kExitOk;
}

struct BenchmarkArgs {
  std::string spec;
  std::string out;
  std::string json_out;
  int jobs = 1;
  double max_seconds = 0.0;
  std::string reference;
  bool no_reference = false;
};

int run_benchmark(const BenchmarkArgs& a, bool verbose, std::ostream& out, std::ostream& err) {
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (!a.reference.empty() && a.no_reference) throw UsageError("--reference conflicts with --no-reference");
  const ExperimentSpec spec = load_experiment(a.spec);

  RunOptions opts;
  opts.jobs = a.jobs;
  opts.max_seconds = a.max_seconds;
  if (verbose) {
    opts.progress = [&err](std::size_t done, std::size_t total) {
      err << "\rreplications " << done << '/' << total << std::flush;
      if (done == total) err << '\n';
    };
  }
  const ResultsTable table = run_experiment(spec, opts);

  const std::string csv_path = a.out.empty() ? spec.output : a.out;
  if (csv_path.empty())
    emit_table(table, out, TableFormat::Csv);
  else
    emit_table(table, csv_path, TableFormat::Csv);
  if (!a.json_out.empty()) emit_table(table, a.json_out, TableFormat::Json);
  if (!table.complete) err << "warning: time budget reached; table is incomplete\n";

  if (!a.no_reference) {
    const auto path = a.reference.empty() ? default_reference_path() : std::filesystem::path(a.reference);
    const ComparisonReport rep = compare_to_reference(table, spec.designs, load_reference(path));
    err << std::setprecision(3);
    if (verbose) {
      for (const auto& e : rep.entries)
        err << "reference cell " << e.cell << ' ' << e.method << ' ' << e.metric << ": observed " << e.observed
            << ", published " << e.reference << ", ratio " << e.ratio << '\n';
    }
    for (const auto& inv : rep.inversions)
      err << "ordering inversion in cell " << inv.cell << ": " << inv.better << " should beat " << inv.worse << '\n';
    err << "reference comparison: " << rep.entries.size() << " matched values, " << rep.discrepancies()
        << " ordering inversions (advisory)\n";
  }

  bool all_pass = true;
  for (const auto& c : evaluate_checks(table, spec.checks)) {
    err << (c.passed ? "PASS " : "FAIL ") << c.description << '\n';
    all_pass = all_pass && c.passed;
  }
  return all_pass ? kExitOk : kExitChecksFailed;
}

}  // namespace

int default_jobs() {
  if (const char* env = std::getenv("RESBAL_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Treatment effect estimation with approximate residual balancing", "resbal"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 benchmark checks failed, 2 usage error, 3 data error, 4 numeric failure.");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Print progress and extra diagnostics to stderr");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a treatment effect from a CSV file");
  add_data_options(estimate, est.data);
  estimate->add_option("--method", est.methods, "Estimator; repeat for several (" + [] {
    std::string s;
    for (Method m : all_methods()) s += (s.empty() ? "" : ", ") + method_name(m);
    return s;
  }() + ")")->capture_default_str();
  estimate->add_option("--zeta", est.zeta, "Balance/variance trade-off of the weights, in (0, 1)")
      ->capture_default_str();
  estimate->add_option("--alpha", est.alpha, "Elastic-net mixing weight, in (0, 1]")->capture_default_str();
  estimate->add_option("--level", est.level, "Confidence level")->capture_default_str();
  estimate->add_option("--seed", est.seed, "Seed for cross-validation folds")->capture_default_str();
  estimate->add_option("--k-folds", est.k_folds, "Cross-validation folds")->capture_default_str();
  estimate->add_flag("--ds-two-lasso", est.ds_two_lasso, "Double selection without the treated-arm lasso");
  estimate->add_option("--dump-weights", est.dump_weights, "Write control weights (row,weight) to this CSV");
  estimate->add_option("--out", est.out, "Write results here instead of stdout");
  estimate->add_option("--format", est.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();

  WeightsArgs wa;
  auto* weights = app.add_subcommand("weights", "Compute balancing weights over the control units");
  add_data_options(weights, wa.data);
  weights->add_option("--form", wa.form, "Weight problem")
      ->check(CLI::IsMember({"lagrange", "constraint", "stable", "stable-auto", "entropy"}))
      ->capture_default_str();
  weights->add_option("--target", wa.target, "Covariate mean to balance towards")
      ->check(CLI::IsMember({"att", "ate"}))
      ->capture_default_str();
  weights->add_option("--zeta", wa.zeta, "Lagrange trade-off, in (0, 1)")->capture_default_str();
  weights->add_option("--K", wa.K, "Constraint radius multiplier")->capture_default_str();
  weights->add_option("--threshold", wa.threshold, "Imbalance cap for --form stable");
  weights->add_flag("--raw-scale", wa.raw_scale, "Measure imbalance on unstandardized covariates");
  weights->add_option("--out", wa.out, "Write weights (row,weight) to this CSV");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Draw one dataset from a simulation design");
  simulate->add_option("--design", sa.design, "two_cluster, many_cluster, sparse_two_stage, "
                                              "moderately_sparse_two_stage or misspecified")
      ->capture_default_str();
  simulate->add_option("--n", sa.n, "Sample size")->capture_default_str();
  simulate->add_option("--p", sa.p, "Number of covariates")->capture_default_str();
  simulate->add_option("--seed", sa.seed, "Design seed")->capture_default_str();
  simulate->add_option("--replication", sa.replication, "Replication index")->capture_default_str();
  simulate->add_option("--beta", sa.beta, "Outcome coefficient pattern (design default if omitted)");
  simulate->add_option("--beta-norm", sa.beta_norm, "Norm of the outcome coefficients (design default if omitted)");
  simulate->add_option("--delta", sa.delta, "Two-cluster propensity direction: dense or sparse")
      ->capture_default_str();
  simulate->add_option("--eta", sa.eta, "Many-cluster overlap")->capture_default_str();
  simulate->add_option("--n-clusters", sa.n_clusters, "Many-cluster cluster count")->capture_default_str();
  simulate->add_option("--rho", sa.rho, "Two-stage AR(1) correlation")->capture_default_str();
  simulate->add_option("--beta-w", sa.beta_w, "Sparse two-stage propensity pattern")->capture_default_str();
  simulate->add_option("--beta-w-norm", sa.beta_w_norm, "Norm of the propensity coefficients")
      ->capture_default_str();
  simulate->add_option("--out", sa.out, "Output CSV; metadata goes to <out>.json")->required();

  BenchmarkArgs ba;
  ba.jobs = default_jobs();
  auto* benchmark = app.add_subcommand("benchmark", "Run a Monte Carlo experiment from a JSON spec");
  benchmark->add_option("--spec", ba.spec, "Experiment spec (JSON)")->required();
  benchmark->add_option("--out", ba.out, "Results CSV (default: the spec's output, else stdout)");
  benchmark->add_option("--json", ba.json_out, "Also write the results as JSON");
  benchmark->add_option("--jobs", ba.jobs, "Worker threads (default from RESBAL_JOBS, else 1)");
  benchmark->add_option("--max-seconds", ba.max_seconds, "Wall-clock budget; 0 for none")->capture_default_str();
  benchmark->add_option("--reference", ba.reference, "Published values to compare against");
  benchmark->add_flag("--no-reference", ba.no_reference, "Skip the reference comparison");

  std::vector<std::string> argv_store{"resbal"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return run_estimate(est, *estimate, out);
    if (*weights) return run_weights(wa, *weights, out);
    if (*simulate) return run_simulate(sa, out);
    return run_benchmark(ba, verbose, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace resbal
