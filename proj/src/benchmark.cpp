#include "resbal/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "resbal/errors.hpp"

namespace resbal {

namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("bad value for '") + key + "'");
  }
}

Check parse_check(const json& j) {
  if (!j.is_object()) throw UsageError("each check must be an object");
  reject_unknown_keys(j, {"type", "cell", "metric", "methods", "method", "than", "min", "max"}, "check");
  Check c;
  c.type = get_or<std::string>(j, "type", "");
  c.cell = get_or<std::size_t>(j, "cell", 0);
  c.metric = get_or<std::string>(j, "metric", "rmse");
  c.methods = get_or<std::vector<std::string>>(j, "methods", {});
  c.method = get_or<std::string>(j, "method", "");
  c.than = get_or<std::string>(j, "than", "");
  c.min = get_or<double>(j, "min", -std::numeric_limits<double>::infinity());
  c.max = get_or<double>(j, "max", std::numeric_limits<double>::infinity());
  if (c.type == "ordering") {
    if (c.methods.size() < 2) throw UsageError("ordering check needs at least two methods");
  } else if (c.type == "less") {
    if (c.method.empty() || c.than.empty()) throw UsageError("less check needs 'method' and 'than'");
  } else if (c.type == "range") {
    if (c.method.empty()) throw UsageError("range check needs 'method'");
  } else {
    throw UsageError("unknown check type '" + c.type + "'");
  }
  return c;
}

struct MethodOutcome {
  bool ok = false;
  double tau_hat = kNaN;
  double ci_lo = kNaN;
  double ci_hi = kNaN;
};

struct Replication {
  double tau_true = kNaN;
  double tau_population = kNaN;
  std::vector<MethodOutcome> methods;
};

Replication run_replication(const ExperimentSpec& spec, std::size_t cell, std::size_t rep) {
  Replication out;
  out.methods.resize(spec.methods.size());
  std::optional<SimDraw> d;
  try {
    d = draw(spec.designs[cell], rep);
  } catch (const std::exception&) {
    return out;
  }
  out.tau_true = d->tau_true;
  out.tau_population = d->tau_population;

  EstimatorConfig cfg = spec.estimator;
  cfg.level = spec.level;
  cfg.cv_seed = spec.estimator.cv_seed + 1000003ULL * cell + 7919ULL * rep;
  std::optional<EstimationContext> ctx;
  try {
    ctx.emplace(d->data, cfg);
  } catch (const std::exception&) {
    return out;
  }
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    try {
      const EstimateReport r = ctx->run(spec.methods[m]);
      if (!std::isfinite(r.tau_hat)) continue;
      out.methods[m] = {true, r.tau_hat, r.ci_lo, r.ci_hi};
    } catch (const std::exception&) {
    }
  }
  return out;
}

ResultRow aggregate(const ExperimentSpec& spec, std::size_t cell, std::size_t m,
                    const std::vector<const Replication*>& reps) {
  ResultRow row;
  row.cell = cell;
  row.cell_label = spec.designs[cell].label();
  row.method = method_name(spec.methods[m]);
  double sum_e = 0.0, sum_e2 = 0.0, sum_ep2 = 0.0, width = 0.0;
  int covered = 0;
  std::vector<double> errors;
  for (const Replication* r : reps) {
    const MethodOutcome& o = r->methods[m];
    if (!o.ok) {
      ++row.n_fail;
      continue;
    }
    ++row.n_ok;
    const double e = o.tau_hat - r->tau_true;
    const double ep = o.tau_hat - r->tau_population;
    errors.push_back(e);
    sum_e += e;
    sum_e2 += e * e;
    sum_ep2 += ep * ep;
    width += o.ci_hi - o.ci_lo;
    if (o.ci_lo <= r->tau_true && r->tau_true <= o.ci_hi) ++covered;
  }
  if (row.n_ok == 0) {
    row.rmse = row.bias = row.sd = row.coverage = row.mean_ci_width = row.rmse_population = kNaN;
    return row;
  }
  const double k = row.n_ok;
  row.bias = sum_e / k;
  double ss = 0.0;
  for (double e : errors) ss += (e - row.bias) * (e - row.bias);
  row.sd = std::sqrt(ss / k);
  row.rmse = std::sqrt(sum_e2 / k);
  row.rmse_population = std::sqrt(sum_ep2 / k);
  row.coverage = covered / k;
  row.mean_ci_width = width / k;
  return row;
}

std::string fixed3(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << x;
  return out.str();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_real(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw DataError("bad number '" + s + "' in results table");
  return v;
}

double json_real(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? kNaN : v.get<double>();
}

const char* kCsvHeader = "cell,label,method,rmse,bias,sd,coverage,mean_ci_width,rmse_population,n_ok,n_fail";

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

json design_params(const SimulationDesign& d) {
  json p = {{"n", d.n}, {"p", d.p}};
  switch (d.kind) {
    case DesignKind::TwoCluster:
      p["beta"] = to_string(d.beta.kind);
      p["beta_norm"] = d.beta.norm;
      p["delta"] = to_string(d.delta);
      break;
    case DesignKind::ManyCluster:
      p["beta"] = to_string(d.beta.kind);
      p["beta_norm"] = d.beta.norm;
      p["eta"] = d.eta;
      p["n_clusters"] = d.n_clusters;
      break;
    case DesignKind::SparseTwoStage:
      p["beta_norm"] = d.beta.norm;
      p["beta_w"] = to_string(d.beta_w.kind);
      p["beta_w_norm"] = d.beta_w.norm;
      p["rho"] = d.rho;
      break;
    case DesignKind::ModeratelySparseTwoStage:
      p["beta"] = to_string(d.beta.kind);
      p["beta_norm"] = d.beta.norm;
      p["rho"] = d.rho;
      break;
    case DesignKind::Misspecified:
      break;
  }
  return p;
}

}  // namespace

SimulationDesign parse_design(const json& j) {
  if (!j.is_object()) throw UsageError("each design must be an object");
  reject_unknown_keys(j,
                      {"design", "n", "p", "beta", "beta_norm", "delta", "eta", "n_clusters", "rho", "beta_w",
                       "beta_w_norm", "seed"},
                      "design");
  if (!j.contains("design")) throw UsageError("design entry needs a 'design' kind");
  SimulationDesign d = default_design(parse_design_kind(get_or<std::string>(j, "design", "")));
  d.n = get_or<Index>(j, "n", d.n);
  d.p = get_or<Index>(j, "p", d.p);
  if (j.contains("beta")) d.beta.kind = parse_beta_kind(get_or<std::string>(j, "beta", ""));
  d.beta.norm = get_or<double>(j, "beta_norm", d.beta.norm);
  if (j.contains("delta")) d.delta = parse_delta_kind(get_or<std::string>(j, "delta", ""));
  d.eta = get_or<double>(j, "eta", d.eta);
  d.n_clusters = get_or<int>(j, "n_clusters", d.n_clusters);
  d.rho = get_or<double>(j, "rho", d.rho);
  if (j.contains("beta_w")) d.beta_w.kind = parse_beta_kind(get_or<std::string>(j, "beta_w", ""));
  d.beta_w.norm = get_or<double>(j, "beta_w_norm", d.beta_w.norm);
  d.seed = get_or<std::uint64_t>(j, "seed", 0);
  d.validate();
  return d;
}

void ExperimentSpec::validate() const {
  if (designs.empty()) throw UsageError("experiment needs at least one design");
  if (methods.empty()) throw UsageError("experiment needs at least one method");
  if (replications < 1) throw UsageError("replications must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  for (const auto& d : designs) d.validate();
  estimator.validate();
  for (const auto& c : checks) {
    if (c.cell >= designs.size()) throw UsageError("check refers to a cell that does not exist");
    auto known = [&](const std::string& name) {
      for (Method m : methods)
        if (method_name(m) == name) return true;
      return false;
    };
    std::vector<std::string> names = c.methods;
    if (!c.method.empty()) names.push_back(c.method);
    if (!c.than.empty()) names.push_back(c.than);
    for (const auto& name : names)
      if (!known(name)) throw UsageError("check refers to method '" + name + "' not in the experiment");
    ResultRow probe;
    metric_value(probe, c.metric);
  }
}

ExperimentSpec parse_experiment(const json& j) {
  if (!j.is_object()) throw UsageError("experiment spec must be a JSON object");
  reject_unknown_keys(j, {"designs", "methods", "replications", "level", "seed", "output", "estimator", "checks"},
                      "experiment spec");
  ExperimentSpec spec;
  spec.replications = get_or<int>(j, "replications", spec.replications);
  spec.level = get_or<double>(j, "level", spec.level);
  spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
  spec.output = get_or<std::string>(j, "output", "");
  if (!j.contains("designs") || !j.at("designs").is_array()) throw UsageError("'designs' must be an array");
  for (std::size_t c = 0; c < j.at("designs").size(); ++c) {
    const json& dj = j.at("designs")[c];
    SimulationDesign d = parse_design(dj);
    if (!dj.contains("seed")) d.seed = spec.seed + c;
    spec.designs.push_back(d);
  }
  if (!j.contains("methods") || !j.at("methods").is_array()) throw UsageError("'methods' must be an array");
  for (const auto& m : j.at("methods")) {
    if (!m.is_string()) throw UsageError("method names must be strings");
    spec.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    reject_unknown_keys(e, {"zeta", "alpha", "prop_alpha", "trim_lo", "trim_hi", "k_folds", "cv_seed", "ds_two_lasso"},
                        "estimator");
    EstimatorConfig& c = spec.estimator;
    c.zeta = get_or<double>(e, "zeta", c.zeta);
    c.alpha = get_or<double>(e, "alpha", c.alpha);
    c.prop_alpha = get_or<double>(e, "prop_alpha", c.prop_alpha);
    c.trim_lo = get_or<double>(e, "trim_lo", c.trim_lo);
    c.trim_hi = get_or<double>(e, "trim_hi", c.trim_hi);
    c.k_folds = get_or<int>(e, "k_folds", c.k_folds);
    c.cv_seed = get_or<std::uint64_t>(e, "cv_seed", c.cv_seed);
    c.ds_two_lasso = get_or<bool>(e, "ds_two_lasso", c.ds_two_lasso);
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) throw UsageError("'checks' must be an array");
    for (const auto& c : j.at("checks")) spec.checks.push_back(parse_check(c));
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open experiment spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("malformed experiment spec " + path.string() + ": " + e.what());
  }
  return parse_experiment(j);
}

const ResultRow* ResultsTable::find(std::size_t cell, const std::string& method) const {
  for (const auto& r : rows)
    if (r.cell == cell && r.method == method) return &r;
  return nullptr;
}

ResultsTable run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const std::size_t n_cells = spec.designs.size();
  const std::size_t n_reps = static_cast<std::size_t>(spec.replications);
  const std::size_t total = n_cells * n_reps;
  std::vector<std::optional<Replication>> results(total);

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::atomic<std::size_t> next{0}, done{0};
  std::atomic<bool> expired{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      if (opts.max_seconds > 0.0 &&
          std::chrono::duration<double>(clock::now() - start).count() >= opts.max_seconds)
        expired = true;
      if (expired) return;
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      results[task] = run_replication(spec, task / n_reps, task % n_reps);
      const std::size_t finished = ++done;
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        opts.progress(finished, total);
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  ResultsTable table;
  table.replications = spec.replications;
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::vector<const Replication*> reps;
    for (std::size_t r = 0; r < n_reps; ++r)
      if (results[c * n_reps + r]) reps.push_back(&*results[c * n_reps + r]);
    table.replications_done.push_back(static_cast<int>(reps.size()));
    if (reps.size() != n_reps) table.complete = false;
    for (std::size_t m = 0; m < spec.methods.size(); ++m) table.rows.push_back(aggregate(spec, c, m, reps));
  }
  return table;
}

double metric_value(const ResultRow& row, const std::string& metric) {
  if (metric == "rmse") return row.rmse;
  if (metric == "bias") return row.bias;
  if (metric == "sd") return row.sd;
  if (metric == "coverage") return row.coverage;
  if (metric == "mean_ci_width") return row.mean_ci_width;
  if (metric == "rmse_population") return row.rmse_population;
  if (metric == "n_fail") return row.n_fail;
  throw UsageError("unknown metric '" + metric + "'");
}

json table_to_json(const ResultsTable& table) {
  json rows = json::array();
  auto real = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  for (const auto& r : table.rows) {
    rows.push_back({{"cell", r.cell},
                    {"label", r.cell_label},
                    {"method", r.method},
                    {"rmse", real(r.rmse)},
                    {"bias", real(r.bias)},
                    {"sd", real(r.sd)},
                    {"coverage", real(r.coverage)},
                    {"mean_ci_width", real(r.mean_ci_width)},
                    {"rmse_population", real(r.rmse_population)},
                    {"n_ok", r.n_ok},
                    {"n_fail", r.n_fail}});
  }
  return {{"complete", table.complete},
          {"replications", table.replications},
          {"replications_done", table.replications_done},
          {"rows", rows}};
}

void emit_table(const ResultsTable& table, std::ostream& out, TableFormat format) {
  if (format == TableFormat::Json) {
    out << table_to_json(table).dump(1) << '\n';
    return;
  }
  out << kCsvHeader << '\n';
  for (const auto& r : table.rows) {
    out << r.cell << ',' << csv_quote(r.cell_label) << ',' << r.method << ',' << fixed3(r.rmse) << ','
        << fixed3(r.bias) << ',' << fixed3(r.sd) << ',' << fixed3(r.coverage) << ',' << fixed3(r.mean_ci_width)
        << ',' << fixed3(r.rmse_population) << ',' << r.n_ok << ',' << r.n_fail << '\n';
  }
}

void emit_table(const ResultsTable& table, const std::filesystem::path& path, TableFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  emit_table(table, out, format);
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

ResultsTable read_table_json(const json& j) {
  ResultsTable t;
  try {
    t.complete = j.at("complete").get<bool>();
    t.replications = j.at("replications").get<int>();
    t.replications_done = j.at("replications_done").get<std::vector<int>>();
    for (const auto& r : j.at("rows")) {
      ResultRow row;
      row.cell = r.at("cell").get<std::size_t>();
      row.cell_label = r.at("label").get<std::string>();
      row.method = r.at("method").get<std::string>();
      row.rmse = json_real(r, "rmse");
      row.bias = json_real(r, "bias");
      row.sd = json_real(r, "sd");
      row.coverage = json_real(r, "coverage");
      row.mean_ci_width = json_real(r, "mean_ci_width");
      row.rmse_population = json_real(r, "rmse_population");
      row.n_ok = r.at("n_ok").get<int>();
      row.n_fail = r.at("n_fail").get<int>();
      t.rows.push_back(row);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed results table: ") + e.what());
  }
  return t;
}

ResultsTable read_table_csv(std::istream& in) {
  ResultsTable t;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw DataError("results CSV has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) throw DataError("results CSV row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    try {
      r.cell = std::stoul(f[0]);
      r.cell_label = f[1];
      r.method = f[2];
      r.rmse = parse_real(f[3]);
      r.bias = parse_real(f[4]);
      r.sd = parse_real(f[5]);
      r.coverage = parse_real(f[6]);
      r.mean_ci_width = parse_real(f[7]);
      r.rmse_population = parse_real(f[8]);
      r.n_ok = std::stoi(f[9]);
      r.n_fail = std::stoi(f[10]);
    } catch (const std::logic_error&) {
      throw DataError("bad number in results CSV row: " + line);
    }
    t.rows.push_back(r);
  }
  return t;
}

std::vector<CheckResult> evaluate_checks(const ResultsTable& table, const std::vector<Check>& checks) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult res;
    auto value = [&](const std::string& method) {
      const ResultRow* r = table.find(c.cell, method);
      return r ? metric_value(*r, c.metric) : kNaN;
    };
    std::ostringstream desc;
    desc << "cell " << c.cell << ' ' << c.metric << ": ";
    if (c.type == "ordering") {
      res.passed = true;
      for (std::size_t i = 0; i < c.methods.size(); ++i) {
        const double v = value(c.methods[i]);
        desc << (i ? " <= " : "") << c.methods[i] << '(' << fixed3(v) << ')';
        if (i > 0 && !(value(c.methods[i - 1]) <= v)) res.passed = false;
      }
    } else if (c.type == "less") {
      const double a = value(c.method), b = value(c.than);
      desc << c.method << '(' << fixed3(a) << ") < " << c.than << '(' << fixed3(b) << ')';
      res.passed = a < b;
    } else {
      const double v = value(c.method);
      desc << c.method << '(' << fixed3(v) << ") in [" << c.min << ", " << c.max << ']';
      res.passed = v >= c.min && v <= c.max;
    }
    res.description = desc.str();
    out.push_back(res);
  }
  return out;
}

bool design_matches(const SimulationDesign& design, DesignKind kind, const json& params) {
  if (design.kind != kind) return false;
  const json have = design_params(design);
  for (const auto& [key, want] : params.items()) {
    if (!have.contains(key)) return false;
    const json& got = have.at(key);
    if (want.is_string()) {
      if (!got.is_string() || got.get<std::string>() != want.get<std::string>()) return false;
    } else if (want.is_number()) {
      if (!got.is_number() || !near(got.get<double>(), want.get<double>())) return false;
    } else {
      return false;
    }
  }
  return true;
}

ReferenceSet parse_reference(const json& j) {
  ReferenceSet set;
  try {
    for (const auto& g : j.at("groups")) {
      const DesignKind kind = parse_design_kind(g.at("design").get<std::string>());
      const std::string metric = g.value("metric", std::string("rmse"));
      const std::string source = g.value("source", std::string());
      const json shared = g.value("params", json::object());
      for (const auto& cell : g.at("cells")) {
        json params = shared;
        params.update(cell.value("params", json::object()));
        for (const auto& [method, v] : cell.at("values").items()) {
          parse_method(method);
          set.entries.push_back({source, kind, params, metric, method, v.get<double>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed reference file: ") + e.what());
  }
  return set;
}

ReferenceSet load_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open reference file " + path.string());
  try {
    return parse_reference(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("malformed reference file " + path.string() + ": " + e.what());
  }
}

std::filesystem::path default_reference_path() {
  return std::filesystem::path(RESBAL_DATA_DIR) / "reference_values.json";
}

ReferenceSet reference_from_table(const ResultsTable& table, const std::vector<SimulationDesign>& designs) {
  ReferenceSet set;
  for (const auto& r : table.rows) {
    if (r.cell >= designs.size()) throw UsageError("table refers to a cell without a design");
    const SimulationDesign& d = designs[r.cell];
    for (const char* metric : {"rmse", "coverage"}) {
      const double v = metric_value(r, metric);
      if (std::isfinite(v)) set.entries.push_back({"self", d.kind, design_params(d), metric, r.method, v});
    }
  }
  return set;
}

ComparisonReport compare_to_reference(const ResultsTable& table, const std::vector<SimulationDesign>& designs,
                                      const ReferenceSet& reference) {
  ComparisonReport report;
  for (std::size_t c = 0; c < designs.size(); ++c) {
    std::vector<ComparisonEntry> cell_entries;
    for (const auto& e : reference.entries) {
      if (!design_matches(designs[c], e.design, e.params)) continue;
      const ResultRow* row = table.find(c, e.method);
      if (!row) continue;
      const double obs = metric_value(*row, e.metric);
      if (!std::isfinite(obs)) continue;
      cell_entries.push_back({c, e.method, e.metric, obs, e.value, e.value != 0.0 ? obs / e.value : kNaN});
    }
    for (std::size_t a = 0; a < cell_entries.size(); ++a) {
      for (std::size_t b = 0; b < cell_entries.size(); ++b) {
        const auto& x = cell_entries[a];
        const auto& y = cell_entries[b];
        if (x.metric != "rmse" || y.metric != "rmse" || x.method == y.method) continue;
        if (x.reference < y.reference && x.observed > y.observed)
          report.inversions.push_back({c, "rmse", x.method, y.method});
      }
    }
    report.entries.insert(report.entries.end(), cell_entries.begin(), cell_entries.end());
  }
  return report;
}

}  // namespace resbal
