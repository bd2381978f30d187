#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include "json.hpp"
#include <string>
#include <vector>

#include "resbal/estimators.hpp"
#include "resbal/simulations.hpp"

namespace resbal {

// A hard pass/fail condition evaluated on the aggregated table.
//   ordering: `metric` is non-decreasing along `methods` in cell `cell`
//   less:     `metric` of `method` is strictly below that of `than`
//   range:    `metric` of `method` lies in [min, max]
struct Check {
  std::string type;
  std::size_t cell = 0;
  std::string metric = "rmse";
  std::vector<std::string> methods;
  std::string method;
  std::string than;
  double min = 0.0;
  double max = 0.0;
};

struct ExperimentSpec {
  std::vector<SimulationDesign> designs;
  std::vector<Method> methods;
  int replications = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  std::string output;
  EstimatorConfig estimator;
  std::vector<Check> checks;

  void validate() const;
};

ExperimentSpec parse_experiment(const nlohmann::json& j);
ExperimentSpec load_experiment(const std::filesystem::path& path);
SimulationDesign parse_design(const nlohmann::json& j);

struct ResultRow {
  std::size_t cell = 0;
  std::string cell_label;
  std::string method;
  double rmse = 0.0;
  double bias = 0.0;
  double sd = 0.0;              // population sd of the errors, so rmse^2 = bias^2 + sd^2
  double coverage = 0.0;
  double mean_ci_width = 0.0;
  double rmse_population = 0.0;  // against the design's population estimand
  int n_ok = 0;
  int n_fail = 0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;  // cell-major, methods in spec order
  bool complete = true;
  int replications = 0;         // requested per cell
  std::vector<int> replications_done;  // per cell

  const ResultRow* find(std::size_t cell, const std::string& method) const;
};

struct RunOptions {
  int jobs = 1;
  double max_seconds = 0.0;  // <= 0: no budget
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Replication r of cell c draws from substream r of the cell's seed and fits
// every method on that draw; aggregation follows replication order, so the
// table does not depend on `jobs`. With a time budget, replications not
// started before the deadline are dropped and the table is marked incomplete.
ResultsTable run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});

enum class TableFormat { Csv, Json };

void emit_table(const ResultsTable& table, std::ostream& out, TableFormat format);
void emit_table(const ResultsTable& table, const std::filesystem::path& path, TableFormat format);
ResultsTable read_table_json(const nlohmann::json& j);
ResultsTable read_table_csv(std::istream& in);
nlohmann::json table_to_json(const ResultsTable& table);

double metric_value(const ResultRow& row, const std::string& metric);

struct CheckResult {
  std::string description;
  bool passed = false;
};

std::vector<CheckResult> evaluate_checks(const ResultsTable& table, const std::vector<Check>& checks);

// Published values keyed by design parameters. An entry applies to a table
// cell when every parameter it names matches the cell's design.
struct ReferenceEntry {
  std::string source;
  DesignKind design = DesignKind::TwoCluster;
  nlohmann::json params;
  std::string metric = "rmse";
  std::string method;
  double value = 0.0;
};

struct ReferenceSet {
  std::vector<ReferenceEntry> entries;
};

ReferenceSet load_reference(const std::filesystem::path& path);
ReferenceSet parse_reference(const nlohmann::json& j);
// Reference path shipped with the sources.
std::filesystem::path default_reference_path();
// Reference values equal to the table's own numbers (for self-comparison).
ReferenceSet reference_from_table(const ResultsTable& table, const std::vector<SimulationDesign>& designs);

struct ComparisonEntry {
  std::size_t cell = 0;
  std::string method;
  std::string metric;
  double observed = 0.0;
  double reference = 0.0;
  double ratio = 0.0;
};

struct OrderingInversion {
  std::size_t cell = 0;
  std::string metric;
  std::string better;  // lower in the reference
  std::string worse;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
  std::vector<OrderingInversion> inversions;

  std::size_t discrepancies() const { return inversions.size(); }
};

ComparisonReport compare_to_reference(const ResultsTable& table, const std::vector<SimulationDesign>& designs,
                                      const ReferenceSet& reference);

bool design_matches(const SimulationDesign& design, DesignKind kind, const nlohmann::json& params);

}  // namespace resbal
