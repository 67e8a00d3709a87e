#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rebalance/baselines.hpp"
#include "rebalance/bpso.hpp"
#include "rebalance/dataset.hpp"
#include "rebalance/evaluation.hpp"
#include "rebalance/learners.hpp"
#include "rebalance/metrics.hpp"

namespace rebalance {

enum class MethodId : std::uint8_t {
  dt,
  resample,
  bagging,
  cost,
  adaboost,
  adacost,
  easyensemble,
  balancecascade,
  rusboost,
  psois_dt,
  psois_adab,
  psois_adac,
  psois_bagging,
  bpsois_dt,
  bpsois_adab,
  bpsois_adac,
  bpsois_bagging,
};

std::optional<MethodId> parse_method(std::string_view id);
std::string_view method_name(MethodId id);
const std::vector<MethodId>& all_methods();
bool is_swarm_method(MethodId id);

struct HarnessConfig {
  int folds = 10;
  std::uint64_t seed = 42;
  SwarmConfig swarm;            // population/iteration/mode fields; seed is re-derived per fold
  TreeParams tree;
  EnsembleConfig boost{50, 100};
  CostMatrix costs{50.0, 5.0};
  int bagging_members = 50;
  int easy_subsets = 100;
  int easy_rounds = 10;
  int cascade_rounds = 100;
  int cascade_inner_rounds = 10;
  EnsembleConfig rus{100, 100};
  double rus_rate = 0.75;
};

/// The learner a swarm method wraps (also used to train on the final subset).
LearnerSpec wrapped_learner(MethodId id, const HarnessConfig& cfg);

struct MethodOutcome {
  MetricReport mean;                   // over valid folds; elapsed = total seconds
  std::vector<MetricReport> folds;
  std::vector<bool> fold_valid;
  std::vector<ParetoArchive> archives; // per fold, swarm methods only
  double elapsed_seconds = 0.0;
};

/// Outer stratified k-fold evaluation of one method. Swarm methods search on
/// each fold's training part only and are scored on the untouched test fold.
MethodOutcome evaluate_method(const BinaryDataset& ds, MethodId id, const HarnessConfig& cfg);

struct ResultRow {
  std::string dataset;
  MethodId method = MethodId::dt;
  bool failed = false;
  std::string error;
  MetricReport mean;
};

std::string metrics_csv_header();
std::string summary_csv_header();
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Per-method mean and sample standard deviation over datasets (failed rows
/// excluded), in first-appearance method order.
void write_summary_csvs(std::ostream& mean_out, std::ostream& std_out,
                        const std::vector<ResultRow>& rows);
void write_archive_csv(std::ostream& out, const std::vector<ParetoArchive>& archives);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

std::vector<MethodId> experiment_methods(int which);  // 1 or 2

/// Desk preset: small swarm and ensembles for a quick full pass.
void apply_desk_scale(HarnessConfig& cfg);
const std::vector<std::string>& desk_dataset_names();

struct ExperimentConfig {
  HarnessConfig harness;
  int which = 1;
  bool desk_scale = false;
  std::string out_dir = ".";
};

struct NamedDataset {
  std::string name;
  BinaryDataset data;
};

/// Runs every (dataset, method) cell, writes results_<which>.csv,
/// summary_mean.csv, summary_std.csv and per-cell archive CSVs into out_dir.
/// Per-cell failures land in the error column without aborting the run.
std::vector<ResultRow> run_experiment(const std::vector<NamedDataset>& datasets,
                                      const ExperimentConfig& cfg, std::ostream* progress);

/// Shortest round-trip decimal form (to_chars).
std::string format_double(double v);

}  // namespace rebalance
