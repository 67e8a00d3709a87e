#include "rebalance/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>

#include "rebalance/errors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {
namespace {

struct MethodEntry {
  MethodId id;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {MethodId::dt, "dt"},
    {MethodId::resample, "resample"},
    {MethodId::bagging, "bagging"},
    {MethodId::cost, "cost"},
    {MethodId::adaboost, "adaboost"},
    {MethodId::adacost, "adacost"},
    {MethodId::easyensemble, "easyensemble"},
    {MethodId::balancecascade, "balancecascade"},
    {MethodId::rusboost, "rusboost"},
    {MethodId::psois_dt, "psois_dt"},
    {MethodId::psois_adab, "psois_adab"},
    {MethodId::psois_adac, "psois_adac"},
    {MethodId::psois_bagging, "psois_bagging"},
    {MethodId::bpsois_dt, "bpsois_dt"},
    {MethodId::bpsois_adab, "bpsois_adab"},
    {MethodId::bpsois_adac, "bpsois_adac"},
    {MethodId::bpsois_bagging, "bpsois_bagging"},
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::optional<MethodId> parse_method(std::string_view id) {
  for (const auto& entry : kMethods)
    if (entry.name == id) return entry.id;
  return std::nullopt;
}

std::string_view method_name(MethodId id) {
  for (const auto& entry : kMethods)
    if (entry.id == id) return entry.name;
  return "unknown";
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> ids = [] {
    std::vector<MethodId> v;
    for (const auto& entry : kMethods) v.push_back(entry.id);
    return v;
  }();
  return ids;
}

bool is_swarm_method(MethodId id) {
  switch (id) {
    case MethodId::psois_dt:
    case MethodId::psois_adab:
    case MethodId::psois_adac:
    case MethodId::psois_bagging:
    case MethodId::bpsois_dt:
    case MethodId::bpsois_adab:
    case MethodId::bpsois_adac:
    case MethodId::bpsois_bagging:
      return true;
    default:
      return false;
  }
}

LearnerSpec wrapped_learner(MethodId id, const HarnessConfig& cfg) {
  LearnerSpec spec;
  spec.tree = cfg.tree;
  spec.ensemble = cfg.boost;
  spec.costs = cfg.costs;
  switch (id) {
    case MethodId::psois_dt:
    case MethodId::bpsois_dt:
      spec.kind = LearnerKind::tree;
      break;
    case MethodId::psois_adab:
    case MethodId::bpsois_adab:
      spec.kind = LearnerKind::adaboost;
      break;
    case MethodId::psois_adac:
    case MethodId::bpsois_adac:
      spec.kind = LearnerKind::adacost;
      break;
    case MethodId::psois_bagging:
    case MethodId::bpsois_bagging:
      spec.kind = LearnerKind::bagging;
      spec.ensemble.n_members = cfg.bagging_members;
      break;
    default:
      throw Error("not a swarm method");
  }
  return spec;
}

MethodOutcome evaluate_method(const BinaryDataset& ds, MethodId id, const HarnessConfig& cfg) {
  MethodOutcome out;
  FoldPlan plan = stratified_folds(ds, cfg.folds, derive_seed(cfg.seed, seeds::fold_plan));
  out.folds.resize(cfg.folds);
  out.fold_valid.assign(cfg.folds, false);

  std::vector<std::int32_t> train_idx, test_idx;
  std::vector<MetricReport> valid_reports;
  for (int f = 0; f < cfg.folds; ++f) {
    fold_split(plan, f, train_idx, test_idx);
    auto has_both = [&](const std::vector<std::int32_t>& rows) {
      bool maj = false, mnr = false;
      for (std::int32_t i : rows) {
        (ds.labels[i] == ClassTag::majority ? maj : mnr) = true;
        if (maj && mnr) return true;
      }
      return false;
    };
    if (!has_both(train_idx) || !has_both(test_idx)) continue;

    BinaryDataset train_ds = select_rows(ds, train_idx);
    BinaryDataset test_ds = select_rows(ds, test_idx);
    std::uint64_t fold_seed = derive_seed(cfg.seed, seeds::learner, static_cast<std::uint64_t>(f));

    double swarm_integrity = 1.0;
    auto start = Clock::now();
    TrainedModel model = [&]() -> TrainedModel {
      switch (id) {
        case MethodId::dt:
          return train_tree(train_ds, cfg.tree);
        case MethodId::resample: {
          BinaryDataset resampled = resample_uniform(
              train_ds, derive_seed(cfg.seed, seeds::resample, static_cast<std::uint64_t>(f)));
          return train_tree(resampled, cfg.tree);
        }
        case MethodId::bagging:
          return train_bagging(train_ds, cfg.bagging_members, cfg.tree, fold_seed);
        case MethodId::cost:
          return train_cost_sensitive(train_ds, cfg.costs, cfg.tree);
        case MethodId::adaboost:
          return train_adaboost(train_ds, cfg.boost, cfg.tree, fold_seed);
        case MethodId::adacost:
          return train_adacost(train_ds, cfg.costs, cfg.boost, cfg.tree, fold_seed);
        case MethodId::easyensemble:
          return train_easy_ensemble(train_ds, cfg.easy_subsets, cfg.easy_rounds, cfg.tree,
                                     fold_seed);
        case MethodId::balancecascade:
          return train_balance_cascade(train_ds, cfg.cascade_rounds, cfg.cascade_inner_rounds,
                                       cfg.tree, fold_seed);
        case MethodId::rusboost:
          return train_rusboost(train_ds, cfg.rus, cfg.rus_rate, cfg.tree, fold_seed);
        default: {
          SwarmConfig sw = cfg.swarm;
          sw.seed = derive_seed(cfg.seed, seeds::swarm_run, static_cast<std::uint64_t>(f));
          sw.mode = (id == MethodId::psois_dt || id == MethodId::psois_adab ||
                     id == MethodId::psois_adac || id == MethodId::psois_bagging)
                        ? SwarmMode::pso_continuous
                        : sw.mode;
          LearnerSpec learner = wrapped_learner(id, cfg);
          SwarmRunResult run = run_swarm(train_ds, learner, sw);
          out.archives.push_back(run.archive);
          double selected = static_cast<double>(run.final.mask.count());
          double original = static_cast<double>(run.final.mask.bits.size());
          swarm_integrity = original > 0.0 ? selected / original : 0.0;
          return train_model(run.rebalanced, learner,
                             derive_seed(cfg.seed, seeds::final_train, static_cast<std::uint64_t>(f)));
        }
      }
    }();
    double elapsed = seconds_since(start);

    auto preds = model.predict(test_ds);
    ConfusionMatrix cm = confusion(preds, test_ds.labels);
    MetricReport report = full_report(cm, 1, 1, elapsed);
    if (is_swarm_method(id)) {
      report.integrity = swarm_integrity;
    } else if (id == MethodId::rusboost) {
      report.integrity = cfg.rus_rate;
    } else {
      report.integrity = 1.0;
    }
    out.folds[f] = report;
    out.fold_valid[f] = true;
    out.elapsed_seconds += elapsed;
    valid_reports.push_back(report);
  }
  out.mean = mean_report(valid_reports);
  out.mean.elapsed_seconds = out.elapsed_seconds;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

const char* kMetricColumns =
    "kappa,accuracy,ber,mcc,gmean,precision,recall,f1,tpr_x_tnr,integrity,time_seconds";

void append_metric_cells(std::string& line, const MetricReport& r) {
  const double cells[] = {r.kappa, r.accuracy,  r.ber, r.mcc,       r.gmean,     r.precision,
                          r.recall, r.f1, r.tpr_x_tnr, r.integrity, r.elapsed_seconds};
  for (double c : cells) {
    line += ',';
    line += format_double(c);
  }
}

}  // namespace

std::string metrics_csv_header() { return std::string("dataset,method,") + kMetricColumns + ",error"; }
std::string summary_csv_header() { return std::string("method,") + kMetricColumns; }

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << metrics_csv_header() << "\n";
  for (const auto& row : rows) {
    std::string line = row.dataset + "," + std::string(method_name(row.method));
    if (row.failed) {
      for (int i = 0; i < 11; ++i) line += ',';
      line += ',';
      std::string msg = row.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      line += msg;
    } else {
      append_metric_cells(line, row.mean);
      line += ',';
    }
    out << line << "\n";
  }
}

void write_summary_csvs(std::ostream& mean_out, std::ostream& std_out,
                        const std::vector<ResultRow>& rows) {
  std::vector<MethodId> order;
  std::map<MethodId, std::vector<MetricReport>> grouped;
  for (const auto& row : rows) {
    if (row.failed) continue;
    if (!grouped.count(row.method)) order.push_back(row.method);
    grouped[row.method].push_back(row.mean);
  }
  mean_out << summary_csv_header() << "\n";
  std_out << summary_csv_header() << "\n";
  for (MethodId id : order) {
    const auto& reports = grouped[id];
    std::string mean_line{method_name(id)};
    append_metric_cells(mean_line, mean_report(reports));
    mean_out << mean_line << "\n";
    std::string std_line{method_name(id)};
    append_metric_cells(std_line, stddev_report(reports));
    std_out << std_line << "\n";
  }
}

void write_archive_csv(std::ostream& out, const std::vector<ParetoArchive>& archives) {
  out << "fitness,integrity,kappa,accuracy,popcount\n";
  for (const auto& archive : archives) {
    for (const auto& e : archive.entries()) {
      out << format_double(e.objectives.fitness) << ',' << format_double(e.objectives.integrity)
          << ',' << format_double(e.report.kappa) << ',' << format_double(e.report.accuracy)
          << ',' << e.mask.count() << "\n";
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rate,mean_tpr,mean_tnr,mean_product,integrity,post_ratio\n";
  for (const auto& r : rows) {
    out << format_double(r.rate) << ',' << format_double(r.mean_tpr) << ','
        << format_double(r.mean_tnr) << ',' << format_double(r.mean_product) << ','
        << format_double(r.integrity) << ',' << format_double(r.post_ratio) << "\n";
  }
}

std::vector<MethodId> experiment_methods(int which) {
  if (which == 1) {
    return {MethodId::dt,       MethodId::resample, MethodId::bagging, MethodId::cost,
            MethodId::adaboost, MethodId::adacost,  MethodId::bpsois_dt};
  }
  if (which == 2) {
    return {MethodId::dt,           MethodId::easyensemble,  MethodId::balancecascade,
            MethodId::rusboost,     MethodId::psois_dt,      MethodId::psois_adab,
            MethodId::psois_adac,   MethodId::psois_bagging, MethodId::bpsois_dt,
            MethodId::bpsois_adab,  MethodId::bpsois_adac,   MethodId::bpsois_bagging};
  }
  throw Error("experiment id must be 1 or 2");
}

void apply_desk_scale(HarnessConfig& cfg) {
  cfg.swarm.population = 20;
  cfg.swarm.max_iterations = 30;
  cfg.boost = {25, 50};
  cfg.bagging_members = 25;
  cfg.easy_subsets = 10;
  cfg.easy_rounds = 10;
  cfg.cascade_rounds = 10;
  cfg.cascade_inner_rounds = 10;
  cfg.rus = {30, 30};
}

const std::vector<std::string>& desk_dataset_names() {
  static const std::vector<std::string> names = {"haberman", "pima", "poker-9_vs_7"};
  return names;
}

std::vector<ResultRow> run_experiment(const std::vector<NamedDataset>& datasets,
                                      const ExperimentConfig& cfg, std::ostream* progress) {
  namespace fs = std::filesystem;
  std::vector<MethodId> methods = experiment_methods(cfg.which);
  HarnessConfig harness = cfg.harness;
  std::vector<const NamedDataset*> selected;
  if (cfg.desk_scale) {
    apply_desk_scale(harness);
    for (const auto& ds : datasets) {
      const auto& names = desk_dataset_names();
      if (std::find(names.begin(), names.end(), ds.name) != names.end()) selected.push_back(&ds);
    }
  }
  if (selected.empty())
    for (const auto& ds : datasets) selected.push_back(&ds);

  fs::create_directories(cfg.out_dir);
  std::vector<ResultRow> rows;
  for (const NamedDataset* ds : selected) {
    for (MethodId id : methods) {
      ResultRow row;
      row.dataset = ds->name;
      row.method = id;
      if (progress)
        *progress << ds->name << " / " << method_name(id) << " ..." << std::flush;
      try {
        MethodOutcome outcome = evaluate_method(ds->data, id, harness);
        row.mean = outcome.mean;
        if (is_swarm_method(id) && !outcome.archives.empty()) {
          std::ofstream arch(fs::path(cfg.out_dir) /
                             ("archive_" + ds->name + "_" + std::string(method_name(id)) + ".csv"));
          write_archive_csv(arch, outcome.archives);
        }
        if (progress)
          *progress << " kappa=" << format_double(outcome.mean.kappa) << " ("
                    << format_double(outcome.elapsed_seconds) << "s)\n";
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        if (progress) *progress << " failed: " << e.what() << "\n";
      }
      rows.push_back(std::move(row));
    }
  }

  std::ofstream results(fs::path(cfg.out_dir) / ("results_" + std::to_string(cfg.which) + ".csv"));
  write_results_csv(results, rows);
  std::ofstream mean_out(fs::path(cfg.out_dir) / "summary_mean.csv");
  std::ofstream std_out(fs::path(cfg.out_dir) / "summary_std.csv");
  write_summary_csvs(mean_out, std_out, rows);
  return rows;
}

}  // namespace rebalance
