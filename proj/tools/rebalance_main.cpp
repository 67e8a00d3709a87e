#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rebalance/baselines.hpp"
#include "rebalance/bpso.hpp"
#include "rebalance/dataset.hpp"
#include "rebalance/errors.hpp"
#include "rebalance/harness.hpp"
#include "rebalance/rng.hpp"
#include "rebalance/synth.hpp"

namespace fs = std::filesystem;
using namespace rebalance;

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

BinaryDataset load_data(const std::string& path, bool as_csv, int class_col) {
  if (as_csv) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_csv(in, class_col);
  }
  return parse_keel_file(path);
}

void print_report(const MetricReport& r) {
  auto row = [](const char* name, double v) { std::printf("  %-11s %.2f\n", name, v); };
  row("kappa", r.kappa);
  row("accuracy", r.accuracy);
  row("ber", r.ber);
  row("mcc", r.mcc);
  row("gmean", r.gmean);
  row("precision", r.precision);
  row("recall", r.recall);
  row("f1", r.f1);
  row("tpr_x_tnr", r.tpr_x_tnr);
  row("integrity", r.integrity);
  std::printf("  %-11s %.2fs\n", "time", r.elapsed_seconds);
}

struct SwarmKnobs {
  int population = 0;
  int iterations = 0;
  int inner_folds = 0;
  int threads = 0;
  std::string mode;
};

void add_swarm_options(CLI::App* cmd, SwarmKnobs& k) {
  cmd->add_option("--population", k.population, "Swarm size");
  cmd->add_option("--iterations", k.iterations, "Swarm iterations");
  cmd->add_option("--inner-folds", k.inner_folds, "Wrapper CV folds inside the search");
  cmd->add_option("--swarm-mode", k.mode, "Bit rule for binary swarms")
      ->check(CLI::IsMember({"round", "sigmoid"}));
  cmd->add_option("--threads", k.threads, "Parallel mask evaluations");
}

void apply_swarm_knobs(const SwarmKnobs& k, SwarmConfig& sw) {
  if (k.population > 0) sw.population = k.population;
  if (k.iterations > 0) sw.max_iterations = k.iterations;
  if (k.inner_folds > 0) sw.inner_folds = k.inner_folds;
  if (k.threads > 0) sw.threads = k.threads;
  if (k.mode == "sigmoid") sw.mode = SwarmMode::bpso_sigmoid;
  if (k.mode == "round") sw.mode = SwarmMode::bpso_round;
}

MethodId require_method(const std::string& name) {
  auto id = parse_method(name);
  if (!id) throw Error("unknown method: " + name);
  return *id;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Swarm-searched majority undersampling for two-class training data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rebalance 1.0.0");
  app.set_config("--config", "", "Read options from an INI/TOML file");

  std::uint64_t seed = 42;
  auto* seed_opt = app.add_option(
      "--seed", seed, "Root seed (flag beats config beats REBALANCE_SEED beats 42)");

  std::string data, out, out_dir = ".", method_name_arg, archive_out;
  bool as_csv = false, desk = false;
  int class_col = -1, folds = 10, which = 1, trials = 10;
  SwarmKnobs knobs;
  int bagging_members = 0, boost_members = 0, boost_rounds_cap = 0;

  auto add_data_options = [&](CLI::App* cmd) {
    cmd->add_option("--data", data, "Dataset file")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--csv", as_csv, "Parse as headerless CSV (class column last)");
    cmd->add_option("--class-col", class_col, "CSV class column index");
  };

  CLI::App* inspect = app.add_subcommand("inspect", "Show dataset shape and class balance");
  inspect->fallthrough();
  add_data_options(inspect);

  CLI::App* eval = app.add_subcommand("eval", "Cross-validate one method on one dataset");
  eval->fallthrough();
  add_data_options(eval);
  eval->add_option("--method", method_name_arg, "Method id (see README)")->required();
  eval->add_option("--folds", folds, "Outer CV folds")->check(CLI::Range(2, 1000000));
  eval->add_flag("--desk", desk, "Small-scale preset for quick runs");
  eval->add_option("--out", out, "Write a one-row results CSV");
  eval->add_option("--archive-out", archive_out, "Write tradeoff-front CSV (swarm methods)");
  eval->add_option("--bagging-members", bagging_members, "Bagging ensemble size");
  eval->add_option("--boost-members", boost_members, "Boosting member cap");
  eval->add_option("--boost-rounds", boost_rounds_cap, "Boosting round cap");
  add_swarm_options(eval, knobs);

  CLI::App* sweep = app.add_subcommand("sweep", "Random-undersampling rate sweep");
  sweep->fallthrough();
  add_data_options(sweep);
  sweep->add_option("--trials", trials, "Seeded trials per rate")->check(CLI::Range(1, 10000));
  sweep->add_option("--folds", folds, "CV folds per trial")->check(CLI::Range(2, 1000000));
  sweep->add_option("--out", out, "Write the sweep CSV");

  CLI::App* experiment = app.add_subcommand("experiment", "Run a method grid over a directory");
  experiment->fallthrough();
  experiment->add_option("--which", which, "Method grid: 1 or 2")
      ->required()
      ->check(CLI::Range(1, 2));
  std::string data_dir;
  experiment->add_option("--data-dir", data_dir, "Directory of .dat files")
      ->required()
      ->check(CLI::ExistingDirectory);
  experiment->add_option("--out-dir", out_dir, "Output directory");
  experiment->add_option("--folds", folds, "Outer CV folds")->check(CLI::Range(2, 1000000));
  experiment->add_flag("--desk", desk, "Small-scale preset on the three desk datasets");
  add_swarm_options(experiment, knobs);

  CLI::App* rebal = app.add_subcommand("rebalance", "Search the full dataset, write the subset");
  rebal->fallthrough();
  add_data_options(rebal);
  rebal->add_option("--method", method_name_arg, "A swarm method id")->required();
  rebal->add_option("--out", out, "Output file for the rebalanced data")->required();
  rebal->add_option("--archive-out", archive_out, "Write tradeoff-front CSV");
  add_swarm_options(rebal, knobs);

  CLI::App* gen = app.add_subcommand("gen-data", "Write the bundled synthetic benchmark files");
  gen->fallthrough();
  gen->add_option("--out-dir", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv("REBALANCE_SEED")) {
      auto parsed = parse_u64(env);
      if (!parsed) throw Error("REBALANCE_SEED is not an unsigned integer: " + std::string(env));
      seed = *parsed;
    }
  }

  if (*inspect) {
    BinaryDataset ds = load_data(data, as_csv, class_col);
    int numeric = 0, nominal = 0;
    for (const auto& a : ds.attributes) (a.kind == AttrKind::numeric ? numeric : nominal)++;
    std::printf("relation: %s\n", ds.relation.c_str());
    std::printf("rows: %zu  features: %zu (%d numeric, %d nominal)\n", ds.n_rows(),
                ds.n_features(), numeric, nominal);
    std::printf("majority: %s (%zu)\n", ds.majority_name.c_str(), ds.count(ClassTag::majority));
    std::printf("minority: %s (%zu)\n", ds.minority_name.c_str(), ds.count(ClassTag::minority));
    std::printf("imbalance ratio: %.2f\n", imbalance_ratio(ds));
    return 0;
  }

  if (*eval) {
    MethodId id = require_method(method_name_arg);
    BinaryDataset ds = load_data(data, as_csv, class_col);
    HarnessConfig cfg;
    cfg.folds = folds;
    cfg.seed = seed;
    if (desk) apply_desk_scale(cfg);
    if (bagging_members > 0) cfg.bagging_members = bagging_members;
    if (boost_members > 0) cfg.boost.n_members = boost_members;
    if (boost_rounds_cap > 0) cfg.boost.n_iterations = boost_rounds_cap;
    apply_swarm_knobs(knobs, cfg.swarm);

    std::string name = fs::path(data).stem().string();
    std::printf("%s / %s (%d-fold, seed %llu)\n", name.c_str(), method_name(id).data(),
                cfg.folds, static_cast<unsigned long long>(seed));
    MethodOutcome outcome = evaluate_method(ds, id, cfg);
    print_report(outcome.mean);

    if (!out.empty()) {
      std::ofstream os(out);
      if (!os) throw Error("cannot write " + out);
      write_results_csv(os, {ResultRow{name, id, false, "", outcome.mean}});
      std::printf("wrote %s\n", out.c_str());
    }
    if (!archive_out.empty() && !outcome.archives.empty()) {
      std::ofstream os(archive_out);
      if (!os) throw Error("cannot write " + archive_out);
      write_archive_csv(os, outcome.archives);
      std::printf("wrote %s\n", archive_out.c_str());
    }
    return 0;
  }

  if (*sweep) {
    BinaryDataset ds = load_data(data, as_csv, class_col);
    SweepSpec spec;
    spec.trials = trials;
    spec.folds = folds;
    spec.seed = seed;
    std::vector<SweepRow> rows = undersample_sweep(ds, spec);
    std::printf("%-7s %6s %6s %9s %9s %10s\n", "rate", "tpr", "tnr", "tpr*tnr", "integrity",
                "post-ratio");
    for (const auto& r : rows)
      std::printf("%-7s %6.2f %6.2f %9.2f %9.2f %10.2f\n", format_double(r.rate).c_str(),
                  r.mean_tpr, r.mean_tnr, r.mean_product, r.integrity, r.post_ratio);
    if (!out.empty()) {
      std::ofstream os(out);
      if (!os) throw Error("cannot write " + out);
      write_sweep_csv(os, rows);
      std::printf("wrote %s\n", out.c_str());
    }
    return 0;
  }

  if (*experiment) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(data_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".dat")
        paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error("no .dat files in " + data_dir);

    std::vector<NamedDataset> datasets;
    for (const auto& p : paths)
      datasets.push_back({p.stem().string(), parse_keel_file(p.string())});

    ExperimentConfig cfg;
    cfg.which = which;
    cfg.desk_scale = desk;
    cfg.out_dir = out_dir;
    cfg.harness.folds = folds;
    cfg.harness.seed = seed;
    apply_swarm_knobs(knobs, cfg.harness.swarm);

    std::vector<ResultRow> rows = run_experiment(datasets, cfg, &std::cout);
    int failed = 0;
    for (const auto& r : rows) failed += r.failed ? 1 : 0;
    std::printf("wrote results_%d.csv, summary_mean.csv, summary_std.csv to %s (%d/%zu cells failed)\n",
                which, out_dir.c_str(), failed, rows.size());
    return failed == static_cast<int>(rows.size()) ? 1 : 0;
  }

  if (*rebal) {
    MethodId id = require_method(method_name_arg);
    if (!is_swarm_method(id))
      throw Error("rebalance needs a swarm method, got: " + method_name_arg);
    BinaryDataset ds = load_data(data, as_csv, class_col);

    HarnessConfig cfg;
    cfg.seed = seed;
    apply_swarm_knobs(knobs, cfg.swarm);
    SwarmConfig sw = cfg.swarm;
    sw.seed = derive_seed(seed, seeds::swarm_run);
    if (id == MethodId::psois_dt || id == MethodId::psois_adab || id == MethodId::psois_adac ||
        id == MethodId::psois_bagging)
      sw.mode = SwarmMode::pso_continuous;

    SwarmRunResult run = run_swarm(ds, wrapped_learner(id, cfg), sw);
    std::size_t selected = run.final.mask.count();
    std::size_t original = run.final.mask.bits.size();
    std::printf("kept %zu of %zu majority rows (integrity %.2f), all %zu minority rows\n",
                selected, original,
                original ? static_cast<double>(selected) / static_cast<double>(original) : 0.0,
                ds.count(ClassTag::minority));
    std::printf("search fitness %.2f, kappa %.2f, accuracy %.2f\n",
                run.final.objectives.fitness, run.final.report.kappa, run.final.report.accuracy);

    std::ofstream os(out);
    if (!os) throw Error("cannot write " + out);
    serialize_keel(run.rebalanced, os);
    std::printf("wrote %s (%zu rows)\n", out.c_str(), run.rebalanced.n_rows());

    if (!archive_out.empty()) {
      std::ofstream arch(archive_out);
      if (!arch) throw Error("cannot write " + archive_out);
      write_archive_csv(arch, {run.archive});
      std::printf("wrote %s\n", archive_out.c_str());
    }
    return 0;
  }

  if (*gen) {
    fs::create_directories(out_dir);
    for (const auto& shape : synth_catalog()) {
      BinaryDataset ds = make_synthetic(shape.name);
      std::ofstream os(fs::path(out_dir) / (shape.name + ".dat"));
      if (!os) throw Error("cannot write into " + out_dir);
      serialize_keel(ds, os);
      std::printf("%-28s %5zu rows, ratio %.2f\n", (shape.name + ".dat").c_str(), ds.n_rows(),
                  imbalance_ratio(ds));
    }
    BinaryDataset sweep_ds = make_sweep_dataset();
    std::ofstream os(fs::path(out_dir) / "undersample-sweep.dat");
    if (!os) throw Error("cannot write into " + out_dir);
    serialize_keel(sweep_ds, os);
    std::printf("%-28s %5zu rows, ratio %.2f\n", "undersample-sweep.dat", sweep_ds.n_rows(),
                imbalance_ratio(sweep_ds));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
