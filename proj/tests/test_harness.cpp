#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rebalance/evaluation.hpp"
#include "rebalance/harness.hpp"
#include "rebalance/synth.hpp"

using namespace rebalance;

TEST_CASE("method ids and names round-trip for all seventeen methods") {
  const auto& methods = all_methods();
  REQUIRE(methods.size() == 17);
  for (MethodId id : methods) {
    auto parsed = parse_method(method_name(id));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == id);
  }
  CHECK(!parse_method("not-a-method").has_value());
  CHECK(parse_method("dt") == MethodId::dt);
  CHECK(parse_method("bpsois_bagging") == MethodId::bpsois_bagging);
}

TEST_CASE("swarm detection separates wrapper methods from baselines") {
  CHECK(is_swarm_method(MethodId::psois_dt));
  CHECK(is_swarm_method(MethodId::psois_adab));
  CHECK(is_swarm_method(MethodId::psois_adac));
  CHECK(is_swarm_method(MethodId::psois_bagging));
  CHECK(is_swarm_method(MethodId::bpsois_dt));
  CHECK(is_swarm_method(MethodId::bpsois_adab));
  CHECK(is_swarm_method(MethodId::bpsois_adac));
  CHECK(is_swarm_method(MethodId::bpsois_bagging));
  CHECK(!is_swarm_method(MethodId::dt));
  CHECK(!is_swarm_method(MethodId::resample));
  CHECK(!is_swarm_method(MethodId::bagging));
  CHECK(!is_swarm_method(MethodId::adaboost));
  CHECK(!is_swarm_method(MethodId::rusboost));
}

TEST_CASE("wrapped_learner picks the learner the swarm trains inside") {
  HarnessConfig cfg;
  cfg.bagging_members = 7;
  CHECK(wrapped_learner(MethodId::bpsois_dt, cfg).kind == LearnerKind::tree);
  CHECK(wrapped_learner(MethodId::psois_dt, cfg).kind == LearnerKind::tree);
  CHECK(wrapped_learner(MethodId::bpsois_adab, cfg).kind == LearnerKind::adaboost);
  CHECK(wrapped_learner(MethodId::bpsois_adac, cfg).kind == LearnerKind::adacost);
  LearnerSpec bagged = wrapped_learner(MethodId::bpsois_bagging, cfg);
  CHECK(bagged.kind == LearnerKind::bagging);
  CHECK(bagged.ensemble.n_members == 7);
}

TEST_CASE("experiment rosters cover every method across the two studies") {
  auto first = experiment_methods(1);
  auto second = experiment_methods(2);
  CHECK(first.size() == 7);
  CHECK(second.size() == 12);

  // Study one compares the swarm wrapper against its plain competitors;
  // study two lines the full wrapper family up against resampling ensembles.
  CHECK(std::count(first.begin(), first.end(), MethodId::dt) == 1);
  CHECK(std::count(first.begin(), first.end(), MethodId::bpsois_dt) == 1);
  CHECK(std::count(second.begin(), second.end(), MethodId::easyensemble) == 1);
  CHECK(std::count(second.begin(), second.end(), MethodId::bpsois_bagging) == 1);

  // Together they reach all seventeen methods.
  std::vector<MethodId> joined = first;
  joined.insert(joined.end(), second.begin(), second.end());
  for (MethodId id : all_methods())
    CHECK(std::count(joined.begin(), joined.end(), id) >= 1);

  CHECK_THROWS_AS(experiment_methods(3), Error);
}

TEST_CASE("the desk preset shrinks the expensive knobs") {
  HarnessConfig cfg;
  apply_desk_scale(cfg);
  CHECK(cfg.swarm.population == 20);
  CHECK(cfg.swarm.max_iterations == 30);
  CHECK(cfg.bagging_members < 50);
  CHECK(cfg.boost.n_members < 50);
  CHECK(cfg.folds == 10);  // outer protocol is untouched

  const auto& desk = desk_dataset_names();
  REQUIRE(desk.size() == 3);
  CHECK(std::count(desk.begin(), desk.end(), "haberman") == 1);
  CHECK(std::count(desk.begin(), desk.end(), "pima") == 1);
  CHECK(std::count(desk.begin(), desk.end(), "poker-9_vs_7") == 1);
}

TEST_CASE("evaluate_method on a plain tree mirrors cv_evaluate") {
  BinaryDataset ds = make_blobs(70, 25, 3, 67, 0.3);
  HarnessConfig cfg;
  cfg.folds = 5;
  cfg.seed = 777;

  MethodOutcome outcome = evaluate_method(ds, MethodId::dt, cfg);
  LearnerSpec spec;  // dt wraps the plain tree with the harness tree params
  CvOutcome expect = cv_evaluate(ds, spec, cfg.folds, cfg.seed);

  REQUIRE(outcome.folds.size() == expect.per_fold.size());
  for (std::size_t f = 0; f < outcome.folds.size(); ++f) {
    CHECK(outcome.folds[f].kappa == expect.per_fold[f].kappa);
    CHECK(outcome.folds[f].accuracy == expect.per_fold[f].accuracy);
  }
  CHECK(outcome.mean.kappa == expect.mean.kappa);
  CHECK(outcome.archives.empty());
  CHECK(outcome.elapsed_seconds >= 0.0);
}

TEST_CASE("a desk-scale swarm method yields per-fold archives") {
  BinaryDataset ds = make_blobs(40, 12, 2, 71, 0.35);
  HarnessConfig cfg;
  cfg.folds = 3;
  cfg.swarm.population = 3;
  cfg.swarm.max_iterations = 2;
  cfg.swarm.inner_folds = 2;

  MethodOutcome outcome = evaluate_method(ds, MethodId::bpsois_dt, cfg);
  CHECK(outcome.folds.size() == 3);
  REQUIRE(outcome.archives.size() == 3);
  for (const auto& archive : outcome.archives) CHECK(!archive.entries().empty());

  // Integrity reflects the chosen subsets: somewhere in (0, 1].
  CHECK(outcome.mean.integrity > 0.0);
  CHECK(outcome.mean.integrity <= 1.0);

  MethodOutcome again = evaluate_method(ds, MethodId::bpsois_dt, cfg);
  for (std::size_t f = 0; f < outcome.folds.size(); ++f) {
    CHECK(outcome.folds[f].kappa == again.folds[f].kappa);
    CHECK(outcome.folds[f].integrity == again.folds[f].integrity);
  }
}

TEST_CASE("format_double prints shortest round-trip decimals") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.5) == "-0.5");
  CHECK(format_double(0.1) == "0.1");
  double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);  // round-trips exactly
}

TEST_CASE("csv writers emit one line per row under the declared header") {
  std::vector<ResultRow> rows(2);
  rows[0].dataset = "alpha";
  rows[0].method = MethodId::dt;
  rows[0].mean.kappa = 0.5;
  rows[1].dataset = "beta";
  rows[1].method = MethodId::bagging;
  rows[1].failed = true;
  rows[1].error = "boom";

  std::ostringstream out;
  write_results_csv(out, rows);
  std::istringstream lines(out.str());
  std::string line;
  std::vector<std::string> captured;
  while (std::getline(lines, line)) captured.push_back(line);
  REQUIRE(captured.size() == 3);
  CHECK(captured[0] == metrics_csv_header());
  CHECK(captured[1].find("alpha") != std::string::npos);
  CHECK(captured[1].find("dt") != std::string::npos);
  CHECK(captured[2].find("beta") != std::string::npos);
  CHECK(captured[2].find("boom") != std::string::npos);
}

TEST_CASE("summary csvs aggregate rows per method") {
  std::vector<ResultRow> rows(4);
  rows[0] = {"a", MethodId::dt, false, "", {}};
  rows[1] = {"b", MethodId::dt, false, "", {}};
  rows[2] = {"a", MethodId::bagging, false, "", {}};
  rows[3] = {"b", MethodId::bagging, false, "", {}};
  rows[0].mean.kappa = 0.2;
  rows[1].mean.kappa = 0.6;
  rows[2].mean.kappa = 0.4;
  rows[3].mean.kappa = 0.4;

  std::ostringstream mean_out, std_out;
  write_summary_csvs(mean_out, std_out, rows);

  std::istringstream mean_lines(mean_out.str());
  std::string line;
  std::vector<std::string> captured;
  while (std::getline(mean_lines, line)) captured.push_back(line);
  REQUIRE(captured.size() >= 3);
  CHECK(captured[0] == summary_csv_header());

  // dt mean kappa = 0.4 with sample deviation sqrt(0.08); both files carry
  // one line per method.
  bool found_dt = false;
  for (const auto& l : captured)
    if (l.find("dt") == 0) {
      found_dt = true;
      CHECK(l.find("0.4") != std::string::npos);
    }
  CHECK(found_dt);
}

TEST_CASE("run_experiment writes its artifacts and reports every cell") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "harness_run_test";
  fs::remove_all(dir);

  std::vector<NamedDataset> datasets;
  datasets.push_back({"blobs-small", make_blobs(30, 12, 2, 73, 0.4)});

  ExperimentConfig cfg;
  cfg.which = 1;
  cfg.out_dir = dir.string();
  cfg.harness.folds = 3;
  cfg.harness.boost = {3, 10};
  cfg.harness.bagging_members = 3;
  cfg.harness.easy_subsets = 2;
  cfg.harness.easy_rounds = 2;
  cfg.harness.cascade_rounds = 2;
  cfg.harness.cascade_inner_rounds = 2;
  cfg.harness.rus = {3, 10};
  cfg.harness.swarm.population = 3;
  cfg.harness.swarm.max_iterations = 2;
  cfg.harness.swarm.inner_folds = 2;

  std::ostringstream progress;
  auto rows = run_experiment(datasets, cfg, &progress);
  CHECK(rows.size() == experiment_methods(1).size());
  for (const auto& row : rows) {
    CHECK(row.dataset == "blobs-small");
    CHECK(!row.failed);
  }
  CHECK(fs::exists(dir / "results_1.csv"));
  CHECK(fs::exists(dir / "summary_mean.csv"));
  CHECK(fs::exists(dir / "summary_std.csv"));
  fs::remove_all(dir);
}
