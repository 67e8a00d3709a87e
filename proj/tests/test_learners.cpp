#include "doctest.h"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "rebalance/errors.hpp"
#include "rebalance/learners.hpp"
#include "rebalance/rng.hpp"
#include "rebalance/synth.hpp"

using namespace rebalance;
using rebalance::testing::numeric_dataset;

namespace {

// 1-D fixture where the best depth-1 stump errs on exactly one row per round,
// giving closed-form boosting weights.
BinaryDataset stump_fixture() {
  using enum ClassTag;
  return numeric_dataset({{0.0}, {1.0}, {2.0}, {3.0}},
                         {majority, majority, minority, majority});
}

TreeParams stump_params() {
  TreeParams p;
  p.max_depth = 1;
  return p;
}

}  // namespace

TEST_CASE("adaboost reproduces the closed-form two-round weight trajectory") {
  // Round 1: the stump splits at 1.5 and its tied right leaf goes minority,
  // so row 3 (majority) is the single miss: eps = 1/4, alpha = ln(3)/2,
  // and the renormalized weights are {1/6, 1/6, 1/6, 1/2}.
  // Round 2: the reweighted stump splits at 2.5 and predicts majority
  // everywhere, missing row 2: eps = 1/6 and weights {1/10, 1/10, 1/2, 3/10}.
  BinaryDataset ds = stump_fixture();
  BoostDiagnostics diag;
  TrainedModel model = train_adaboost(ds, EnsembleConfig{2, 100}, stump_params(), 7, &diag);

  CHECK(model.member_count() == 2);
  REQUIRE(diag.epsilons.size() == 2);
  CHECK(diag.epsilons[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(diag.epsilons[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  REQUIRE(diag.weights.size() == 2);
  const std::vector<double> round1{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 2};
  const std::vector<double> round2{1.0 / 10, 1.0 / 10, 1.0 / 2, 3.0 / 10};
  for (int i = 0; i < 4; ++i) {
    CHECK(diag.weights[0][i] == doctest::Approx(round1[i]).epsilon(1e-12));
    CHECK(diag.weights[1][i] == doctest::Approx(round2[i]).epsilon(1e-12));
  }
  for (double s : diag.weight_sums) CHECK(std::abs(s - 1.0) <= 1e-12);

  // The second stump's vote (alpha = ln(5)/2) outweighs the first's, so the
  // margin vote predicts majority on every row.
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    CHECK(model.predict_row(ds.row(i)) == ClassTag::majority);
}

TEST_CASE("adacost reweights by the cost-adjusted exponents") {
  // Same round-1 stump as plain adaboost (uniform start), but the update
  // exponents scale by beta+ / beta-: the cheap wrong row grows by
  // exp(alpha * 0.55), cheap right rows shrink by exp(-alpha * 0.45), and the
  // expensive minority row (cost ratio 1.0, beta- = 0) keeps its raw weight.
  BinaryDataset ds = stump_fixture();
  BoostDiagnostics diag;
  CostMatrix costs;  // defaults: misclassified minority 50, majority 5
  train_adacost(ds, costs, EnsembleConfig{1, 100}, stump_params(), 7, &diag);

  REQUIRE(diag.epsilons.size() == 1);
  CHECK(diag.epsilons[0] == doctest::Approx(0.25).epsilon(1e-12));

  double alpha = 0.5 * std::log(3.0);
  double grown = std::exp(alpha * 0.55);    // wrong majority row, cost 5/50
  double shrunk = std::exp(-alpha * 0.45);  // right majority rows
  double z = 2.0 * shrunk + 1.0 + grown;    // right minority row keeps factor 1
  const std::array<double, 4> expect{shrunk / z, shrunk / z, 1.0 / z, grown / z};
  REQUIRE(diag.weights.size() == 1);
  for (int i = 0; i < 4; ++i)
    CHECK(diag.weights[0][i] == doctest::Approx(expect[i]).epsilon(1e-12));

  // The correctly classified minority row decays slower than uniform: its
  // share rises above 1/4 while correct majority rows fall below.
  CHECK(diag.weights[0][2] > 0.25);
  CHECK(diag.weights[0][0] < 0.25);
  CHECK(adacost_beta_plus(1.0) == 1.0);
  CHECK(adacost_beta_minus(1.0) == 0.0);
  CHECK(adacost_beta_plus(0.0) == 0.5);
  CHECK(adacost_beta_minus(0.0) == 0.5);
}

TEST_CASE("boosting stops immediately on a clean fit") {
  using enum ClassTag;
  auto ds = numeric_dataset({{0.0}, {1.0}, {2.0}, {3.0}},
                            {majority, majority, minority, minority});
  BoostDiagnostics diag;
  TrainedModel model = train_adaboost(ds, EnsembleConfig{5, 100}, TreeParams{}, 3, &diag);
  CHECK(model.member_count() == 1);
  REQUIRE(diag.epsilons.size() == 1);
  CHECK(diag.epsilons[0] == 0.0);
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    CHECK(model.predict_row(ds.row(i)) == ds.labels[i]);
}

TEST_CASE("an unlearnable round is discarded, never looped forever") {
  // Two identical rows with opposite labels: every tree is a tied leaf that
  // errs on half the weight, so rounds are discarded and the fallback keeps
  // the model non-empty.
  using enum ClassTag;
  auto ds = numeric_dataset({{0.0}, {0.0}}, {majority, minority});
  BoostDiagnostics diag;
  TrainedModel model = train_adaboost(ds, EnsembleConfig{1, 10}, TreeParams{}, 11, &diag);
  CHECK(model.member_count() == 1);
  CHECK(diag.discarded_rounds >= 1);
  std::array<double, 1> probe{0.0};
  CHECK(model.predict_row(probe) == ClassTag::minority);  // tied leaf rule
}

TEST_CASE("boost weight sums stay normalized over many rounds") {
  BinaryDataset ds = make_blobs(60, 30, 3, 17, 0.25);
  BoostDiagnostics diag;
  TrainedModel model = train_adaboost(ds, EnsembleConfig{10, 50}, stump_params(), 5, &diag);
  CHECK(model.member_count() >= 3);  // overlapping blobs keep stumps imperfect
  REQUIRE(!diag.weight_sums.empty());
  for (double s : diag.weight_sums) CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("cost_rule picks the cheaper expected loss, boundary to minority") {
  CostMatrix costs;  // fp 50 (minority mistaken), fn 5 (majority mistaken)
  CHECK(cost_rule(0.9, 0.1, costs) == ClassTag::minority);   // 5 >= 4.5
  CHECK(cost_rule(0.99, 0.01, costs) == ClassTag::majority);  // 0.5 < 4.95
  CostMatrix unit{1.0, 1.0};
  CHECK(cost_rule(0.5, 0.5, unit) == ClassTag::minority);     // exact tie
  CHECK(cost_rule(0.75, 0.25, unit) == ClassTag::majority);
  CostMatrix two{2.0, 1.0};
  CHECK(cost_rule(0.5, 0.25, two) == ClassTag::minority);     // 0.5 >= 0.5 tie
}

TEST_CASE("symmetric costs reduce the cost-sensitive tree to the plain tree") {
  BinaryDataset ds = make_blobs(120, 40, 4, 23, 0.35);
  TrainedModel plain = train_tree(ds, TreeParams{});
  TrainedModel costed = train_cost_sensitive(ds, CostMatrix{3.0, 3.0}, TreeParams{});
  CHECK(costed.kind() == TrainedModel::Kind::cost_rule);

  Rng rng(24);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 4> probe{rng.uniform01(), rng.uniform01(), rng.uniform01(),
                                rng.uniform01()};
    CHECK(costed.predict_row(probe) == plain.predict_row(probe));
  }
}

TEST_CASE("asymmetric costs flip impure-leaf decisions toward the minority") {
  using enum ClassTag;
  // One shared leaf holding 3 majority + 1 minority: plain tree says majority,
  // expected cost says minority (0.25 * 50 > 0.75 * 5).
  auto ds = numeric_dataset({{0.0}, {0.0}, {0.0}, {0.0}},
                            {majority, majority, majority, minority});
  std::array<double, 1> probe{0.0};
  CHECK(train_tree(ds, TreeParams{}).predict_row(probe) == ClassTag::majority);
  CHECK(train_cost_sensitive(ds, CostMatrix{}, TreeParams{}).predict_row(probe) ==
        ClassTag::minority);
}

TEST_CASE("bagging trains the requested members deterministically") {
  BinaryDataset ds = make_blobs(80, 30, 3, 31);
  TrainedModel a = train_bagging(ds, 9, TreeParams{}, 1001);
  TrainedModel b = train_bagging(ds, 9, TreeParams{}, 1001);
  CHECK(a.kind() == TrainedModel::Kind::vote);
  CHECK(a.member_count() == 9);

  std::ostringstream sa, sb;
  a.save(sa);
  b.save(sb);
  CHECK(sa.str() == sb.str());

  // Well-separated blobs: the vote reproduces the training labels.
  auto preds = a.predict(ds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) hits += preds[i] == ds.labels[i];
  CHECK(hits == ds.n_rows());

  std::array<double, 3> probe{0.5, 0.5, 0.5};
  auto scores = a.score_row(probe);
  CHECK(scores[0] + scores[1] == doctest::Approx(1.0));
}

TEST_CASE("boost_rounds with an identity sampler matches plain adaboost") {
  BinaryDataset ds = make_blobs(50, 20, 3, 41, 0.25);
  EnsembleConfig config{5, 50};
  BoostDiagnostics plain_diag, sampled_diag;
  TrainedModel plain = train_adaboost(ds, config, stump_params(), 99, &plain_diag);

  auto identity = [&](int, Rng&) {
    return rebalance::testing::all_rows(ds.n_rows());
  };
  auto [trees, alphas] =
      boost_rounds(ds, config, stump_params(), 99, identity, &sampled_diag);
  TrainedModel sampled = make_boost_model(ds, std::move(trees), std::move(alphas));

  CHECK(plain_diag.epsilons == sampled_diag.epsilons);
  CHECK(plain.member_count() == sampled.member_count());
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    CHECK(plain.predict_row(ds.row(i)) == sampled.predict_row(ds.row(i)));
}

TEST_CASE("train_model dispatches to the matching factory") {
  BinaryDataset ds = make_blobs(60, 25, 3, 51);
  LearnerSpec spec;

  spec.kind = LearnerKind::tree;
  CHECK(train_model(ds, spec, 1).kind() == TrainedModel::Kind::tree);

  spec.kind = LearnerKind::bagging;
  spec.ensemble.n_members = 5;
  TrainedModel via_spec = train_model(ds, spec, 77);
  TrainedModel direct = train_bagging(ds, 5, spec.tree, 77);
  CHECK(via_spec.kind() == TrainedModel::Kind::vote);
  std::ostringstream ss, sd;
  via_spec.save(ss);
  direct.save(sd);
  CHECK(ss.str() == sd.str());

  spec.kind = LearnerKind::adaboost;
  CHECK(train_model(ds, spec, 1).kind() == TrainedModel::Kind::boost);
  spec.kind = LearnerKind::adacost;
  CHECK(train_model(ds, spec, 1).kind() == TrainedModel::Kind::boost);
  spec.kind = LearnerKind::cost_sensitive;
  CHECK(train_model(ds, spec, 1).kind() == TrainedModel::Kind::cost_rule);
}

TEST_CASE("every model kind survives a save/load round trip") {
  BinaryDataset ds = make_blobs(40, 15, 3, 61, 0.3);
  std::vector<TrainedModel> models;
  models.push_back(train_tree(ds, TreeParams{}));
  models.push_back(train_bagging(ds, 4, TreeParams{}, 5));
  models.push_back(train_adaboost(ds, EnsembleConfig{4, 20}, stump_params(), 5));
  models.push_back(train_cost_sensitive(ds, CostMatrix{}, TreeParams{}));

  for (const TrainedModel& m : models) {
    std::stringstream buf;
    m.save(buf);
    TrainedModel back = TrainedModel::load(buf);
    CHECK(back.kind() == m.kind());
    CHECK(back.member_count() == m.member_count());
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
      CHECK(back.predict_row(ds.row(i)) == m.predict_row(ds.row(i)));
  }
}

TEST_CASE("predict rejects probes with a different schema") {
  BinaryDataset two = make_blobs(20, 10, 2, 71);
  BinaryDataset three = make_blobs(20, 10, 3, 71);
  TrainedModel model = train_tree(two, TreeParams{});
  CHECK_THROWS_AS(model.predict(three), SchemaMismatch);
  CHECK_NOTHROW(model.predict(two));
}
