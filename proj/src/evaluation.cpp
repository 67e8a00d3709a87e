#include "rebalance/evaluation.hpp"

#include <algorithm>

#include "rebalance/errors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

void fold_split(const FoldPlan& plan, int fold, std::vector<std::int32_t>& train,
                std::vector<std::int32_t>& test) {
  train.clear();
  test.clear();
  for (std::size_t i = 0; i < plan.fold_of.size(); ++i)
    (plan.fold_of[i] == fold ? test : train).push_back(static_cast<std::int32_t>(i));
}

CvOutcome cv_evaluate(const BinaryDataset& ds, const LearnerSpec& spec, int folds,
                      std::uint64_t seed, const SelectionMask* train_mask,
                      const ClassPartition* part) {
  if (train_mask && !part)
    throw Error("a train mask needs the class partition it indexes");
  if (train_mask && train_mask->bits.size() != part->majority.size())
    throw LengthMismatch("train mask does not cover the majority class");

  std::vector<char> selected(ds.n_rows(), 1);
  if (train_mask) {
    for (std::size_t b = 0; b < train_mask->bits.size(); ++b)
      selected[part->majority[b]] = train_mask->bits[b] ? 1 : 0;
  }

  CvOutcome out;
  out.plan = stratified_folds(ds, folds, derive_seed(seed, seeds::fold_plan));
  out.per_fold.resize(folds);
  out.valid.assign(folds, false);

  std::vector<std::int32_t> train, test, kept;
  std::vector<MetricReport> valid_reports;
  for (int f = 0; f < folds; ++f) {
    fold_split(out.plan, f, train, test);
    kept.clear();
    for (std::int32_t i : train)
      if (selected[i]) kept.push_back(i);

    auto has_both = [&](const std::vector<std::int32_t>& rows) {
      bool maj = false, mnr = false;
      for (std::int32_t i : rows) {
        (ds.labels[i] == ClassTag::majority ? maj : mnr) = true;
        if (maj && mnr) return true;
      }
      return false;
    };
    if (test.empty() || kept.empty() || !has_both(test) || !has_both(kept)) continue;

    BinaryDataset train_ds = select_rows(ds, kept);
    BinaryDataset test_ds = select_rows(ds, test);
    TrainedModel model =
        train_model(train_ds, spec, derive_seed(seed, seeds::learner, static_cast<std::uint64_t>(f)));
    auto preds = model.predict(test_ds);
    ConfusionMatrix cm = confusion(preds, test_ds.labels);
    out.per_fold[f] = full_report(cm, 1, 1, 0.0);
    out.valid[f] = true;
    valid_reports.push_back(out.per_fold[f]);
  }
  out.valid_folds = static_cast<int>(valid_reports.size());
  out.mean = mean_report(valid_reports);
  return out;
}

}  // namespace rebalance
