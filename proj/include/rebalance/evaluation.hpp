#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/learners.hpp"
#include "rebalance/metrics.hpp"

namespace rebalance {

/// Per-fold outcome of a stratified cross-validation pass. Folds whose train
/// or test part lacks a class are marked invalid and excluded from the mean.
struct CvOutcome {
  FoldPlan plan;
  std::vector<MetricReport> per_fold;   // zeroed for invalid folds
  std::vector<bool> valid;
  MetricReport mean;                    // over valid folds
  int valid_folds = 0;
};

/// Stratified k-fold evaluation of a learner. The fold plan derives from
/// (seed, fold_plan tag); per-fold learner seeds derive from (seed, learner
/// tag, fold). When `train_mask` is given (bits over `part`'s majority rows),
/// unselected majority rows are dropped from each fold's training part only;
/// test folds always keep every row.
CvOutcome cv_evaluate(const BinaryDataset& ds, const LearnerSpec& spec, int folds,
                      std::uint64_t seed, const SelectionMask* train_mask = nullptr,
                      const ClassPartition* part = nullptr);

/// Train/test index split for one fold of a plan.
void fold_split(const FoldPlan& plan, int fold, std::vector<std::int32_t>& train,
                std::vector<std::int32_t>& test);

}  // namespace rebalance
