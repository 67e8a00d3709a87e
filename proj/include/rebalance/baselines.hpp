#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/learners.hpp"

namespace rebalance {

/// Undersampling-rate grid used by the sweep (descending, 20 entries).
extern const std::array<double, 20> kSweepRateGrid;

/// Uniform random keep-mask over the majority rows: max(1, round(rate * N))
/// bits set. rate must lie in (0, 1].
SelectionMask random_undersample(const ClassPartition& part, double rate, std::uint64_t seed);

/// Uniform resample: n_rows draws, class fair-coin then a uniform row of that
/// class. Rebalances toward 1:1 in expectation.
BinaryDataset resample_uniform(const BinaryDataset& ds, std::uint64_t seed);

struct SweepSpec {
  std::vector<double> rates{kSweepRateGrid.begin(), kSweepRateGrid.end()};
  int trials = 10;
  int folds = 10;
  std::uint64_t seed = 42;
  LearnerSpec learner;  // defaults to the plain tree
};

struct SweepRow {
  double rate = 0.0;
  double mean_tpr = 0.0;
  double mean_tnr = 0.0;
  double mean_product = 0.0;
  double integrity = 0.0;   // selected / original majority
  double post_ratio = 0.0;  // minority / selected majority
};

/// Rate-by-rate random undersampling, each rate averaged over seeded trials
/// evaluated by stratified CV. Rates must be strictly descending.
std::vector<SweepRow> undersample_sweep(const BinaryDataset& ds, const SweepSpec& spec);

struct CascadeDiagnostics {
  std::vector<std::size_t> pool_sizes;  // majority pool at the start of each round
  int rounds_run = 0;
};

/// Independent balanced subsets, each boosted, members pooled into one
/// margin vote.
TrainedModel train_easy_ensemble(const BinaryDataset& ds, int n_subsets, int rounds_per_subset,
                                 const TreeParams& params, std::uint64_t seed);

/// Sequential balanced subsets; after each round the easiest majority rows
/// (most confidently majority under that round's ensemble) leave the pool on
/// a geometric schedule. Stops when the pool drops below the minority count.
TrainedModel train_balance_cascade(const BinaryDataset& ds, int n_rounds, int rounds_per_subset,
                                   const TreeParams& params, std::uint64_t seed,
                                   CascadeDiagnostics* diagnostics = nullptr);

/// Boosting with per-round random undersampling of the majority class at the
/// given rate; errors and weight updates use the full training set.
TrainedModel train_rusboost(const BinaryDataset& ds, const EnsembleConfig& config, double rate,
                            const TreeParams& params, std::uint64_t seed,
                            BoostDiagnostics* diagnostics = nullptr);

}  // namespace rebalance
