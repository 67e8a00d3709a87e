#include "rebalance/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "rebalance/errors.hpp"
#include "rebalance/evaluation.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

const std::array<double, 20> kSweepRateGrid = {
    1.0, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2,
    0.1, 0.08, 0.06, 0.04, 0.02, 0.015, 0.014, 0.013, 0.012, 0.011};

namespace {

/// First `take` entries of a seeded partial Fisher-Yates over [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t take, Rng& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + rng.index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

std::vector<std::int32_t> balanced_subset_rows(const BinaryDataset& ds,
                                               const std::vector<std::int32_t>& pool,
                                               std::size_t n_minority, Rng& rng) {
  std::vector<std::int32_t> rows;
  rows.reserve(2 * n_minority);
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    if (ds.labels[i] == ClassTag::minority) rows.push_back(static_cast<std::int32_t>(i));
  for (std::size_t p : sample_without_replacement(pool.size(), n_minority, rng))
    rows.push_back(pool[p]);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

SelectionMask random_undersample(const ClassPartition& part, double rate, std::uint64_t seed) {
  if (!(rate > 0.0) || rate > 1.0)
    throw Error("undersample rate must lie in (0, 1], got " + std::to_string(rate));
  std::size_t n = part.majority.size();
  if (n == 0) throw EmptyClass("majority class is empty");
  auto keep = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(rate * static_cast<double>(n)), 1,
                            static_cast<long long>(n)));
  SelectionMask mask;
  mask.bits.assign(n, 0);
  Rng rng(derive_seed(seed, seeds::mask));
  for (std::size_t pos : sample_without_replacement(n, keep, rng)) mask.bits[pos] = 1;
  return mask;
}

BinaryDataset resample_uniform(const BinaryDataset& ds, std::uint64_t seed) {
  ClassPartition part = partition_classes(ds);
  if (part.majority.empty() || part.minority.empty())
    throw EmptyClass("resampling needs rows of both classes");
  Rng rng(derive_seed(seed, seeds::resample));
  std::vector<std::int32_t> rows;
  rows.reserve(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const auto& cls = rng.uniform01() < 0.5 ? part.majority : part.minority;
    rows.push_back(cls[rng.index(cls.size())]);
  }
  return select_rows(ds, rows);
}

std::vector<SweepRow> undersample_sweep(const BinaryDataset& ds, const SweepSpec& spec) {
  if (spec.rates.empty()) throw Error("sweep needs at least one rate");
  for (std::size_t i = 0; i < spec.rates.size(); ++i) {
    if (!(spec.rates[i] > 0.0) || spec.rates[i] > 1.0)
      throw Error("sweep rates must lie in (0, 1]");
    if (i > 0 && !(spec.rates[i] < spec.rates[i - 1]))
      throw Error("sweep rates must be strictly descending");
  }
  if (spec.trials < 1) throw Error("sweep needs at least one trial");

  ClassPartition part = partition_classes(ds);
  if (part.minority.empty()) throw EmptyClass("dataset has no minority rows");
  double n_majority = static_cast<double>(part.majority.size());
  double n_minority = static_cast<double>(part.minority.size());

  std::vector<SweepRow> rows;
  rows.reserve(spec.rates.size());
  for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
    double rate = spec.rates[ri];
    SweepRow row;
    row.rate = rate;
    std::size_t kept = 0;
    for (int trial = 0; trial < spec.trials; ++trial) {
      SelectionMask mask = random_undersample(
          part, rate,
          derive_seed(spec.seed, seeds::trial, static_cast<std::uint64_t>(ri),
                      static_cast<std::uint64_t>(trial)));
      kept = mask.count();
      CvOutcome cv = cv_evaluate(ds, spec.learner, spec.folds, spec.seed, &mask, &part);
      row.mean_tpr += cv.mean.tpr;
      row.mean_tnr += cv.mean.tnr;
      row.mean_product += cv.mean.tpr_x_tnr;
    }
    row.mean_tpr /= spec.trials;
    row.mean_tnr /= spec.trials;
    row.mean_product /= spec.trials;
    row.integrity = static_cast<double>(kept) / n_majority;
    row.post_ratio = n_minority / static_cast<double>(kept);
    rows.push_back(row);
  }
  return rows;
}

TrainedModel train_easy_ensemble(const BinaryDataset& ds, int n_subsets, int rounds_per_subset,
                                 const TreeParams& params, std::uint64_t seed) {
  if (n_subsets < 1 || rounds_per_subset < 1)
    throw Error("ensemble sizes must be positive");
  ClassPartition part = partition_classes(ds);
  if (part.majority.empty() || part.minority.empty())
    throw EmptyClass("balanced subsets need rows of both classes");
  std::size_t n_min = part.minority.size();

  std::vector<DecisionTree> trees;
  std::vector<double> alphas;
  EnsembleConfig inner{rounds_per_subset, rounds_per_subset};
  for (int s = 0; s < n_subsets; ++s) {
    Rng rng(derive_seed(seed, seeds::subset, static_cast<std::uint64_t>(s)));
    auto rows = balanced_subset_rows(ds, part.majority, n_min, rng);
    BinaryDataset subset = select_rows(ds, rows);
    auto [t, a] = boost_rounds(subset, inner, params,
                               derive_seed(seed, seeds::learner, static_cast<std::uint64_t>(s)),
                               nullptr);
    for (auto& tree : t) trees.push_back(std::move(tree));
    for (double alpha : a) alphas.push_back(alpha);
  }
  return make_boost_model(ds, std::move(trees), std::move(alphas));
}

TrainedModel train_balance_cascade(const BinaryDataset& ds, int n_rounds, int rounds_per_subset,
                                   const TreeParams& params, std::uint64_t seed,
                                   CascadeDiagnostics* diagnostics) {
  if (n_rounds < 1 || rounds_per_subset < 1)
    throw Error("ensemble sizes must be positive");
  ClassPartition part = partition_classes(ds);
  if (part.majority.empty() || part.minority.empty())
    throw EmptyClass("balanced subsets need rows of both classes");
  std::size_t n_min = part.minority.size();

  // Geometric pool schedule: after n_rounds - 1 removals the pool matches the
  // minority count.
  double keep_fraction = 1.0;
  if (n_rounds > 1)
    keep_fraction = std::pow(static_cast<double>(n_min) / static_cast<double>(part.majority.size()),
                             1.0 / static_cast<double>(n_rounds - 1));

  std::vector<std::int32_t> pool = part.majority;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;
  EnsembleConfig inner{rounds_per_subset, rounds_per_subset};

  for (int t = 0; t < n_rounds; ++t) {
    if (pool.size() < n_min) break;
    if (diagnostics) {
      diagnostics->pool_sizes.push_back(pool.size());
      diagnostics->rounds_run = t + 1;
    }
    Rng rng(derive_seed(seed, seeds::subset, static_cast<std::uint64_t>(t)));
    auto rows = balanced_subset_rows(ds, pool, n_min, rng);
    BinaryDataset subset = select_rows(ds, rows);
    auto [round_trees, round_alphas] =
        boost_rounds(subset, inner, params,
                     derive_seed(seed, seeds::learner, static_cast<std::uint64_t>(t)), nullptr);

    if (t + 1 < n_rounds) {
      // Rank the pool by this round's ensemble: keep the rows it is least
      // confident are majority (the hard ones), drop the rest.
      std::vector<std::pair<double, std::int32_t>> ranked;
      ranked.reserve(pool.size());
      for (std::int32_t row : pool) {
        double margin = 0.0;
        for (std::size_t m = 0; m < round_trees.size(); ++m)
          margin += round_trees[m].predict_row(ds.row(row)) == ClassTag::majority
                        ? round_alphas[m]
                        : -round_alphas[m];
        ranked.emplace_back(margin, row);
      }
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;  // least majority-confident first
        return a.second < b.second;
      });
      auto keep = static_cast<std::size_t>(
          std::ceil(keep_fraction * static_cast<double>(pool.size())));
      keep = std::min(keep, pool.size());
      pool.clear();
      for (std::size_t i = 0; i < keep; ++i) pool.push_back(ranked[i].second);
      std::sort(pool.begin(), pool.end());
    }

    for (auto& tree : round_trees) trees.push_back(std::move(tree));
    for (double alpha : round_alphas) alphas.push_back(alpha);
  }
  return make_boost_model(ds, std::move(trees), std::move(alphas));
}

TrainedModel train_rusboost(const BinaryDataset& ds, const EnsembleConfig& config, double rate,
                            const TreeParams& params, std::uint64_t seed,
                            BoostDiagnostics* diagnostics) {
  if (!(rate > 0.0) || rate > 1.0) throw Error("undersample rate must lie in (0, 1]");
  ClassPartition part = partition_classes(ds);
  if (part.majority.empty() || part.minority.empty())
    throw EmptyClass("boosting needs rows of both classes");
  auto keep = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(rate * static_cast<double>(part.majority.size())), 1,
                            static_cast<long long>(part.majority.size())));

  std::function<std::vector<std::int32_t>(int, Rng&)> sampler;
  if (keep < part.majority.size()) {
    sampler = [&part, keep, &ds](int, Rng& rng) {
      std::vector<std::int32_t> rows;
      rows.reserve(part.minority.size() + keep);
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (ds.labels[i] == ClassTag::minority) rows.push_back(static_cast<std::int32_t>(i));
      for (std::size_t p : sample_without_replacement(part.majority.size(), keep, rng))
        rows.push_back(part.majority[p]);
      std::sort(rows.begin(), rows.end());
      return rows;
    };
  }
  auto [trees, alphas] = boost_rounds(ds, config, params, seed, sampler, diagnostics);
  return make_boost_model(ds, std::move(trees), std::move(alphas));
}

}  // namespace rebalance
