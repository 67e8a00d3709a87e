#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/tree.hpp"

namespace rebalance {

struct CostMatrix {
  double cost_fp = 50.0;  // misclassifying a minority row as majority
  double cost_fn = 5.0;   // misclassifying a majority row as minority
  bool operator==(const CostMatrix&) const = default;
};

struct EnsembleConfig {
  int n_members = 50;     // retained-member cap
  int n_iterations = 100; // boosting round cap
  bool operator==(const EnsembleConfig&) const = default;
};

enum class LearnerKind : std::uint8_t { tree, bagging, adaboost, adacost, cost_sensitive };

struct LearnerSpec {
  LearnerKind kind = LearnerKind::tree;
  TreeParams tree;
  EnsembleConfig ensemble;
  CostMatrix costs;
  bool operator==(const LearnerSpec&) const = default;
};

/// Optional boosting introspection for tests and diagnostics.
struct BoostDiagnostics {
  std::vector<double> epsilons;                 // per retained round
  std::vector<double> weight_sums;              // after each round's renormalize
  std::vector<std::vector<double>> weights;     // post-update distribution per round
  int discarded_rounds = 0;
};

/// Immutable trained classifier. Copies share state.
class TrainedModel {
 public:
  enum class Kind : std::uint8_t { tree, vote, boost, cost_rule };

  Kind kind() const;
  const std::vector<AttributeSpec>& schema() const;
  std::size_t member_count() const;

  /// Throws SchemaMismatch when the probe's attributes differ from the
  /// training schema.
  std::vector<ClassTag> predict(const BinaryDataset& probe) const;
  ClassTag predict_row(std::span<const double> features) const;
  std::array<double, 2> score_row(std::span<const double> features) const;  // {maj, min}

  void save(std::ostream& out) const;
  static TrainedModel load(std::istream& in);

  struct Impl;
  explicit TrainedModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

TrainedModel train_tree(const BinaryDataset& ds, const TreeParams& params,
                        std::span<const double> weights = {});
TrainedModel train_bagging(const BinaryDataset& ds, int n_members, const TreeParams& params,
                           std::uint64_t seed);
TrainedModel train_adaboost(const BinaryDataset& ds, const EnsembleConfig& config,
                            const TreeParams& params, std::uint64_t seed,
                            BoostDiagnostics* diagnostics = nullptr);
TrainedModel train_adacost(const BinaryDataset& ds, const CostMatrix& costs,
                           const EnsembleConfig& config, const TreeParams& params,
                           std::uint64_t seed, BoostDiagnostics* diagnostics = nullptr);
TrainedModel train_cost_sensitive(const BinaryDataset& ds, const CostMatrix& costs,
                                  const TreeParams& params);

TrainedModel train_model(const BinaryDataset& ds, const LearnerSpec& spec, std::uint64_t seed);

/// Minimum-expected-cost decision on leaf scores; the boundary goes to the
/// minority class.
ClassTag cost_rule(double score_majority, double score_minority, const CostMatrix& costs);

class Rng;

/// Building blocks for ensemble baselines that wrap the boosting loop.
/// `sampler` picks the training occurrences for a round (empty result means
/// every row); sampled single-class rounds are re-drawn once, then skipped.
std::pair<std::vector<DecisionTree>, std::vector<double>> boost_rounds(
    const BinaryDataset& ds, const EnsembleConfig& config, const TreeParams& params,
    std::uint64_t seed,
    const std::function<std::vector<std::int32_t>(int, Rng&)>& sampler,
    BoostDiagnostics* diagnostics = nullptr);

/// Wraps (tree, alpha) members into a margin-vote model with ds's schema.
TrainedModel make_boost_model(const BinaryDataset& ds, std::vector<DecisionTree> trees,
                              std::vector<double> alphas);

/// AdaCost weight factors for a row cost in [0, 1].
double adacost_beta_plus(double row_cost);
double adacost_beta_minus(double row_cost);

}  // namespace rebalance
