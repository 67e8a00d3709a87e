#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

struct TreeParams {
  std::optional<int> max_depth;  // unset: grow until pure or unsplittable
  int min_leaf = 1;
  bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
  std::int32_t feature = -1;      // -1 marks a leaf
  double threshold = 0.0;         // numeric split: left when value <= threshold
  std::int32_t category = -1;     // >= 0 marks a nominal split: left when value == category
  std::int32_t left = -1;
  std::int32_t right = -1;
  double score_majority = 0.0;    // leaf class frequencies
  double score_minority = 0.0;
  bool operator==(const TreeNode&) const = default;
};

/// CART with weighted Gini impurity. Rows may repeat (bootstrap occurrences);
/// an empty weight span means unit weights.
class DecisionTree {
 public:
  static DecisionTree train(const BinaryDataset& ds, std::span<const std::int32_t> rows,
                            std::span<const double> weights, const TreeParams& params);

  ClassTag predict_row(std::span<const double> features) const;
  std::array<double, 2> score_row(std::span<const double> features) const;  // {maj, min}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

  void save(std::ostream& out) const;
  static DecisionTree load(std::istream& in);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace rebalance
