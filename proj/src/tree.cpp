#include "rebalance/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rebalance/errors.hpp"

namespace rebalance {
namespace {

struct Occurrence {
  std::int32_t row;
  double weight;
};

double gini(double w_maj, double w_min) {
  double w = w_maj + w_min;
  if (w <= 0.0) return 0.0;
  double pm = w_maj / w, pn = w_min / w;
  return 1.0 - pm * pm - pn * pn;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  int category = -1;
  double impurity = std::numeric_limits<double>::infinity();
};

class Builder {
 public:
  Builder(const BinaryDataset& ds, const TreeParams& params)
      : ds_(ds), params_(params) {}

  std::vector<TreeNode> build(std::span<const std::int32_t> rows,
                              std::span<const double> weights) {
    occ_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      occ_[i] = {rows[i], weights.empty() ? 1.0 : weights[i]};
    scratch_.reserve(rows.size());
    grow(0, occ_.size(), 0);
    return std::move(nodes_);
  }

 private:
  double value_at(const Occurrence& o, int feature) const {
    return ds_.row(static_cast<std::size_t>(o.row))[static_cast<std::size_t>(feature)];
  }

  std::int32_t make_leaf(std::size_t lo, std::size_t hi) {
    double w_maj = 0.0, w_min = 0.0;
    std::size_t c_maj = 0, c_min = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (ds_.labels[occ_[i].row] == ClassTag::majority) {
        w_maj += occ_[i].weight;
        ++c_maj;
      } else {
        w_min += occ_[i].weight;
        ++c_min;
      }
    }
    TreeNode node;
    double w = w_maj + w_min;
    if (w > 0.0) {
      node.score_majority = w_maj / w;
      node.score_minority = w_min / w;
    } else {
      // All-zero weights: fall back to plain counts.
      double c = static_cast<double>(c_maj + c_min);
      node.score_majority = c > 0.0 ? static_cast<double>(c_maj) / c : 0.5;
      node.score_minority = 1.0 - node.score_majority;
    }
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t grow(std::size_t lo, std::size_t hi, int depth) {
    double w_maj = 0.0, w_min = 0.0;
    std::size_t c_maj = 0, c_min = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (ds_.labels[occ_[i].row] == ClassTag::majority) {
        w_maj += occ_[i].weight;
        ++c_maj;
      } else {
        w_min += occ_[i].weight;
        ++c_min;
      }
    }
    std::size_t n = hi - lo;
    bool pure = c_maj == 0 || c_min == 0;
    bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_capped || n < 2 * static_cast<std::size_t>(params_.min_leaf))
      return make_leaf(lo, hi);

    SplitChoice best = find_split(lo, hi, w_maj + w_min);
    if (best.feature < 0) return make_leaf(lo, hi);

    auto goes_left = [&](const Occurrence& o) {
      double v = value_at(o, best.feature);
      return best.category >= 0 ? v == static_cast<double>(best.category)
                                : v <= best.threshold;
    };
    auto mid_it = std::stable_partition(occ_.begin() + lo, occ_.begin() + hi, goes_left);
    std::size_t mid = static_cast<std::size_t>(mid_it - occ_.begin());

    TreeNode node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.category = best.category;
    nodes_.push_back(node);
    std::int32_t id = static_cast<std::int32_t>(nodes_.size() - 1);
    std::int32_t left = grow(lo, mid, depth + 1);
    std::int32_t right = grow(mid, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  SplitChoice find_split(std::size_t lo, std::size_t hi, double w_total) {
    SplitChoice best;
    std::size_t n = hi - lo;
    std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);

    for (int f = 0; f < static_cast<int>(ds_.n_features()); ++f) {
      if (ds_.attributes[f].kind == AttrKind::nominal) {
        scan_nominal(lo, hi, f, w_total, min_leaf, best);
      } else {
        scan_numeric(lo, hi, f, w_total, n, min_leaf, best);
      }
    }
    return best;
  }

  void scan_numeric(std::size_t lo, std::size_t hi, int f, double w_total, std::size_t n,
                    std::size_t min_leaf, SplitChoice& best) {
    scratch_.assign(occ_.begin() + lo, occ_.begin() + hi);
    // Value then row index, so equal-value runs have a pinned order.
    std::sort(scratch_.begin(), scratch_.end(), [&](const Occurrence& a, const Occurrence& b) {
      double va = value_at(a, f), vb = value_at(b, f);
      if (va != vb) return va < vb;
      return a.row < b.row;
    });

    double total_maj = 0.0, total_min = 0.0;
    for (const auto& o : scratch_)
      (ds_.labels[o.row] == ClassTag::majority ? total_maj : total_min) += o.weight;

    double left_maj = 0.0, left_min = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (ds_.labels[scratch_[i].row] == ClassTag::majority ? left_maj : left_min) +=
          scratch_[i].weight;
      double v = value_at(scratch_[i], f);
      double v_next = value_at(scratch_[i + 1], f);
      if (!(v_next > v)) continue;
      std::size_t left_n = i + 1;
      if (left_n < min_leaf || n - left_n < min_leaf) continue;
      double wl = left_maj + left_min;
      double wr = (total_maj - left_maj) + (total_min - left_min);
      double impurity = (wl * gini(left_maj, left_min) +
                         wr * gini(total_maj - left_maj, total_min - left_min)) /
                        w_total;
      if (impurity < best.impurity) {
        double thr = v + (v_next - v) / 2.0;
        if (!(thr < v_next)) thr = v;  // adjacent doubles: pin to the left value
        best = {f, thr, -1, impurity};
      }
    }
  }

  void scan_nominal(std::size_t lo, std::size_t hi, int f, double w_total,
                    std::size_t min_leaf, SplitChoice& best) {
    std::size_t n_cat = ds_.attributes[f].nominal_values.size();
    cat_maj_.assign(n_cat, 0.0);
    cat_min_.assign(n_cat, 0.0);
    cat_count_.assign(n_cat, 0);
    double total_maj = 0.0, total_min = 0.0;
    std::size_t n = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) {
      auto c = static_cast<std::size_t>(value_at(occ_[i], f));
      if (ds_.labels[occ_[i].row] == ClassTag::majority) {
        cat_maj_[c] += occ_[i].weight;
        total_maj += occ_[i].weight;
      } else {
        cat_min_[c] += occ_[i].weight;
        total_min += occ_[i].weight;
      }
      cat_count_[c]++;
    }
    for (std::size_t c = 0; c < n_cat; ++c) {
      std::size_t in_c = cat_count_[c];
      if (in_c < min_leaf || n - in_c < min_leaf) continue;
      double wl = cat_maj_[c] + cat_min_[c];
      double wr = (total_maj - cat_maj_[c]) + (total_min - cat_min_[c]);
      double impurity = (wl * gini(cat_maj_[c], cat_min_[c]) +
                         wr * gini(total_maj - cat_maj_[c], total_min - cat_min_[c])) /
                        w_total;
      if (impurity < best.impurity)
        best = {f, 0.0, static_cast<int>(c), impurity};
    }
  }

  const BinaryDataset& ds_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
  std::vector<Occurrence> occ_;
  std::vector<Occurrence> scratch_;
  std::vector<double> cat_maj_, cat_min_;
  std::vector<std::size_t> cat_count_;
};

}  // namespace

DecisionTree DecisionTree::train(const BinaryDataset& ds, std::span<const std::int32_t> rows,
                                 std::span<const double> weights, const TreeParams& params) {
  if (rows.empty()) throw Error("cannot train a tree on zero rows");
  if (!weights.empty() && weights.size() != rows.size())
    throw LengthMismatch("weight count does not match row count");
  if (params.min_leaf < 1) throw Error("min_leaf must be at least 1");
  DecisionTree tree;
  Builder builder(ds, params);
  tree.nodes_ = builder.build(rows, weights);
  return tree;
}

ClassTag DecisionTree::predict_row(std::span<const double> features) const {
  auto s = score_row(features);
  // Tied leaf goes to the minority class, matching the cost rule's boundary.
  return s[1] >= s[0] ? ClassTag::minority : ClassTag::majority;
}

std::array<double, 2> DecisionTree::score_row(std::span<const double> features) const {
  std::int32_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& node = nodes_[at];
    double v = features[static_cast<std::size_t>(node.feature)];
    bool left = node.category >= 0 ? v == static_cast<double>(node.category)
                                   : v <= node.threshold;
    at = left ? node.left : node.right;
  }
  return {nodes_[at].score_majority, nodes_[at].score_minority};
}

int DecisionTree::depth() const {
  // Iterative depth over the node array; leaves have depth 1.
  std::vector<std::pair<std::int32_t, int>> stack{{0, 1}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& node = nodes_[id];
    if (node.feature < 0) {
      deepest = std::max(deepest, d);
    } else {
      stack.push_back({node.left, d + 1});
      stack.push_back({node.right, d + 1});
    }
  }
  return deepest;
}

void DecisionTree::save(std::ostream& out) const {
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_i32 = [&](std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(static_cast<std::uint32_t>(nodes_.size()));
  for (const TreeNode& n : nodes_) {
    put_i32(n.feature);
    put_f64(n.threshold);
    put_i32(n.category);
    put_i32(n.left);
    put_i32(n.right);
    put_f64(n.score_majority);
    put_f64(n.score_minority);
  }
}

DecisionTree DecisionTree::load(std::istream& in) {
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_i32 = [&] {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  DecisionTree tree;
  std::uint32_t count = get_u32();
  tree.nodes_.resize(count);
  for (auto& n : tree.nodes_) {
    n.feature = get_i32();
    n.threshold = get_f64();
    n.category = get_i32();
    n.left = get_i32();
    n.right = get_i32();
    n.score_majority = get_f64();
    n.score_minority = get_f64();
  }
  if (!in) throw Error("truncated tree payload");
  return tree;
}

}  // namespace rebalance
