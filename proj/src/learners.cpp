#include "rebalance/learners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rebalance/errors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

struct TrainedModel::Impl {
  Kind kind = Kind::tree;
  std::vector<AttributeSpec> schema;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;  // parallel to trees for Kind::boost
  CostMatrix costs;
};

namespace {

constexpr char kModelMagic[4] = {'R', 'B', 'M', 'B'};
constexpr std::uint32_t kModelVersion = 1;

std::shared_ptr<TrainedModel::Impl> new_impl(TrainedModel::Kind kind, const BinaryDataset& ds) {
  auto impl = std::make_shared<TrainedModel::Impl>();
  impl->kind = kind;
  impl->schema = ds.attributes;
  return impl;
}

void require_both_classes(const BinaryDataset& ds, const char* who) {
  if (ds.count(ClassTag::majority) == 0 || ds.count(ClassTag::minority) == 0)
    throw EmptyClass(std::string(who) + " needs rows of both classes");
}

std::vector<std::int32_t> all_rows(const BinaryDataset& ds) {
  std::vector<std::int32_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

bool single_class(const BinaryDataset& ds, std::span<const std::int32_t> rows) {
  bool saw_maj = false, saw_min = false;
  for (std::int32_t r : rows) {
    (ds.labels[r] == ClassTag::majority ? saw_maj : saw_min) = true;
    if (saw_maj && saw_min) return false;
  }
  return true;
}

/// AdaBoost.M1 core. Returns retained (tree, alpha) pairs. A null sampler (or
/// an empty sample) trains each round on every row. Cost-aware updates apply
/// when costs != nullptr.
std::pair<std::vector<DecisionTree>, std::vector<double>> boost_members(
    const BinaryDataset& ds, const EnsembleConfig& config, const TreeParams& params,
    const CostMatrix* costs, std::uint64_t seed,
    const std::function<std::vector<std::int32_t>(int, Rng&)>& sampler,
    BoostDiagnostics* diag) {
  const std::size_t n = ds.n_rows();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;
  Rng jitter_rng(derive_seed(seed, seeds::jitter));
  Rng sampler_rng(derive_seed(seed, seeds::subset));

  const std::vector<std::int32_t> everything = all_rows(ds);
  std::vector<double> round_weights;
  std::vector<ClassTag> preds(n);

  double max_cost = costs ? std::max(costs->cost_fp, costs->cost_fn) : 0.0;
  auto row_cost = [&](std::size_t i) {
    if (max_cost <= 0.0) return 0.0;
    double c = ds.labels[i] == ClassTag::minority ? costs->cost_fp : costs->cost_fn;
    return c / max_cost;
  };

  int attempts = 0;
  bool retried = false;
  while (attempts < config.n_iterations &&
         static_cast<int>(trees.size()) < config.n_members) {
    ++attempts;
    std::span<const std::int32_t> rows = everything;
    std::vector<std::int32_t> sampled;
    if (sampler) {
      sampled = sampler(attempts - 1, sampler_rng);
      if (!sampled.empty() && single_class(ds, sampled)) {
        sampled = sampler(attempts - 1, sampler_rng);  // one retry with fresh draws
        if (!sampled.empty() && single_class(ds, sampled)) continue;
      }
      if (!sampled.empty()) rows = sampled;
    }

    round_weights.resize(rows.size());
    double sample_sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) sample_sum += w[rows[i]];
    for (std::size_t i = 0; i < rows.size(); ++i)
      round_weights[i] = sample_sum > 0.0 ? w[rows[i]] / sample_sum : 1.0 / rows.size();

    DecisionTree tree = DecisionTree::train(ds, rows, round_weights, params);

    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = tree.predict_row(ds.row(i));
      if (preds[i] != ds.labels[i]) eps += w[i];
    }

    if (eps >= 0.5) {
      if (diag) diag->discarded_rounds++;
      if (retried) break;
      retried = true;
      double sum = 0.0;
      for (double& wi : w) {
        wi *= 1.0 + 1e-6 * jitter_rng.uniform01();
        sum += wi;
      }
      for (double& wi : w) wi /= sum;
      continue;
    }
    retried = false;

    double eps_c = std::clamp(eps, 1e-10, 1.0 - 1e-10);
    double alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
    trees.push_back(std::move(tree));
    alphas.push_back(alpha);
    if (diag) diag->epsilons.push_back(eps);

    if (eps == 0.0) {
      if (diag) {
        diag->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
        diag->weights.push_back(w);
      }
      break;
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool wrong = preds[i] != ds.labels[i];
      double exponent;
      if (costs) {
        double c = row_cost(i);
        exponent = wrong ? alpha * adacost_beta_plus(c) : -alpha * adacost_beta_minus(c);
      } else {
        exponent = wrong ? alpha : -alpha;
      }
      w[i] *= std::exp(exponent);
      sum += w[i];
    }
    for (double& wi : w) wi /= sum;
    if (diag) {
      diag->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
      diag->weights.push_back(w);
    }
  }

  if (trees.empty()) {
    trees.push_back(DecisionTree::train(ds, everything, {}, params));
    alphas.push_back(1.0);
  }
  return {std::move(trees), std::move(alphas)};
}

}  // namespace

double adacost_beta_plus(double row_cost) { return 0.5 * row_cost + 0.5; }
double adacost_beta_minus(double row_cost) { return -0.5 * row_cost + 0.5; }

ClassTag cost_rule(double score_majority, double score_minority, const CostMatrix& costs) {
  return score_minority * costs.cost_fp >= score_majority * costs.cost_fn
             ? ClassTag::minority
             : ClassTag::majority;
}

TrainedModel::Kind TrainedModel::kind() const { return impl_->kind; }
const std::vector<AttributeSpec>& TrainedModel::schema() const { return impl_->schema; }
std::size_t TrainedModel::member_count() const { return impl_->trees.size(); }

ClassTag TrainedModel::predict_row(std::span<const double> features) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::tree:
      return m.trees[0].predict_row(features);
    case Kind::vote: {
      std::size_t votes_maj = 0;
      for (const auto& t : m.trees)
        if (t.predict_row(features) == ClassTag::majority) ++votes_maj;
      // Tied vote goes to the majority class.
      return 2 * votes_maj >= m.trees.size() ? ClassTag::majority : ClassTag::minority;
    }
    case Kind::boost: {
      double margin = 0.0;
      for (std::size_t t = 0; t < m.trees.size(); ++t)
        margin += m.trees[t].predict_row(features) == ClassTag::majority ? m.alphas[t]
                                                                         : -m.alphas[t];
      return margin >= 0.0 ? ClassTag::majority : ClassTag::minority;
    }
    case Kind::cost_rule: {
      auto s = m.trees[0].score_row(features);
      return cost_rule(s[0], s[1], m.costs);
    }
  }
  return ClassTag::majority;
}

std::array<double, 2> TrainedModel::score_row(std::span<const double> features) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::tree:
    case Kind::cost_rule:
      return m.trees[0].score_row(features);
    case Kind::vote: {
      double votes_maj = 0.0;
      for (const auto& t : m.trees)
        if (t.predict_row(features) == ClassTag::majority) votes_maj += 1.0;
      double n = static_cast<double>(m.trees.size());
      return {votes_maj / n, 1.0 - votes_maj / n};
    }
    case Kind::boost: {
      double for_maj = 0.0, total = 0.0;
      for (std::size_t t = 0; t < m.trees.size(); ++t) {
        total += m.alphas[t];
        if (m.trees[t].predict_row(features) == ClassTag::majority) for_maj += m.alphas[t];
      }
      if (total <= 0.0) return {0.5, 0.5};
      return {for_maj / total, 1.0 - for_maj / total};
    }
  }
  return {0.5, 0.5};
}

std::vector<ClassTag> TrainedModel::predict(const BinaryDataset& probe) const {
  if (probe.attributes != impl_->schema)
    throw SchemaMismatch("probe schema differs from the training schema");
  std::vector<ClassTag> out;
  out.reserve(probe.n_rows());
  for (std::size_t i = 0; i < probe.n_rows(); ++i) out.push_back(predict_row(probe.row(i)));
  return out;
}

TrainedModel train_tree(const BinaryDataset& ds, const TreeParams& params,
                        std::span<const double> weights) {
  auto impl = new_impl(TrainedModel::Kind::tree, ds);
  impl->trees.push_back(DecisionTree::train(ds, all_rows(ds), weights, params));
  return TrainedModel(std::move(impl));
}

TrainedModel train_bagging(const BinaryDataset& ds, int n_members, const TreeParams& params,
                           std::uint64_t seed) {
  require_both_classes(ds, "bagging");
  if (n_members < 1) throw Error("bagging needs at least one member");
  auto impl = new_impl(TrainedModel::Kind::vote, ds);
  const std::size_t n = ds.n_rows();
  std::vector<std::int32_t> sample(n);
  for (int m = 0; m < n_members; ++m) {
    Rng rng(derive_seed(seed, seeds::bootstrap, static_cast<std::uint64_t>(m)));
    for (std::size_t i = 0; i < n; ++i)
      sample[i] = static_cast<std::int32_t>(rng.index(n));
    impl->trees.push_back(DecisionTree::train(ds, sample, {}, params));
  }
  return TrainedModel(std::move(impl));
}

TrainedModel train_adaboost(const BinaryDataset& ds, const EnsembleConfig& config,
                            const TreeParams& params, std::uint64_t seed,
                            BoostDiagnostics* diagnostics) {
  require_both_classes(ds, "boosting");
  auto impl = new_impl(TrainedModel::Kind::boost, ds);
  auto [trees, alphas] = boost_members(ds, config, params, nullptr, seed, nullptr, diagnostics);
  impl->trees = std::move(trees);
  impl->alphas = std::move(alphas);
  return TrainedModel(std::move(impl));
}

TrainedModel train_adacost(const BinaryDataset& ds, const CostMatrix& costs,
                           const EnsembleConfig& config, const TreeParams& params,
                           std::uint64_t seed, BoostDiagnostics* diagnostics) {
  require_both_classes(ds, "boosting");
  auto impl = new_impl(TrainedModel::Kind::boost, ds);
  auto [trees, alphas] = boost_members(ds, config, params, &costs, seed, nullptr, diagnostics);
  impl->trees = std::move(trees);
  impl->alphas = std::move(alphas);
  impl->costs = costs;
  return TrainedModel(std::move(impl));
}

TrainedModel train_cost_sensitive(const BinaryDataset& ds, const CostMatrix& costs,
                                  const TreeParams& params) {
  auto impl = new_impl(TrainedModel::Kind::cost_rule, ds);
  impl->trees.push_back(DecisionTree::train(ds, all_rows(ds), {}, params));
  impl->costs = costs;
  return TrainedModel(std::move(impl));
}

TrainedModel train_model(const BinaryDataset& ds, const LearnerSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::tree:
      return train_tree(ds, spec.tree);
    case LearnerKind::bagging:
      return train_bagging(ds, spec.ensemble.n_members, spec.tree, seed);
    case LearnerKind::adaboost:
      return train_adaboost(ds, spec.ensemble, spec.tree, seed);
    case LearnerKind::adacost:
      return train_adacost(ds, spec.costs, spec.ensemble, spec.tree, seed);
    case LearnerKind::cost_sensitive:
      return train_cost_sensitive(ds, spec.costs, spec.tree);
  }
  throw Error("unknown learner kind");
}

TrainedModel make_boost_model(const BinaryDataset& ds, std::vector<DecisionTree> trees,
                              std::vector<double> alphas) {
  if (trees.size() != alphas.size() || trees.empty())
    throw Error("boost model needs matching nonempty tree and alpha lists");
  auto impl = new_impl(TrainedModel::Kind::boost, ds);
  impl->trees = std::move(trees);
  impl->alphas = std::move(alphas);
  return TrainedModel(std::move(impl));
}

std::pair<std::vector<DecisionTree>, std::vector<double>> boost_rounds(
    const BinaryDataset& ds, const EnsembleConfig& config, const TreeParams& params,
    std::uint64_t seed,
    const std::function<std::vector<std::int32_t>(int, Rng&)>& sampler,
    BoostDiagnostics* diagnostics) {
  return boost_members(ds, config, params, nullptr, seed, sampler, diagnostics);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::string get_str(std::istream& in) {
  std::uint32_t len = get_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

}  // namespace

void TrainedModel::save(std::ostream& out) const {
  const Impl& m = *impl_;
  out.write(kModelMagic, 4);
  put_u32(out, kModelVersion);
  out.put(static_cast<char>(m.kind));
  put_f64(out, m.costs.cost_fp);
  put_f64(out, m.costs.cost_fn);
  put_u32(out, static_cast<std::uint32_t>(m.schema.size()));
  for (const auto& attr : m.schema) {
    put_str(out, attr.name);
    out.put(static_cast<char>(attr.kind));
    put_u32(out, static_cast<std::uint32_t>(attr.nominal_values.size()));
    for (const auto& v : attr.nominal_values) put_str(out, v);
    out.put(attr.range ? 1 : 0);
    if (attr.range) {
      put_f64(out, attr.range->first);
      put_f64(out, attr.range->second);
    }
  }
  put_u32(out, static_cast<std::uint32_t>(m.trees.size()));
  for (const auto& t : m.trees) t.save(out);
  put_u32(out, static_cast<std::uint32_t>(m.alphas.size()));
  for (double a : m.alphas) put_f64(out, a);
}

TrainedModel TrainedModel::load(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kModelMagic, 4))
    throw Error("not a model blob");
  if (get_u32(in) != kModelVersion) throw Error("unsupported model version");
  auto impl = std::make_shared<Impl>();
  impl->kind = static_cast<Kind>(in.get());
  impl->costs.cost_fp = get_f64(in);
  impl->costs.cost_fn = get_f64(in);
  std::uint32_t n_attrs = get_u32(in);
  impl->schema.resize(n_attrs);
  for (auto& attr : impl->schema) {
    attr.name = get_str(in);
    attr.kind = static_cast<AttrKind>(in.get());
    std::uint32_t n_vals = get_u32(in);
    attr.nominal_values.resize(n_vals);
    for (auto& v : attr.nominal_values) v = get_str(in);
    if (in.get()) {
      double lo = get_f64(in), hi = get_f64(in);
      attr.range = {lo, hi};
    }
  }
  std::uint32_t n_trees = get_u32(in);
  impl->trees.reserve(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) impl->trees.push_back(DecisionTree::load(in));
  std::uint32_t n_alphas = get_u32(in);
  impl->alphas.resize(n_alphas);
  for (auto& a : impl->alphas) a = get_f64(in);
  if (!in) throw Error("truncated model blob");
  return TrainedModel(std::move(impl));
}

}  // namespace rebalance
