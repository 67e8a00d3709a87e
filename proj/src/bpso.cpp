#include "rebalance/bpso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>

#include "rebalance/errors.hpp"
#include "rebalance/evaluation.hpp"

namespace rebalance {

bool ParetoArchive::eps_dominates(const ObjectivePair& a, const ObjectivePair& b,
                                  double epsilon) {
  return a.fitness >= b.fitness && a.integrity >= b.integrity &&
         (a.fitness > b.fitness + epsilon || a.integrity > b.integrity + epsilon);
}

bool ParetoArchive::update(Solution candidate) {
  for (const Solution& e : entries_) {
    if (eps_dominates(e.objectives, candidate.objectives, epsilon_)) return false;
    if (e.objectives.fitness == candidate.objectives.fitness &&
        e.objectives.integrity == candidate.objectives.integrity)
      return false;  // exact duplicate objectives: first occurrence stays
  }
  for (std::size_t i = entries_.size(); i-- > 0;) {
    if (eps_dominates(candidate.objectives, entries_[i].objectives, epsilon_)) {
      entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
      order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  entries_.push_back(std::move(candidate));
  order_.push_back(next_order_++);
  if (cap_ > 0 && entries_.size() > static_cast<std::size_t>(cap_)) enforce_cap();
  return true;
}

void ParetoArchive::enforce_cap() {
  while (entries_.size() > static_cast<std::size_t>(cap_)) {
    std::size_t n = entries_.size();
    std::vector<double> crowding(n, 0.0);
    std::vector<std::size_t> by_fitness(n);
    for (std::size_t i = 0; i < n; ++i) by_fitness[i] = i;
    std::sort(by_fitness.begin(), by_fitness.end(), [&](std::size_t a, std::size_t b) {
      return entries_[a].objectives.fitness < entries_[b].objectives.fitness;
    });
    double span = entries_[by_fitness.back()].objectives.fitness -
                  entries_[by_fitness.front()].objectives.fitness;
    crowding[by_fitness.front()] = crowding[by_fitness.back()] =
        std::numeric_limits<double>::infinity();
    if (span > 0.0) {
      for (std::size_t i = 1; i + 1 < n; ++i)
        crowding[by_fitness[i]] += (entries_[by_fitness[i + 1]].objectives.fitness -
                                    entries_[by_fitness[i - 1]].objectives.fitness) /
                                   span;
    }
    std::vector<std::size_t> by_integrity(n);
    for (std::size_t i = 0; i < n; ++i) by_integrity[i] = i;
    std::sort(by_integrity.begin(), by_integrity.end(), [&](std::size_t a, std::size_t b) {
      return entries_[a].objectives.integrity < entries_[b].objectives.integrity;
    });
    span = entries_[by_integrity.back()].objectives.integrity -
           entries_[by_integrity.front()].objectives.integrity;
    crowding[by_integrity.front()] = crowding[by_integrity.back()] =
        std::numeric_limits<double>::infinity();
    if (span > 0.0) {
      for (std::size_t i = 1; i + 1 < n; ++i)
        crowding[by_integrity[i]] += (entries_[by_integrity[i + 1]].objectives.integrity -
                                      entries_[by_integrity[i - 1]].objectives.integrity) /
                                     span;
    }
    // Evict the most crowded entry; among ties the newest admission leaves.
    std::size_t victim = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (crowding[i] < crowding[victim] ||
          (crowding[i] == crowding[victim] && order_[i] > order_[victim]))
        victim = i;
    }
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

Solution select_final(const ParetoArchive& archive) {
  const auto& entries = archive.entries();
  if (entries.empty()) throw EmptyArchive("no candidate selections recorded");
  std::size_t best = 0;
  auto decision = [](const Solution& s) { return s.report.kappa * s.report.accuracy; };
  for (std::size_t i = 1; i < entries.size(); ++i) {
    double di = decision(entries[i]), db = decision(entries[best]);
    if (di > db) {
      best = i;
    } else if (di == db) {
      if (entries[i].objectives.integrity > entries[best].objectives.integrity) {
        best = i;
      } else if (entries[i].objectives.integrity == entries[best].objectives.integrity &&
                 entries[i].mask.count() < entries[best].mask.count()) {
        best = i;
      }
    }
  }
  return entries[best];
}

std::pair<double, double> pso_step_dim(double v, double x, double pbest, double gbest,
                                       const SwarmConfig& cfg, double r1, double r2) {
  double v_next = cfg.inertia * v + cfg.c1 * r1 * (pbest - x) + cfg.c2 * r2 * (gbest - x);
  v_next = std::clamp(v_next, -cfg.v_max, cfg.v_max);
  double x_next = std::clamp(x + v_next, cfg.pos_lo, cfg.pos_hi);
  return {v_next, x_next};
}

void pso_step(std::span<double> velocity, std::span<double> position,
              std::span<const double> pbest, std::span<const double> gbest,
              const SwarmConfig& cfg, Rng& rng) {
  for (std::size_t d = 0; d < position.size(); ++d) {
    double r1 = rng.uniform01();
    double r2 = rng.uniform01();
    auto [v, x] = pso_step_dim(velocity[d], position[d], pbest[d], gbest[d], cfg, r1, r2);
    velocity[d] = v;
    position[d] = x;
  }
}

namespace {

void repair_all_zero(SelectionMask& mask, std::span<const double> components) {
  for (std::uint8_t b : mask.bits)
    if (b) return;
  std::size_t best = 0;
  for (std::size_t d = 1; d < components.size(); ++d)
    if (components[d] > components[best]) best = d;
  mask.bits[best] = 1;
}

}  // namespace

SelectionMask binarize_round(std::span<const double> position, const SwarmConfig& cfg) {
  SelectionMask mask;
  mask.bits.resize(position.size());
  for (std::size_t d = 0; d < position.size(); ++d) {
    if (position[d] < cfg.pos_lo || position[d] > cfg.pos_hi)
      throw OutOfRange("position component " + std::to_string(d) + " outside the box");
    mask.bits[d] = position[d] >= 0.5 ? 1 : 0;
  }
  repair_all_zero(mask, position);
  return mask;
}

SelectionMask binarize_sigmoid(std::span<const double> velocity, Rng& rng) {
  SelectionMask mask;
  mask.bits.resize(velocity.size());
  for (std::size_t d = 0; d < velocity.size(); ++d) {
    double p = 1.0 / (1.0 + std::exp(-velocity[d]));
    mask.bits[d] = rng.uniform01() <= p ? 1 : 0;
  }
  repair_all_zero(mask, velocity);
  return mask;
}

std::uint64_t mask_eval_seed(std::uint64_t run_seed, const SelectionMask& mask) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::uint8_t b : mask.bits) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return derive_seed(run_seed, seeds::evaluation, h);
}

std::pair<ObjectivePair, MetricReport> evaluate_mask(const SelectionMask& mask,
                                                     const BinaryDataset& ds,
                                                     const ClassPartition& part,
                                                     const LearnerSpec& learner, int inner_folds,
                                                     std::uint64_t run_seed,
                                                     std::uint64_t eval_seed) {
  BinaryDataset subset = assemble_subset(ds, part, mask);
  int k = std::clamp<int>(inner_folds, 2, static_cast<int>(subset.n_rows()));

  // Fold pattern fixed per run; learner randomness varies per evaluation.
  FoldPlan plan = stratified_folds(subset, k, derive_seed(run_seed, seeds::fold_plan));
  std::vector<std::int32_t> train, test;
  std::vector<MetricReport> valid;
  for (int f = 0; f < k; ++f) {
    fold_split(plan, f, train, test);
    auto has_both = [&](const std::vector<std::int32_t>& rows) {
      bool maj = false, mnr = false;
      for (std::int32_t i : rows) {
        (subset.labels[i] == ClassTag::majority ? maj : mnr) = true;
        if (maj && mnr) return true;
      }
      return false;
    };
    if (train.empty() || test.empty() || !has_both(train) || !has_both(test)) continue;
    BinaryDataset train_ds = select_rows(subset, train);
    BinaryDataset test_ds = select_rows(subset, test);
    TrainedModel model = train_model(
        train_ds, learner, derive_seed(eval_seed, seeds::learner, static_cast<std::uint64_t>(f)));
    ConfusionMatrix cm = confusion(model.predict(test_ds), test_ds.labels);
    valid.push_back(full_report(cm, 1, 1, 0.0));
  }

  MetricReport report = mean_report(valid);
  double integrity = part.majority.empty()
                         ? 0.0
                         : static_cast<double>(mask.count()) / static_cast<double>(part.majority.size());
  report.integrity = integrity;
  return {ObjectivePair{report.tpr_x_tnr, integrity}, report};
}

namespace {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  ObjectivePair best_objectives;
  double best_score = -std::numeric_limits<double>::infinity();
};

double guidance_score(const ObjectivePair& o, const SwarmConfig& cfg) {
  if (cfg.mode == SwarmMode::pso_continuous) return o.fitness;
  return o.fitness + cfg.integrity_weight * o.integrity;
}

}  // namespace

SwarmRunResult run_swarm(const BinaryDataset& ds, const LearnerSpec& learner,
                         const SwarmConfig& cfg) {
  if (cfg.population < 1) throw Error("swarm needs at least one particle");
  if (cfg.max_iterations < 0) throw Error("iteration count cannot be negative");
  ClassPartition part = partition_classes(ds);
  if (part.majority.empty() || part.minority.empty())
    throw EmptyClass("swarm selection needs rows of both classes");
  const std::size_t dims = part.majority.size();

  std::vector<Particle> swarm(static_cast<std::size_t>(cfg.population));
  {
    Rng init(derive_seed(cfg.seed, seeds::swarm_init));
    for (auto& p : swarm) {
      p.position.resize(dims);
      p.velocity.resize(dims);
      for (auto& x : p.position) x = init.uniform(cfg.pos_lo, cfg.pos_hi);
      for (auto& v : p.velocity) v = init.uniform(-cfg.v_max, cfg.v_max);
    }
  }
  // Particle 0 carries the identity selection into the initial population.
  std::fill(swarm[0].position.begin(), swarm[0].position.end(), 1.0);

  SwarmRunResult result;
  result.archive = ParetoArchive(cfg.archive_epsilon, cfg.archive_cap);
  bool dual = cfg.mode != SwarmMode::pso_continuous;
  Solution best_single;  // pso_continuous record
  double best_single_score = -std::numeric_limits<double>::infinity();

  std::vector<SelectionMask> masks(swarm.size());
  std::vector<ObjectivePair> objectives(swarm.size());
  std::vector<MetricReport> reports(swarm.size());

  // Score is a pure function of the mask (fold pattern and learner seed both
  // derive from it), so revisited masks are served from a memo.
  std::unordered_map<std::string, std::pair<ObjectivePair, MetricReport>> memo;
  std::mutex memo_mutex;

  auto binarize = [&](const Particle& p, int iteration, int index) {
    if (cfg.mode == SwarmMode::bpso_sigmoid) {
      Rng bit_rng(derive_seed(cfg.seed, seeds::sigmoid, static_cast<std::uint64_t>(iteration),
                              static_cast<std::uint64_t>(index)));
      return binarize_sigmoid(p.velocity, bit_rng);
    }
    return binarize_round(p.position, cfg);
  };

  auto evaluate_all = [&](int iteration) {
    auto evaluate_one = [&](std::size_t i) {
      masks[i] = binarize(swarm[i], iteration, static_cast<int>(i));
      std::string key(masks[i].bits.begin(), masks[i].bits.end());
      {
        std::lock_guard lock(memo_mutex);
        auto it = memo.find(key);
        if (it != memo.end()) {
          objectives[i] = it->second.first;
          reports[i] = it->second.second;
          return;
        }
      }
      auto [obj, rep] = evaluate_mask(masks[i], ds, part, learner, cfg.inner_folds, cfg.seed,
                                      mask_eval_seed(cfg.seed, masks[i]));
      objectives[i] = obj;
      reports[i] = rep;
      std::lock_guard lock(memo_mutex);
      memo.emplace(std::move(key), std::pair{obj, rep});
    };
    if (cfg.threads > 1 && swarm.size() > 1) {
      std::vector<std::thread> workers;
      std::size_t n_workers = std::min<std::size_t>(cfg.threads, swarm.size());
      for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
          for (std::size_t i = w; i < swarm.size(); i += n_workers) evaluate_one(i);
        });
      }
      for (auto& t : workers) t.join();
    } else {
      for (std::size_t i = 0; i < swarm.size(); ++i) evaluate_one(i);
    }
  };

  auto absorb = [&](int iteration) {
    // Updates run in particle order regardless of evaluation scheduling.
    for (std::size_t i = 0; i < swarm.size(); ++i) {
      double score = guidance_score(objectives[i], cfg);
      if (score > swarm[i].best_score) {
        swarm[i].best_score = score;
        swarm[i].best_objectives = objectives[i];
        swarm[i].best_position = swarm[i].position;
      }
      Solution sol{masks[i], objectives[i], reports[i]};
      if (dual) {
        result.archive.update(std::move(sol));
      } else if (objectives[i].fitness > best_single_score) {
        best_single_score = objectives[i].fitness;
        best_single = std::move(sol);
      }
      result.trace.push_back(TraceRecord{iteration, static_cast<int>(i), objectives[i]});
    }
  };

  evaluate_all(0);
  absorb(0);

  auto gbest_index = [&] {
    std::size_t g = 0;
    for (std::size_t i = 1; i < swarm.size(); ++i)
      if (swarm[i].best_score > swarm[g].best_score) g = i;
    return g;
  };

  Rng dynamics(derive_seed(cfg.seed, seeds::dynamics));
  for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
    const std::vector<double> gbest = swarm[gbest_index()].best_position;
    for (auto& p : swarm)
      pso_step(p.velocity, p.position, p.best_position, gbest, cfg, dynamics);
    evaluate_all(iteration);
    absorb(iteration);
  }

  if (dual) {
    result.final = select_final(result.archive);
  } else {
    result.final = best_single;
    result.archive = ParetoArchive(cfg.archive_epsilon, cfg.archive_cap);
    result.archive.update(result.final);
  }
  result.rebalanced = assemble_subset(ds, part, result.final.mask);
  return result;
}

}  // namespace rebalance
