#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/learners.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

enum class SwarmMode : std::uint8_t {
  bpso_round,     // binarize positions at 0.5
  bpso_sigmoid,   // stochastic bits from sigmoid(velocity)
  pso_continuous  // single-objective guidance, thresholded positions
};

struct SwarmConfig {
  int population = 50;
  int max_iterations = 100;
  double inertia = 0.8;
  double c1 = 2.0;
  double c2 = 2.0;
  double v_max = 1.0;
  double pos_lo = -0.49;
  double pos_hi = 1.49;
  SwarmMode mode = SwarmMode::bpso_round;
  double archive_epsilon = 1e-4;
  int archive_cap = 200;
  int inner_folds = 5;
  double integrity_weight = 0.01;  // guidance tiebreak toward fuller selections
  int threads = 1;
  std::uint64_t seed = 42;
};

struct ObjectivePair {
  double fitness = 0.0;    // mean per-fold TPRxTNR on the candidate subset
  double integrity = 0.0;  // selected / original majority rows
};

struct Solution {
  SelectionMask mask;
  ObjectivePair objectives;
  MetricReport report;  // inner-CV mean for the mask
};

/// Epsilon-slack Pareto frontier, insertion-ordered, crowding-capped.
class ParetoArchive {
 public:
  ParetoArchive() = default;
  ParetoArchive(double epsilon, int cap) : epsilon_(epsilon), cap_(cap) {}

  /// True when `a` beats-or-matches `b` on both objectives and clears the
  /// epsilon slack on at least one.
  static bool eps_dominates(const ObjectivePair& a, const ObjectivePair& b, double epsilon);

  /// Admits the candidate unless an entry eps-dominates it or duplicates its
  /// objectives exactly; admission evicts entries it eps-dominates.
  bool update(Solution candidate);

  const std::vector<Solution>& entries() const { return entries_; }
  double epsilon() const { return epsilon_; }

 private:
  void enforce_cap();
  std::vector<Solution> entries_;
  std::vector<std::uint64_t> order_;  // admission sequence per entry
  double epsilon_ = 1e-4;
  int cap_ = 200;
  std::uint64_t next_order_ = 0;
};

/// Highest kappa * accuracy; ties prefer higher integrity, then fewer selected
/// rows, then earliest admission. Throws EmptyArchive on an empty frontier.
Solution select_final(const ParetoArchive& archive);

/// One velocity/position update for a single dimension; returns {v', x'}
/// after clamping to [-v_max, v_max] and [pos_lo, pos_hi].
std::pair<double, double> pso_step_dim(double v, double x, double pbest, double gbest,
                                       const SwarmConfig& cfg, double r1, double r2);

/// Full-vector update drawing fresh r1, r2 per dimension.
void pso_step(std::span<double> velocity, std::span<double> position,
              std::span<const double> pbest, std::span<const double> gbest,
              const SwarmConfig& cfg, Rng& rng);

/// bit = [x >= 0.5]. Positions must lie inside [pos_lo, pos_hi] (OutOfRange
/// otherwise). An all-zero result is repaired by setting the bit of the
/// largest component (lowest index on ties).
SelectionMask binarize_round(std::span<const double> position, const SwarmConfig& cfg);

/// bit = [u <= sigmoid(v)] with u drawn per dimension; same all-zero repair
/// applied on the velocity vector.
SelectionMask binarize_sigmoid(std::span<const double> velocity, Rng& rng);

/// Seed for evaluating a mask within a run; a pure function of the bits, so a
/// mask always scores identically however the search reaches it.
std::uint64_t mask_eval_seed(std::uint64_t run_seed, const SelectionMask& mask);

/// Inner stratified CV of the masked subset: fitness is the mean per-fold
/// TPRxTNR, integrity the kept-majority fraction. The inner fold pattern
/// derives from run_seed so a mask always scores against the same folds;
/// eval_seed feeds per-fold learner randomness.
std::pair<ObjectivePair, MetricReport> evaluate_mask(const SelectionMask& mask,
                                                     const BinaryDataset& ds,
                                                     const ClassPartition& part,
                                                     const LearnerSpec& learner, int inner_folds,
                                                     std::uint64_t run_seed,
                                                     std::uint64_t eval_seed);

struct TraceRecord {
  int iteration = 0;
  int particle = 0;
  ObjectivePair objectives;
};

struct SwarmRunResult {
  ParetoArchive archive;   // single best-so-far entry in pso_continuous mode
  Solution final;
  BinaryDataset rebalanced;
  std::vector<TraceRecord> trace;
};

/// Swarm search over majority-row selection masks wrapped around `learner`.
/// Particle 0 starts at the all-ones mask. bpso modes keep the dual-objective
/// archive and pick the final mask by kappa * accuracy; pso_continuous keeps
/// a single best-fitness record.
SwarmRunResult run_swarm(const BinaryDataset& ds, const LearnerSpec& learner,
                         const SwarmConfig& cfg);

}  // namespace rebalance
