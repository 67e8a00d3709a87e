#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

/// Shape card for one generated benchmark dataset.
struct SynthShape {
  std::string name;
  std::size_t majority = 0;
  std::size_t minority = 0;
  int features = 0;
  std::size_t infiltrators = 0;  // majority rows drawn from the minority cluster
  std::size_t shell = 0;         // majority rows ringing the cluster boundary
  bool nominal_first = false;
};

/// The ten benchmark shapes, ordered by name.
const std::vector<SynthShape>& synth_catalog();

/// Deterministic synthetic dataset for a catalog name. The majority class is
/// a far bulk plus a boundary shell plus infiltrators sampled from the
/// minority cluster itself; undersampling search can separate the classes by
/// dropping the infiltrators, while the full data keeps plain trees biased
/// toward the majority. Throws Error for unknown names.
BinaryDataset make_synthetic(std::string_view name);

/// High-imbalance dataset (1000 majority / 12 minority) sized so the sweep
/// grid's keep-counts are exact thousandths.
BinaryDataset make_sweep_dataset();

/// Small separable two-cluster helper for tests.
BinaryDataset make_blobs(std::size_t n_majority, std::size_t n_minority, int features,
                         std::uint64_t seed, double separation = 0.5);

}  // namespace rebalance
