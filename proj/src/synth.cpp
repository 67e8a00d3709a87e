#include "rebalance/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rebalance/errors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {
namespace {

constexpr std::uint64_t kSynthBase = 0xD5;

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Class signal lives in the first two numeric dimensions; every other numeric
// dimension is uniform noise for all rows. The majority class mixes four
// parts: "twins" that shadow a minority row at a fraction of the cluster
// sigma, close enough that a held-out copy of that row resolves to the twin's
// cell rather than to any other cluster row; "deep" halo rows cutting the
// bridge between a cluster row and its nearest neighbour; "far" halo rows
// safely outside any boundary a tree could draw around the cluster; and
// far-off bulk blobs plus uniform scatter. Dropping the twins and deep rows
// makes the cluster exactly learnable; keeping any one of them visibly breaks
// it. Everything else is placed with a deterministic margin so its selection
// bit never affects accuracy.
struct GeneratorParams {
  double sigma_minority = 0.045;  // cluster scale; anchors span +-1.7 of it per dim
  double anchor_span = 3.4;       // per-dim anchor range, in sigma_minority units
  double anchor_gap = 0.9;        // per-dim floor between anchor coordinates
  double pair_lo = 0.30, pair_hi = 0.40;  // pair separation band, in sigma_minority units
  double twin_lo = 0.35, twin_hi = 0.65;  // shadow position along the pair bridge
  double deep_share = 0.0;        // fraction of halo cutting bridges inside the cluster
  double sigma_deep = 0.1;        // jitter around the bridge midpoint, in sigma_minority units
  double far_lo = 4.0, far_hi = 4.6;  // far halo corner band, in units of sigma_minority
  double sigma_bulk = 0.06;
  double scatter_share = 0.05;  // uniform majority scatter, kept off the cluster
  double keep_out = 0.21;       // no scatter closer than this to the center
};

BinaryDataset generate(const SynthShape& shape, const GeneratorParams& gp) {
  Rng rng(derive_seed(kSynthBase, seeds::synth, fnv1a(shape.name)));
  int d = shape.features;
  int numeric_from = shape.nominal_first ? 1 : 0;
  int d_numeric = d - numeric_from;
  if (d_numeric < 2) throw Error("synthetic shapes need at least two numeric features");

  // Truncated normal draws keep every family inside a known envelope, so the
  // gaps between the cluster and the rest of the majority are deterministic,
  // not merely likely.
  auto trunc = [&](double cap) {
    double n;
    do n = rng.normal();
    while (std::abs(n) > cap);
    return n;
  };

  std::array<double, 2> center{}, bulk_a{}, bulk_b{};
  for (int j = 0; j < 2; ++j) {
    center[j] = 0.34 + 0.18 * rng.uniform01();
    bulk_a[j] = std::clamp(center[j] + 0.40 + 0.06 * rng.uniform01(), 0.05, 0.95);
    bulk_b[j] = std::clamp(center[j] + 0.40 + 0.06 * rng.uniform01(), 0.05, 0.95);
  }

  std::vector<std::vector<double>> rows;
  std::vector<ClassTag> labels;
  std::vector<std::array<double, 2>> minority_cores;  // pre-noise informative coords

  // `shadow_of` >= 0 copies that earlier row's nominal and noise coordinates,
  // making the new row a near-duplicate that differs only on the two
  // informative axes.
  auto emit = [&](ClassTag tag, const std::array<double, 2>& informative,
                  std::ptrdiff_t shadow_of = -1) {
    std::vector<double> row(d);
    if (shape.nominal_first)
      row[0] = shadow_of >= 0 ? rows[shadow_of][0] : static_cast<double>(rng.index(3));
    row[numeric_from] = quantize(clip01(informative[0]));
    row[numeric_from + 1] = quantize(clip01(informative[1]));
    for (int j = 2; j < d_numeric; ++j)
      row[numeric_from + j] =
          shadow_of >= 0 ? rows[shadow_of][numeric_from + j] : quantize(rng.uniform01());
    rows.push_back(std::move(row));
    labels.push_back(tag);
  };

  // Cluster rows come in pairs straddling a short gap. Anchor coordinates are
  // laid out per dimension with a guaranteed floor between any two of them
  // (a gapped latin layout), so no two pairs ever crowd each other on either
  // axis alone: single-axis cuts between different pairs always leave room.
  // Dense clusters shrink the floor to fit.
  std::size_t n_pairs = (shape.minority + 1) / 2;
  double span = gp.anchor_span * gp.sigma_minority;
  double gap_floor = gp.anchor_gap * gp.sigma_minority;
  if (n_pairs > 1) gap_floor = std::min(gap_floor, span / static_cast<double>(n_pairs - 1));
  std::vector<std::array<double, 2>> anchors(n_pairs);
  for (int j = 0; j < 2; ++j) {
    double slack = span - gap_floor * static_cast<double>(n_pairs - 1);
    std::vector<double> extra(n_pairs + 1);
    double total = 0.0;
    for (auto& e : extra) total += e = rng.uniform01();
    std::vector<double> coord(n_pairs);
    double v = center[j] - 0.5 * span;
    for (std::size_t k = 0; k < n_pairs; ++k) {
      v += slack * extra[k] / total + (k ? gap_floor : 0.0);
      coord[k] = v;
    }
    std::vector<std::size_t> perm(n_pairs);
    for (std::size_t k = 0; k < n_pairs; ++k) perm[k] = k;
    rng.shuffle(perm);
    for (std::size_t k = 0; k < n_pairs; ++k) anchors[k][j] = coord[perm[k]];
  }
  for (std::size_t k = 0; k < n_pairs; ++k) {
    double gap = (gp.pair_lo + (gp.pair_hi - gp.pair_lo) * rng.uniform01()) * gp.sigma_minority;
    double ang = 6.283185307179586 * rng.uniform01();
    std::array<double, 2> half{0.5 * gap * std::cos(ang), 0.5 * gap * std::sin(ang)};
    std::ptrdiff_t first = -1;
    for (int s : {1, -1}) {
      if (minority_cores.size() == shape.minority) break;  // odd tail: lone anchor row
      std::array<double, 2> p{anchors[k][0] + s * half[0], anchors[k][1] + s * half[1]};
      minority_cores.push_back(p);
      emit(ClassTag::minority, p, first);
      if (first < 0) first = static_cast<std::ptrdiff_t>(rows.size()) - 1;
    }
  }

  // One shadow row per covered cluster row, planted on the bridge toward its
  // pair partner. Either bridge shadow keeps a model from generalizing across
  // the pair, so a single surviving shadow blocks both members.
  // Host order walks first members of each pair before second members: one
  // shadow per pair already blocks both members, so low shadow budgets cover
  // the most ground and higher budgets add per-pair redundancy.
  std::vector<std::size_t> host_order;
  for (std::size_t h = 0; h < minority_cores.size(); h += 2) host_order.push_back(h);
  for (std::size_t h = 1; h < minority_cores.size(); h += 2) host_order.push_back(h);
  for (std::size_t i = 0; i < shape.infiltrators; ++i) {
    std::size_t h = host_order[i % minority_cores.size()];
    std::size_t mate = h ^ 1;
    if (mate >= minority_cores.size()) mate = h > 0 ? h - 1 : h;
    const auto& host = minority_cores[h];
    const auto& other = minority_cores[mate];
    // Exactly on the segment: on every axis the shadow sits between the pair
    // members, so any single-axis cut separating it from one member puts a
    // held-out member on the shadow's side.
    double t = gp.twin_lo + (gp.twin_hi - gp.twin_lo) * rng.uniform01();
    double bx = other[0] - host[0], by = other[1] - host[1];
    emit(ClassTag::majority, {host[0] + t * bx, host[1] + t * by},
         static_cast<std::ptrdiff_t>(h));
  }

  // Deep halo rows sit on the "bridge" between a minority row and its nearest
  // neighbour, starting with the rows no twin covers: a tree generalizes to a
  // held-out cluster row from its neighbours, and a majority row midway cuts
  // that bridge. Without them the cluster rows vouch for each other no matter
  // how many twins are dropped.
  std::size_t n_deep = static_cast<std::size_t>(std::llround(gp.deep_share * shape.shell));
  std::size_t covered = shape.infiltrators % minority_cores.size();
  double sigma_deep = gp.sigma_deep * gp.sigma_minority;
  auto nearest_neighbor = [&](std::size_t h) {
    std::size_t best = h;
    double best_d = 1e300;
    for (std::size_t m = 0; m < minority_cores.size(); ++m) {
      if (m == h) continue;
      double dx = minority_cores[m][0] - minority_cores[h][0];
      double dy = minority_cores[m][1] - minority_cores[h][1];
      double dd = dx * dx + dy * dy;
      if (dd < best_d) { best_d = dd; best = m; }
    }
    return best;
  };
  for (std::size_t i = 0; i < shape.shell; ++i) {
    if (i < n_deep) {
      std::size_t h = (covered + i) % minority_cores.size();
      std::size_t nn = nearest_neighbor(h);
      emit(ClassTag::majority,
           {0.5 * (minority_cores[h][0] + minority_cores[nn][0]) + sigma_deep * trunc(2.0),
            0.5 * (minority_cores[h][1] + minority_cores[nn][1]) + sigma_deep * trunc(2.0)});
    } else {
      // Both coordinates land in a narrow band clear of the cluster, so these
      // rows bound the cluster's empty margin without ever intruding into it:
      // a box grown from the cluster toward the nearest of them still covers
      // every cluster row, and never reaches any of them.
      auto band = [&] {
        double mag = (gp.far_lo + (gp.far_hi - gp.far_lo) * rng.uniform01()) *
                     gp.sigma_minority;
        return rng.uniform01() < 0.5 ? -mag : mag;
      };
      emit(ClassTag::majority, {center[0] + band(), center[1] + band()});
    }
  }

  std::size_t n_bulk = shape.majority - shape.infiltrators - shape.shell;
  for (std::size_t i = 0; i < n_bulk; ++i) {
    std::array<double, 2> p{};
    if (rng.uniform01() < gp.scatter_share) {
      // Scatter keeps clear of the cluster slab on each axis separately: a
      // row whose first coordinate sits inside the cluster's range would cap
      // how far the cluster's cell can grow on that axis no matter how far
      // away the row is on the other one.
      do {
        p = {rng.uniform01(), rng.uniform01()};
      } while (std::abs(p[0] - center[0]) < gp.keep_out ||
               std::abs(p[1] - center[1]) < gp.keep_out);
    } else {
      const auto& b = rng.uniform01() < 0.5 ? bulk_a : bulk_b;
      p = {b[0] + gp.sigma_bulk * trunc(3.0), b[1] + gp.sigma_bulk * trunc(3.0)};
    }
    emit(ClassTag::majority, p);
  }

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  BinaryDataset ds;
  ds.relation = shape.name;
  ds.class_attribute = "Class";
  ds.class_names_declared = {"negative", "positive"};
  ds.majority_name = "negative";
  ds.minority_name = "positive";
  for (int j = 0; j < d; ++j) {
    AttributeSpec attr;
    if (shape.nominal_first && j == 0) {
      attr.name = "Kind";
      attr.kind = AttrKind::nominal;
      attr.nominal_values = {"M", "F", "I"};
    } else {
      attr.name = "f" + std::to_string(j);
      attr.range = {0.0, 1.0};
    }
    ds.attributes.push_back(std::move(attr));
  }
  ds.values.reserve(rows.size() * static_cast<std::size_t>(d));
  ds.labels.reserve(rows.size());
  for (std::size_t i : order) {
    ds.values.insert(ds.values.end(), rows[i].begin(), rows[i].end());
    ds.labels.push_back(labels[i]);
  }
  return ds;
}

}  // namespace

const std::vector<SynthShape>& synth_catalog() {
  static const std::vector<SynthShape> catalog = {
      {"abalone9-18", 689, 42, 8, 64, 40, true},
      {"cleveland-0_vs_4", 164, 13, 13, 20, 14, false},
      {"glass-0-1-4-6_vs_2", 188, 17, 9, 26, 16, false},
      {"haberman", 225, 81, 3, 41, 72, false},
      {"pima", 500, 268, 8, 100, 160, false},
      {"poker-8_vs_6", 1460, 17, 10, 34, 24, false},
      {"poker-9_vs_7", 236, 8, 10, 8, 8, false},
      {"vehicle3", 634, 212, 18, 84, 170, false},
      {"winequality-red-8_vs_6-7", 837, 18, 11, 36, 20, false},
      {"yeast-0-5-6-7-9_vs_4", 477, 51, 8, 60, 45, false},
  };
  return catalog;
}

BinaryDataset make_synthetic(std::string_view name) {
  for (const auto& shape : synth_catalog())
    if (shape.name == name) return generate(shape, GeneratorParams{});
  throw Error("unknown synthetic dataset '" + std::string(name) + "'");
}

BinaryDataset make_sweep_dataset() {
  SynthShape shape{"undersample-sweep", 1000, 12, 4, 24, 30, false};
  return generate(shape, GeneratorParams{});
}

BinaryDataset make_blobs(std::size_t n_majority, std::size_t n_minority, int features,
                         std::uint64_t seed, double separation) {
  Rng rng(derive_seed(kSynthBase, seeds::synth, seed));
  BinaryDataset ds;
  ds.relation = "blobs";
  ds.class_attribute = "Class";
  ds.class_names_declared = {"negative", "positive"};
  ds.majority_name = "negative";
  ds.minority_name = "positive";
  for (int j = 0; j < features; ++j) {
    AttributeSpec attr;
    attr.name = "f" + std::to_string(j);
    ds.attributes.push_back(std::move(attr));
  }
  auto emit = [&](ClassTag tag, double base) {
    for (int j = 0; j < features; ++j)
      ds.values.push_back(quantize(base + 0.08 * rng.normal()));
    ds.labels.push_back(tag);
  };
  for (std::size_t i = 0; i < n_majority; ++i) emit(ClassTag::majority, 0.25);
  for (std::size_t i = 0; i < n_minority; ++i) emit(ClassTag::minority, 0.25 + separation);
  return ds;
}

}  // namespace rebalance
