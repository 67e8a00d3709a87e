#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

/// Counts keyed by the majority-as-positive convention: TP = majority rows
/// predicted majority, TN = minority rows predicted minority.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;

  std::int64_t positives() const { return tp + fn; }   // actual majority
  std::int64_t negatives() const { return tn + fp; }   // actual minority
  std::int64_t total() const { return tp + fn + fp + tn; }
};

struct MetricReport {
  double kappa = 0.0;
  double accuracy = 0.0;
  double ber = 0.0;
  double mcc = 0.0;
  double gmean = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double tpr_x_tnr = 0.0;
  double integrity = 1.0;
  double elapsed_seconds = 0.0;
};

ConfusionMatrix confusion(std::span<const ClassTag> predicted,
                          std::span<const ClassTag> actual);

double accuracy(const ConfusionMatrix& cm);   // throws EmptyMatrix on zero total
double true_positive_rate(const ConfusionMatrix& cm);  // throws EmptyClass when P == 0
double true_negative_rate(const ConfusionMatrix& cm);  // throws EmptyClass when N == 0

/// Degenerate denominators collapse to 0 (kappa, mcc, precision, f1, gmean)
/// or 0.5 (ber when one class is absent contributes its rate as 0).
double cohen_kappa(const ConfusionMatrix& cm);
double matthews_corr(const ConfusionMatrix& cm);

/// Fills every field from the matrix; integrity = selected/original and the
/// elapsed time are passed through.
MetricReport full_report(const ConfusionMatrix& cm, std::size_t selected_majority,
                         std::size_t original_majority, double elapsed_seconds);

/// Field-wise mean / sample standard deviation (n-1 denominator; 0 for n < 2).
MetricReport mean_report(std::span<const MetricReport> reports);
MetricReport stddev_report(std::span<const MetricReport> reports);

}  // namespace rebalance
