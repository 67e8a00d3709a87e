#include "rebalance/metrics.hpp"

#include <cmath>

#include "rebalance/errors.hpp"

namespace rebalance {
namespace {

double ratio_or_zero(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

ConfusionMatrix confusion(std::span<const ClassTag> predicted,
                          std::span<const ClassTag> actual) {
  if (predicted.size() != actual.size())
    throw LengthMismatch("predicted " + std::to_string(predicted.size()) + " labels, actual " +
                         std::to_string(actual.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == ClassTag::majority) {
      (predicted[i] == ClassTag::majority ? cm.tp : cm.fn)++;
    } else {
      (predicted[i] == ClassTag::minority ? cm.tn : cm.fp)++;
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyMatrix("confusion matrix has no observations");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double true_positive_rate(const ConfusionMatrix& cm) {
  if (cm.positives() == 0) throw EmptyClass("no positive-class observations");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
}

double true_negative_rate(const ConfusionMatrix& cm) {
  if (cm.negatives() == 0) throw EmptyClass("no negative-class observations");
  return static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
}

double cohen_kappa(const ConfusionMatrix& cm) {
  double n = static_cast<double>(cm.total());
  if (n == 0.0) return 0.0;
  double po = static_cast<double>(cm.tp + cm.tn) / n;
  double pe = (static_cast<double>(cm.tp + cm.fp) * static_cast<double>(cm.tp + cm.fn) +
               static_cast<double>(cm.tn + cm.fn) * static_cast<double>(cm.tn + cm.fp)) /
              (n * n);
  if (pe == 1.0) return 0.0;
  return (po - pe) / (1.0 - pe);
}

double matthews_corr(const ConfusionMatrix& cm) {
  double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

MetricReport full_report(const ConfusionMatrix& cm, std::size_t selected_majority,
                         std::size_t original_majority, double elapsed_seconds) {
  MetricReport r;
  r.kappa = cohen_kappa(cm);
  r.accuracy = cm.total() == 0 ? 0.0 : accuracy(cm);
  r.mcc = matthews_corr(cm);
  r.tpr = ratio_or_zero(static_cast<double>(cm.tp), static_cast<double>(cm.positives()));
  r.tnr = ratio_or_zero(static_cast<double>(cm.tn), static_cast<double>(cm.negatives()));
  r.ber = 1.0 - (r.tpr + r.tnr) / 2.0;
  r.gmean = std::sqrt(r.tpr * r.tnr);
  r.precision = ratio_or_zero(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  r.recall = r.tpr;
  r.f1 = ratio_or_zero(2.0 * static_cast<double>(cm.tp),
                       static_cast<double>(2 * cm.tp + cm.fp + cm.fn));
  r.tpr_x_tnr = r.tpr * r.tnr;
  r.integrity = original_majority == 0
                    ? 0.0
                    : static_cast<double>(selected_majority) / static_cast<double>(original_majority);
  r.elapsed_seconds = elapsed_seconds;
  return r;
}

namespace {

template <class Get>
double field_mean(std::span<const MetricReport> reports, Get get) {
  if (reports.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : reports) sum += get(r);
  return sum / static_cast<double>(reports.size());
}

template <class Get>
double field_stddev(std::span<const MetricReport> reports, Get get) {
  if (reports.size() < 2) return 0.0;
  double mean = field_mean(reports, get);
  double ss = 0.0;
  for (const auto& r : reports) {
    double d = get(r) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(reports.size() - 1));
}

template <class Fold>
MetricReport apply_fieldwise(std::span<const MetricReport> reports, Fold fold) {
  MetricReport out;
  out.kappa = fold(reports, [](const MetricReport& r) { return r.kappa; });
  out.accuracy = fold(reports, [](const MetricReport& r) { return r.accuracy; });
  out.ber = fold(reports, [](const MetricReport& r) { return r.ber; });
  out.mcc = fold(reports, [](const MetricReport& r) { return r.mcc; });
  out.gmean = fold(reports, [](const MetricReport& r) { return r.gmean; });
  out.precision = fold(reports, [](const MetricReport& r) { return r.precision; });
  out.recall = fold(reports, [](const MetricReport& r) { return r.recall; });
  out.f1 = fold(reports, [](const MetricReport& r) { return r.f1; });
  out.tpr = fold(reports, [](const MetricReport& r) { return r.tpr; });
  out.tnr = fold(reports, [](const MetricReport& r) { return r.tnr; });
  out.tpr_x_tnr = fold(reports, [](const MetricReport& r) { return r.tpr_x_tnr; });
  out.integrity = fold(reports, [](const MetricReport& r) { return r.integrity; });
  out.elapsed_seconds = fold(reports, [](const MetricReport& r) { return r.elapsed_seconds; });
  return out;
}

}  // namespace

MetricReport mean_report(std::span<const MetricReport> reports) {
  return apply_fieldwise(reports, [](auto rs, auto get) { return field_mean(rs, get); });
}

MetricReport stddev_report(std::span<const MetricReport> reports) {
  return apply_fieldwise(reports, [](auto rs, auto get) { return field_stddev(rs, get); });
}

}  // namespace rebalance
