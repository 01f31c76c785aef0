#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fog/checkpoint.hpp"
#include "fog/model.hpp"
#include "fog/record.hpp"

namespace fog::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

/// Threshold-based metrics.  Each ratio is absent when its denominator is
/// zero rather than being forced to 0: accuracy needs a non-empty sample,
/// precision needs a positive prediction, recall a positive label,
/// specificity a negative label, and F1 defined precision and recall with a
/// non-zero sum.
struct ThresholdMetrics {
  ConfusionCounts counts;
  std::optional<double> accuracy, precision, recall, specificity, f1;
};

/// Counts over masked-in elements; a prediction is positive when
/// conf >= threshold.  Throws MetricError{LengthMismatch} when span lengths
/// differ.
ThresholdMetrics confusion_metrics(std::span<const double> conf,
                                   std::span<const std::uint8_t> labels,
                                   std::span<const std::uint8_t> mask, double threshold);

/// Average precision over masked-in elements: elements ranked by confidence
/// descending, ties broken by original index ascending; AP is the mean of
/// precision-at-k over the positive ranks.  Returns nullopt when no positive
/// survives the mask (AP is undefined, not zero).
std::optional<double> average_precision(std::span<const double> conf,
                                        std::span<const std::uint8_t> labels,
                                        std::span<const std::uint8_t> mask);

struct MapResult {
  double value = 0.0;
  int defined_classes = 0;
  int skipped_classes = 0;
};

/// Mean over the defined per-class APs; skipped classes are excluded from the
/// mean entirely.  Throws MetricError{AllUndefined} when every class is
/// undefined.
MapResult mean_average_precision(const std::array<std::optional<double>, 3>& per_class);

/// Pooled patch-level ground truth and confidences for a record set.
/// The mask is shared by all three classes.
struct PatchScores {
  std::array<std::vector<double>, 3> conf;
  std::array<std::vector<std::uint8_t>, 3> labels;
  std::vector<std::uint8_t> mask;
};

struct MetricsReport {
  std::array<std::optional<double>, 3> ap;  // indexed by EventClass
  double map = 0.0;
  int map_defined_classes = 0;
  int map_skipped_classes = 0;
  double threshold = 0.5;
  ThresholdMetrics pooled;                    // all classes pooled
  std::array<ThresholdMetrics, 3> per_class;  // indexed by EventClass
  std::optional<double> macro_precision, macro_recall, macro_f1;  // mean of defined per-class
  std::int64_t masked_patches = 0;  // patches passing the mask, per class
};

/// Pure scoring of already-collected patch confidences.
MetricsReport score(const PatchScores& scores, double threshold);

/// Runs the model over one record and stitches per-block outputs back to the
/// record's patch grid: normalize, pad, non-overlapping blocks
/// (stride = block_size), eval-mode forward, stitch.  Returns
/// [total_patches x 3] confidences covering the padded length.
nn::Tensor infer_record(const TimeSeriesRecord& rec, const model::ModelParams& params,
                        const model::ModelConfig& cfg);

/// infer_record over a record set, pooling confidences with the matching
/// patch-level targets and masks.  `threads` > 1 distributes records across
/// worker threads; results are merged in record order, so the output is
/// identical for any thread count.
PatchScores collect_scores(std::span<const TimeSeriesRecord> records,
                           const model::ModelParams& params, const model::ModelConfig& cfg,
                           int threads = 1);

/// collect_scores + score.
MetricsReport evaluate(std::span<const TimeSeriesRecord> records,
                       const model::ModelParams& params, const model::ModelConfig& cfg,
                       double threshold = 0.5, int threads = 1);

/// Machine-readable `key = value` lines.
std::string report_kv(const MetricsReport& report);

/// Human-readable summary table.
std::string report_table(const MetricsReport& report);

}  // namespace fog::metrics
