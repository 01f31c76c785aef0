#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fog/metrics.hpp"
#include "fog/model.hpp"
#include "fog/record.hpp"
#include "fog/tape.hpp"

namespace fog::train {

/// Mean binary cross-entropy over the masked-in prediction elements.
///
/// `pred` holds confidences [B x P x C] (or [P x C]); `target` matches its
/// shape; `mask` matches the leading shape [B x P] (or [P]) and is tiled
/// across the class axis.  Loss = sum(BCE * tiled_mask) / sum(tiled_mask).
/// Because masking is a constant multiply, gradients at masked-out elements
/// are exactly zero.  Throws TrainError{ZeroMask} when sum(tiled_mask) is at
/// or below `mask_floor`.
nn::NodeId masked_bce_loss(nn::Tape& t, nn::NodeId pred, const nn::Tensor& target,
                           const nn::Tensor& mask, double loss_eps = 1e-7,
                           double mask_floor = 1e-6);

/// Linear warm-up: peak_lr * min(1, (step + 1) / warmup_steps), with step
/// counted from 0.  warmup_steps <= 0 means no warm-up.
double lr_schedule(std::int64_t step, int warmup_steps, double peak_lr);

/// Adam optimizer state; `m`/`v` align with the parameter list passed to
/// adam_step and are created lazily on the first step.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<nn::Tensor> m, v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double peak_lr = 1e-3;
  int warmup_steps = 100;
};

/// One bias-corrected Adam update with the scheduled learning rate.
/// `names` (parallel to `params`, may be empty) labels parameters in the
/// TrainError{NonFiniteGradient} raised when a gradient element is NaN/inf.
void adam_step(std::span<nn::Tensor* const> params, std::span<const nn::Tensor* const> grads,
               std::span<const std::string> names, OptimizerState& state);

/// Convenience overload for whole model parameter sets.
void adam_step(model::ModelParams& params, const model::ModelParams& grads,
               OptimizerState& state);

struct TrainRunConfig {
  int batch_size = 16;
  int steps_per_epoch = 100;
  int epochs = 3;
  std::uint64_t seed = 1;
  int block_stride = 0;  // sample stride between training windows; 0 = block_size / 2
  double peak_lr = 1e-3;
  int warmup_steps = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double loss_eps = 1e-7;
  double mask_floor = 1e-6;
  double eval_threshold = 0.5;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct StepRecord {
  std::int64_t step = 0;  // global step index, from 0
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<metrics::MetricsReport> val;  // absent when there is no validation split
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  model::ModelParams params;
  TrainHistory history;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Full training run.
///
/// Records are ordered by id; the last floor(n/5) become the validation
/// split (none when n < 5).  Training blocks come from overlapping windows
/// at `block_stride`; batches draw block indices from a seeded
/// shuffle-with-reshuffle-on-exhaustion queue.  Each step: eval of the batch
/// graph with dropout on, masked BCE, backward, Adam with warm-up.
/// Validation metrics are computed after every epoch.
///
/// Identical inputs and config produce bitwise-identical results.
///
/// Throws TrainError{EmptyDataset} for an empty record span,
/// TrainError{MixedDatasetKind} when records disagree on kind, and annotates
/// propagated ZeroMask / NonFiniteGradient errors with the failing step.
/// `progress`, when true, prints one line per epoch to stderr.
TrainResult train(std::span<const TimeSeriesRecord> records, const model::ModelConfig& model_cfg,
                  const TrainRunConfig& run_cfg, bool progress = false);

/// CSV with header `step,epoch,lr,loss`, one row per step.
std::string history_csv(const TrainHistory& h);

/// CSV with header `epoch,mean_loss,val_map,val_pooled_f1`, one row per
/// epoch; validation columns empty when there was no split.
std::string epoch_csv(const TrainHistory& h);

}  // namespace fog::train
