#include "fog/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fog/errors.hpp"
#include "fog/preprocess.hpp"
#include "fog/textio.hpp"

namespace fog::train {

nn::NodeId masked_bce_loss(nn::Tape& t, nn::NodeId pred, const nn::Tensor& target,
                           const nn::Tensor& mask, double loss_eps, double mask_floor) {
  const nn::Tensor& pv = t.value(pred);
  if (!pv.same_shape(target))
    throw ShapeError("masked_bce_loss target shape " + nn::shape_str(target.shape()) +
                     " does not match predictions " + nn::shape_str(pv.shape()));
  if (pv.shape().back() != kNumEventClasses)
    throw ShapeError("masked_bce_loss expects " + std::to_string(kNumEventClasses) +
                     " classes in the last axis, got " + nn::shape_str(pv.shape()));
  std::vector<int> lead(pv.shape().begin(), pv.shape().end() - 1);
  if (mask.shape() != lead)
    throw ShapeError("masked_bce_loss mask shape " + nn::shape_str(mask.shape()) +
                     " does not match prediction leading axes " + nn::shape_str(pv.shape()));

  // Tile the mask across the class axis.
  nn::Tensor tiled(pv.shape());
  double mask_sum = 0.0;
  for (std::int64_t i = 0; i < tiled.size(); ++i) {
    const double mv = mask[i / kNumEventClasses];
    tiled[i] = mv;
    mask_sum += mv;
  }
  if (mask_sum <= mask_floor)
    throw TrainError(TrainErrorKind::ZeroMask,
                     "mask sum " + format_double(mask_sum) + " is at or below the floor " +
                         format_double(mask_floor) + "; nothing to train on");

  const nn::NodeId elementwise = nn::bce(t, pred, target, loss_eps);
  const nn::NodeId masked = nn::cmul(t, elementwise, tiled);
  return nn::scale(t, nn::sum(t, masked), 1.0 / mask_sum);
}

double lr_schedule(std::int64_t step, int warmup_steps, double peak_lr) {
  if (warmup_steps <= 0) return peak_lr;
  const double ramp = static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  return peak_lr * std::min(1.0, ramp);
}

void adam_step(std::span<nn::Tensor* const> params, std::span<const nn::Tensor* const> grads,
               std::span<const std::string> names, OptimizerState& state) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step parameter/gradient counts differ: " +
                     std::to_string(params.size()) + " vs " + std::to_string(grads.size()));
  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const nn::Tensor* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size())
    throw ShapeError("adam_step parameter count changed mid-run");

  const double lr = lr_schedule(state.step, state.warmup_steps, state.peak_lr);
  const double b1 = state.beta1, b2 = state.beta2;
  // bias correction uses the 1-based update count
  const double t1 = static_cast<double>(state.step + 1);
  const double bc1 = 1.0 - std::pow(b1, t1);
  const double bc2 = 1.0 - std::pow(b2, t1);

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    nn::Tensor& p = *params[pi];
    const nn::Tensor& g = *grads[pi];
    if (!p.same_shape(g))
      throw ShapeError("adam_step gradient shape mismatch at parameter " + std::to_string(pi));
    nn::Tensor& m = state.m[pi];
    nn::Tensor& v = state.v[pi];
    for (std::int64_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      if (!std::isfinite(gi)) {
        const std::string name =
            pi < names.size() ? names[pi] : "parameter " + std::to_string(pi);
        throw TrainError(TrainErrorKind::NonFiniteGradient,
                         "non-finite gradient in " + name + " at element " + std::to_string(i));
      }
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
  ++state.step;
}

void adam_step(model::ModelParams& params, const model::ModelParams& grads,
               OptimizerState& state) {
  auto pf = model::flatten(params);
  auto gf = model::flatten(grads);
  std::vector<nn::Tensor*> ps;
  std::vector<const nn::Tensor*> gs;
  std::vector<std::string> names;
  ps.reserve(pf.size());
  gs.reserve(gf.size());
  names.reserve(pf.size());
  for (auto& [name, tensor] : pf) {
    names.push_back(name);
    ps.push_back(tensor);
  }
  for (auto& [name, tensor] : gf) gs.push_back(tensor);
  adam_step(ps, gs, names, state);
}

void TrainRunConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (batch_size < 1) fail("train.batch_size must be >= 1");
  if (steps_per_epoch < 1) fail("train.steps_per_epoch must be >= 1");
  if (epochs < 1) fail("train.epochs must be >= 1");
  if (block_stride < 0) fail("train.block_stride must be >= 0 (0 selects block_size/2)");
  if (!(peak_lr > 0.0)) fail("train.peak_lr must be positive");
  if (warmup_steps < 0) fail("train.warmup_steps must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("train.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("train.beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("train.adam_eps must be positive");
  if (!(loss_eps > 0.0 && loss_eps < 0.5)) fail("train.loss_eps must lie in (0, 0.5)");
  if (!(mask_floor >= 0.0)) fail("train.mask_floor must be >= 0");
  if (!(eval_threshold >= 0.0 && eval_threshold <= 1.0))
    fail("train.eval_threshold must lie in [0, 1]");
}

namespace {

/// Batched targets [B x P x 3] and mask [B x P] for the chosen blocks.
void batch_tensors(const std::vector<preprocess::Block>& blocks,
                   const std::vector<std::size_t>& chosen, nn::Tensor& targets,
                   nn::Tensor& mask) {
  const int b = static_cast<int>(chosen.size());
  const int p = blocks[chosen[0]].targets.dim(0);
  targets = nn::Tensor({b, p, kNumEventClasses});
  mask = nn::Tensor({b, p});
  for (int bi = 0; bi < b; ++bi) {
    const auto& blk = blocks[chosen[static_cast<std::size_t>(bi)]];
    for (int pi = 0; pi < p; ++pi) {
      mask[static_cast<std::int64_t>(bi) * p + pi] = blk.mask[pi];
      for (int c = 0; c < kNumEventClasses; ++c)
        targets[(static_cast<std::int64_t>(bi) * p + pi) * kNumEventClasses + c] =
            blk.targets.at(pi, c);
    }
  }
}

}  // namespace

TrainResult train(std::span<const TimeSeriesRecord> records, const model::ModelConfig& model_cfg,
                  const TrainRunConfig& run_cfg, bool progress) {
  model_cfg.validate();
  run_cfg.validate();
  if (records.empty())
    throw TrainError(TrainErrorKind::EmptyDataset, "training requires at least one record");
  for (const auto& r : records)
    if (r.kind != records.front().kind)
      throw TrainError(TrainErrorKind::MixedDatasetKind,
                       "records mix dataset kinds: " + records.front().id + " is " +
                           kind_name(records.front().kind) + " but " + r.id + " is " +
                           kind_name(r.kind));

  // Deterministic split: order by id, last floor(n/5) records validate.
  std::vector<const TimeSeriesRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const TimeSeriesRecord* a, const TimeSeriesRecord* b) { return a->id < b->id; });
  const std::size_t n_val = ordered.size() / 5;
  const std::size_t n_train = ordered.size() - n_val;

  TrainResult result;
  std::vector<TimeSeriesRecord> val_records;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i < n_train)
      result.train_ids.push_back(ordered[i]->id);
    else {
      result.val_ids.push_back(ordered[i]->id);
      val_records.push_back(*ordered[i]);
    }
  }

  // Training blocks from overlapping windows.
  const int stride = run_cfg.block_stride == 0 ? std::max(1, model_cfg.block_size / 2)
                                               : run_cfg.block_stride;
  std::vector<preprocess::Block> blocks;
  for (std::size_t i = 0; i < n_train; ++i) {
    auto [norm, stats] = preprocess::normalize(*ordered[i]);
    const auto padded = preprocess::pad_series(norm, model_cfg.block_size);
    auto recblocks =
        preprocess::extract_blocks(padded, model_cfg.block_size, stride, model_cfg.patch_size);
    for (auto& b : recblocks) blocks.push_back(std::move(b));
  }
  if (blocks.empty())
    throw TrainError(TrainErrorKind::EmptyDataset, "no training blocks after the split");

  Rng root(run_cfg.seed);
  result.params = model::init_params(model_cfg, root.fork(0).next_u64());
  Rng shuffle_rng = root.fork(1);
  Rng dropout_rng = root.fork(2);

  OptimizerState opt;
  opt.beta1 = run_cfg.beta1;
  opt.beta2 = run_cfg.beta2;
  opt.eps = run_cfg.adam_eps;
  opt.peak_lr = run_cfg.peak_lr;
  opt.warmup_steps = run_cfg.warmup_steps;

  // Shuffled index queue; reshuffles whenever exhausted.
  std::vector<std::size_t> queue(blocks.size());
  std::iota(queue.begin(), queue.end(), 0u);
  std::size_t queue_pos = queue.size();  // force an initial shuffle

  std::int64_t global_step = 0;
  for (int epoch = 0; epoch < run_cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int s = 0; s < run_cfg.steps_per_epoch; ++s) {
      std::vector<std::size_t> chosen;
      chosen.reserve(static_cast<std::size_t>(run_cfg.batch_size));
      for (int bi = 0; bi < run_cfg.batch_size; ++bi) {
        if (queue_pos >= queue.size()) {
          shuffle_rng.shuffle(queue.data(), queue.size());
          queue_pos = 0;
        }
        chosen.push_back(queue[queue_pos++]);
      }

      nn::Tape tape;
      const model::ParamNodes nodes = model::bind_params(tape, result.params);
      std::vector<nn::NodeId> preds;
      preds.reserve(chosen.size());
      const int p = model_cfg.num_patches();
      for (std::size_t ci : chosen) {
        const nn::NodeId out =
            model::forward(tape, blocks[ci], nodes, model_cfg, dropout_rng, /*train_mode=*/true);
        preds.push_back(nn::reshape(tape, out, {1, p, kNumEventClasses}));
      }
      const nn::NodeId stacked =
          preds.size() == 1 ? preds[0] : nn::concat(tape, preds, /*axis=*/0);

      nn::Tensor targets, mask;
      batch_tensors(blocks, chosen, targets, mask);
      double loss = 0.0;
      try {
        const nn::NodeId loss_node = masked_bce_loss(tape, stacked, targets, mask,
                                                     run_cfg.loss_eps, run_cfg.mask_floor);
        loss = tape.value(loss_node).item();
        tape.backward(loss_node);
        const model::ModelParams grads = model::extract_grads(tape, nodes);
        adam_step(result.params, grads, opt);
      } catch (const TrainError& e) {
        throw TrainError(e.kind(),
                         std::string(e.what()) + " (step " + std::to_string(global_step) + ")");
      }

      result.history.steps.push_back(
          {global_step, epoch, lr_schedule(global_step, run_cfg.warmup_steps, run_cfg.peak_lr),
           loss});
      loss_sum += loss;
      ++global_step;
    }

    EpochRecord er;
    er.epoch = epoch;
    er.mean_loss = loss_sum / run_cfg.steps_per_epoch;
    if (!val_records.empty())
      er.val = metrics::evaluate(val_records, result.params, model_cfg, run_cfg.eval_threshold);
    result.history.epochs.push_back(er);
    if (progress) {
      if (er.val)
        std::fprintf(stderr, "epoch %d/%d: mean loss %.6f, val mAP %.4f\n", epoch + 1,
                     run_cfg.epochs, er.mean_loss, er.val->map);
      else
        std::fprintf(stderr, "epoch %d/%d: mean loss %.6f\n", epoch + 1, run_cfg.epochs,
                     er.mean_loss);
    }
  }
  return result;
}

std::string history_csv(const TrainHistory& h) {
  std::string out = "step,epoch,lr,loss\n";
  for (const auto& s : h.steps) {
    out += format_int(s.step) + ',' + format_int(s.epoch) + ',' + format_double(s.lr) + ',' +
           format_double(s.loss) + '\n';
  }
  return out;
}

std::string epoch_csv(const TrainHistory& h) {
  std::string out = "epoch,mean_loss,val_map,val_pooled_f1\n";
  for (const auto& e : h.epochs) {
    out += format_int(e.epoch) + ',' + format_double(e.mean_loss) + ',';
    if (e.val) {
      out += format_double(e.val->map);
      out += ',';
      if (e.val->pooled.f1) out += format_double(*e.val->pooled.f1);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

}  // namespace fog::train
