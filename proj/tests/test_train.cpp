#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fog/errors.hpp"
#include "fog/model.hpp"
#include "fog/rng.hpp"
#include "fog/synth.hpp"
#include "fog/tape.hpp"
#include "fog/train.hpp"
#include "oracles.hpp"

using fog::Rng;
using fog::TimeSeriesRecord;
using fog::TrainError;
using fog::TrainErrorKind;
using fog::nn::NodeId;
using fog::nn::Tape;
using fog::nn::Tensor;
namespace train = fog::train;
namespace model = fog::model;

namespace {

double bce_elem(double p, double t) { return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p)); }

model::ModelConfig smoke_model_config() {
  model::ModelConfig cfg;
  cfg.block_size = 64;
  cfg.patch_size = 8;
  cfg.model_dim = 8;
  cfg.num_heads = 2;
  cfg.num_encoder_layers = 1;
  cfg.ffn_dim = 16;
  cfg.lstm_hidden = 4;
  cfg.first_dropout = 0.1;
  cfg.encoder_dropout = 0.1;
  cfg.mha_dropout = 0.1;
  return cfg;
}

std::vector<TimeSeriesRecord> smoke_records(int n, fog::DatasetKind kind) {
  fog::synth::SynthConfig scfg;
  scfg.kind = kind;
  scfg.duration_s = 8.0;
  scfg.mean_gap_s = 2.0;
  std::vector<TimeSeriesRecord> out;
  for (int i = 0; i < n; ++i) {
    scfg.seed = 100 + static_cast<std::uint64_t>(i);
    out.push_back(fog::synth::generate_series(scfg, std::string(1, static_cast<char>('a' + i))));
  }
  return out;
}

}  // namespace

TEST_CASE("masked BCE matches the hand formula") {
  Tape t;
  const NodeId pred = t.leaf(Tensor({1, 3}, {0.5, 0.8, 0.2}));
  const Tensor target({1, 3}, {1.0, 1.0, 0.0});
  const Tensor mask({1}, {1.0});
  const NodeId loss = train::masked_bce_loss(t, pred, target, mask);
  const double expected = (bce_elem(0.5, 1) + bce_elem(0.8, 1) + bce_elem(0.2, 0)) / 3.0;
  CHECK(std::abs(t.value(loss).item() - expected) < 1e-12);
}

TEST_CASE("masked BCE normalises by the tiled mask sum") {
  Tape t;
  // two patches, second masked out
  const NodeId pred = t.leaf(Tensor({2, 3}, {0.5, 0.8, 0.2, 0.9, 0.1, 0.6}));
  const Tensor target({2, 3}, {1, 1, 0, 0, 0, 1});
  const Tensor mask({2}, {1.0, 0.0});
  const NodeId loss = train::masked_bce_loss(t, pred, target, mask);
  // only the first patch contributes; mask sum is 3
  const double expected = (bce_elem(0.5, 1) + bce_elem(0.8, 1) + bce_elem(0.2, 0)) / 3.0;
  CHECK(std::abs(t.value(loss).item() - expected) < 1e-12);
}

TEST_CASE("masked-out values never touch the loss or gradients") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int b = 1 + static_cast<int>(rng.bounded(3));
    const int p = 1 + static_cast<int>(rng.bounded(5));
    Tensor mask({b, p});
    bool any = false;
    for (std::int64_t i = 0; i < mask.size(); ++i) {
      mask[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
      any = any || mask[i] == 1.0;
    }
    if (!any) mask[0] = 1.0;

    Tensor pred_a({b, p, 3}), target_a({b, p, 3});
    for (std::int64_t i = 0; i < pred_a.size(); ++i) {
      pred_a[i] = rng.uniform(0.05, 0.95);
      target_a[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    // variant b: scramble every masked-out element of pred and target
    Tensor pred_b = pred_a, target_b = target_a;
    for (std::int64_t i = 0; i < pred_b.size(); ++i) {
      if (mask[i / 3] == 0.0) {
        pred_b[i] = rng.uniform(0.05, 0.95);
        target_b[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
      }
    }

    Tape ta;
    const NodeId pa = ta.leaf(pred_a);
    const NodeId la = train::masked_bce_loss(ta, pa, target_a, mask);
    ta.backward(la);

    Tape tb;
    const NodeId pb = tb.leaf(pred_b);
    const NodeId lb = train::masked_bce_loss(tb, pb, target_b, mask);
    tb.backward(lb);

    // bitwise-identical loss, identical unmasked gradients, exact zeros elsewhere
    CHECK(ta.value(la).item() == tb.value(lb).item());
    const Tensor& ga = ta.grad(pa);
    const Tensor& gb = tb.grad(pb);
    for (std::int64_t i = 0; i < ga.size(); ++i) {
      if (mask[i / 3] == 0.0) {
        CHECK(ga[i] == 0.0);
        CHECK(gb[i] == 0.0);
      } else {
        CHECK(ga[i] == gb[i]);
      }
    }
  }
}

TEST_CASE("an all-masked batch raises ZeroMask") {
  Tape t;
  const NodeId pred = t.leaf(Tensor({2, 3}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}));
  const Tensor target({2, 3});
  SUBCASE("exact zeros") {
    try {
      train::masked_bce_loss(t, pred, target, Tensor({2}, {0.0, 0.0}));
      FAIL_CHECK("expected TrainError");
    } catch (const TrainError& e) {
      CHECK(e.kind() == TrainErrorKind::ZeroMask);
    }
  }
  SUBCASE("below the configured floor") {
    try {
      train::masked_bce_loss(t, pred, target, Tensor({2}, {1e-7, 1e-7}), 1e-7, 1e-6);
      FAIL_CHECK("expected TrainError");
    } catch (const TrainError& e) {
      CHECK(e.kind() == TrainErrorKind::ZeroMask);
    }
  }
  SUBCASE("just above the floor is fine") {
    CHECK_NOTHROW(train::masked_bce_loss(t, pred, target, Tensor({2}, {1.0, 0.0}), 1e-7, 1e-6));
  }
}

TEST_CASE("masked BCE rejects shape disagreements") {
  Tape t;
  const NodeId pred = t.leaf(Tensor({2, 3}));
  CHECK_THROWS_AS(train::masked_bce_loss(t, pred, Tensor({3, 3}), Tensor({2}, {1, 1})),
                  fog::ShapeError);
  CHECK_THROWS_AS(train::masked_bce_loss(t, pred, Tensor({2, 3}), Tensor({3}, {1, 1, 1})),
                  fog::ShapeError);
  const NodeId pred2 = t.leaf(Tensor({2, 2}));
  CHECK_THROWS_AS(train::masked_bce_loss(t, pred2, Tensor({2, 2}), Tensor({2}, {1, 1})),
                  fog::ShapeError);
}

TEST_CASE("masked BCE gradient checks against finite differences") {
  Rng rng(73);
  Tensor pred({2, 3});
  for (std::int64_t i = 0; i < pred.size(); ++i) pred[i] = rng.uniform(0.15, 0.85);
  const Tensor target({2, 3}, {1, 0, 1, 0, 1, 0});
  const Tensor mask({2}, {1.0, 0.0});
  const auto fn = [&](Tape& t, const std::vector<NodeId>& ids) {
    return train::masked_bce_loss(t, ids[0], target, mask);
  };
  const auto r = fog::nn::grad_check(fn, {pred});
  CHECK(r.pass);
  CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("learning-rate schedule ramps linearly then holds") {
  CHECK(train::lr_schedule(0, 4, 1.0) == 0.25);
  CHECK(train::lr_schedule(1, 4, 1.0) == 0.5);
  CHECK(train::lr_schedule(3, 4, 1.0) == 1.0);
  CHECK(train::lr_schedule(100, 4, 1.0) == 1.0);
  CHECK(train::lr_schedule(0, 0, 0.3) == 0.3);   // no warm-up
  CHECK(train::lr_schedule(5, -1, 0.3) == 0.3);
  CHECK(train::lr_schedule(9, 10, 2.0) == 2.0);  // last warm-up step reaches the peak
}

TEST_CASE("first Adam update moves by almost exactly the learning rate") {
  Tensor p({2}, {1.0, -2.0});
  const Tensor g({2}, {0.5, -0.25});
  train::OptimizerState st;
  st.warmup_steps = 0;
  st.peak_lr = 1e-3;
  std::vector<Tensor*> ps{&p};
  std::vector<const Tensor*> gs{&g};
  train::adam_step(ps, gs, {}, st);

  // bias-corrected first step: p -= lr * g / (|g| + eps)
  const double e0 = 1.0 - 1e-3 * (0.5 / (0.5 + 1e-8));
  const double e1 = -2.0 + 1e-3 * (0.25 / (0.25 + 1e-8));
  CHECK(std::abs(p[0] - e0) < 1e-15);
  CHECK(std::abs(p[1] - e1) < 1e-15);
  CHECK(st.step == 1);
  REQUIRE(st.m.size() == 1);
  CHECK(std::abs(st.m[0][0] - 0.05) < 1e-15);
  CHECK(std::abs(st.v[0][0] - 0.001 * 0.25) < 1e-15);
}

TEST_CASE("warm-up scales the first Adam updates") {
  Tensor p({1}, {0.0});
  const Tensor g({1}, {1.0});
  train::OptimizerState st;
  st.warmup_steps = 10;
  st.peak_lr = 1.0;
  std::vector<Tensor*> ps{&p};
  std::vector<const Tensor*> gs{&g};
  train::adam_step(ps, gs, {}, st);
  // lr at step 0 is peak / 10
  CHECK(std::abs(p[0] + 0.1 * (1.0 / (1.0 + 1e-8))) < 1e-12);
}

TEST_CASE("non-finite gradients abort with the parameter name") {
  Tensor p({2}, {1.0, 1.0});
  Tensor g({2}, {0.0, std::numeric_limits<double>::quiet_NaN()});
  train::OptimizerState st;
  std::vector<Tensor*> ps{&p};
  std::vector<const Tensor*> gs{&g};
  const std::vector<std::string> names{"enc0.wq"};
  try {
    train::adam_step(ps, gs, names, st);
    FAIL_CHECK("expected TrainError");
  } catch (const TrainError& e) {
    CHECK(e.kind() == TrainErrorKind::NonFiniteGradient);
    CHECK(std::string(e.what()).find("enc0.wq") != std::string::npos);
  }
}

TEST_CASE("run-config validation names the offending key") {
  const auto expect_mention = [](train::TrainRunConfig cfg, const std::string& key) {
    try {
      cfg.validate();
      FAIL_CHECK("expected ConfigError mentioning " << key);
    } catch (const fog::ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  train::TrainRunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  expect_mention(cfg, "train.batch_size");
  cfg = {};
  cfg.peak_lr = 0.0;
  expect_mention(cfg, "train.peak_lr");
  cfg = {};
  cfg.beta2 = 1.0;
  expect_mention(cfg, "train.beta2");
  cfg = {};
  cfg.loss_eps = 0.5;
  expect_mention(cfg, "train.loss_eps");
}

TEST_CASE("training runs end to end on a small synthetic set") {
  const auto records = smoke_records(6, fog::DatasetKind::Tdcsfog);
  const model::ModelConfig mcfg = smoke_model_config();
  train::TrainRunConfig rcfg;
  rcfg.batch_size = 4;
  rcfg.steps_per_epoch = 5;
  rcfg.epochs = 2;
  rcfg.seed = 3;
  rcfg.warmup_steps = 4;

  const train::TrainResult r = train::train(records, mcfg, rcfg);

  // deterministic id-ordered split: floor(6/5) = 1 validation record
  CHECK(r.train_ids == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(r.val_ids == std::vector<std::string>{"f"});

  REQUIRE(r.history.steps.size() == 10);
  REQUIRE(r.history.epochs.size() == 2);
  for (std::size_t i = 0; i < r.history.steps.size(); ++i) {
    const auto& s = r.history.steps[i];
    CHECK(s.step == static_cast<std::int64_t>(i));
    CHECK(s.epoch == static_cast<int>(i / 5));
    CHECK(s.lr == train::lr_schedule(s.step, rcfg.warmup_steps, rcfg.peak_lr));
    CHECK(std::isfinite(s.loss));
    CHECK(s.loss > 0.0);
  }
  for (const auto& e : r.history.epochs) {
    CHECK(std::isfinite(e.mean_loss));
    REQUIRE(e.val.has_value());  // a validation split exists
    CHECK(e.val->masked_patches > 0);
  }

  SUBCASE("reruns are bitwise identical") {
    const train::TrainResult r2 = train::train(records, mcfg, rcfg);
    CHECK(train::history_csv(r.history) == train::history_csv(r2.history));
    CHECK(train::epoch_csv(r.history) == train::epoch_csv(r2.history));
    const model::Checkpoint c1{mcfg, fog::DatasetKind::Tdcsfog, rcfg.seed, r.params};
    const model::Checkpoint c2{mcfg, fog::DatasetKind::Tdcsfog, rcfg.seed, r2.params};
    CHECK(model::checkpoint_to_string(c1) == model::checkpoint_to_string(c2));
  }
  SUBCASE("a different seed diverges") {
    train::TrainRunConfig other = rcfg;
    other.seed = 4;
    const train::TrainResult r3 = train::train(records, mcfg, other);
    CHECK(train::history_csv(r.history) != train::history_csv(r3.history));
  }
}

TEST_CASE("small datasets train without a validation split") {
  const auto records = smoke_records(3, fog::DatasetKind::Tdcsfog);
  const model::ModelConfig mcfg = smoke_model_config();
  train::TrainRunConfig rcfg;
  rcfg.batch_size = 2;
  rcfg.steps_per_epoch = 2;
  rcfg.epochs = 1;
  const train::TrainResult r = train::train(records, mcfg, rcfg);
  CHECK(r.train_ids.size() == 3);
  CHECK(r.val_ids.empty());
  REQUIRE(r.history.epochs.size() == 1);
  CHECK_FALSE(r.history.epochs[0].val.has_value());
  // the epoch CSV leaves the validation columns empty
  const std::string csv = train::epoch_csv(r.history);
  CHECK(csv.find(",,\n") != std::string::npos);
}

TEST_CASE("empty and mixed-kind datasets are rejected") {
  const model::ModelConfig mcfg = smoke_model_config();
  const train::TrainRunConfig rcfg;

  SUBCASE("empty") {
    try {
      train::train({}, mcfg, rcfg);
      FAIL_CHECK("expected TrainError");
    } catch (const TrainError& e) {
      CHECK(e.kind() == TrainErrorKind::EmptyDataset);
    }
  }
  SUBCASE("mixed kinds") {
    auto records = smoke_records(2, fog::DatasetKind::Tdcsfog);
    auto defog = smoke_records(1, fog::DatasetKind::Defog);
    records.push_back(defog[0]);
    try {
      train::train(records, mcfg, rcfg);
      FAIL_CHECK("expected TrainError");
    } catch (const TrainError& e) {
      CHECK(e.kind() == TrainErrorKind::MixedDatasetKind);
      CHECK(std::string(e.what()).find("defog") != std::string::npos);
    }
  }
}

TEST_CASE("history CSVs have the documented layout") {
  train::TrainHistory h;
  h.steps.push_back({0, 0, 0.5, 1.25});
  h.steps.push_back({1, 0, 1.0, 0.75});
  h.epochs.push_back({0, 1.0, std::nullopt});
  CHECK(train::history_csv(h) == "step,epoch,lr,loss\n0,0,0.5,1.25\n1,0,1,0.75\n");
  CHECK(train::epoch_csv(h) == "epoch,mean_loss,val_map,val_pooled_f1\n0,1,,\n");
}
