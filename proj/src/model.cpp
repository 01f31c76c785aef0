#include "fog/model.hpp"

#include <cmath>

#include "fog/errors.hpp"

namespace fog::model {

void ModelConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (block_size < 1) fail("model.block_size must be >= 1");
  if (patch_size < 1) fail("model.patch_size must be >= 1");
  if (block_size % patch_size != 0)
    fail("model.block_size (" + std::to_string(block_size) +
         ") must be a multiple of model.patch_size (" + std::to_string(patch_size) + ")");
  if (model_dim < 1) fail("model.dim must be >= 1");
  if (num_heads < 1) fail("model.heads must be >= 1");
  if (model_dim % num_heads != 0)
    fail("model.dim (" + std::to_string(model_dim) + ") must be a multiple of model.heads (" +
         std::to_string(num_heads) + ")");
  if (num_encoder_layers < 1) fail("model.encoder_layers must be >= 1");
  if (ffn_dim < 1) fail("model.ffn_dim must be >= 1");
  if (lstm_hidden < 1) fail("model.lstm_hidden must be >= 1");
  const auto check_rate = [&fail](double r, const char* name) {
    if (!(r >= 0.0 && r < 1.0))
      fail(std::string("model.") + name + " must lie in [0, 1), got " + std::to_string(r));
  };
  check_rate(first_dropout, "first_dropout");
  check_rate(encoder_dropout, "encoder_dropout");
  check_rate(mha_dropout, "mha_dropout");
}

namespace {

nn::Tensor glorot(Rng& rng, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  nn::Tensor w({fan_in, fan_out});
  for (std::int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
  return w;
}

LstmDirectionT<nn::Tensor> init_lstm_direction(Rng& rng, int in_dim, int hidden) {
  LstmDirectionT<nn::Tensor> d;
  d.wx = glorot(rng, in_dim, 4 * hidden);
  d.wh = glorot(rng, hidden, 4 * hidden);
  d.b = nn::Tensor({4 * hidden});
  for (int j = hidden; j < 2 * hidden; ++j) d.b[j] = 1.0;  // forget-gate bias
  return d;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const int d = cfg.model_dim;
  const int p = cfg.num_patches();
  const int h = cfg.lstm_hidden;

  ModelParams params;
  params.embed_w = glorot(rng, 3 * cfg.patch_size, d);
  params.embed_b = nn::Tensor({d});
  params.pos = nn::Tensor({p, d});

  params.encoder.resize(static_cast<std::size_t>(cfg.num_encoder_layers));
  for (auto& e : params.encoder) {
    e.wq = glorot(rng, d, d);
    e.bq = nn::Tensor({d});
    e.wk = glorot(rng, d, d);
    e.bk = nn::Tensor({d});
    e.wv = glorot(rng, d, d);
    e.bv = nn::Tensor({d});
    e.wo = glorot(rng, d, d);
    e.bo = nn::Tensor({d});
    e.ln1_gamma = nn::Tensor::full({d}, 1.0);
    e.ln1_beta = nn::Tensor({d});
    e.ffn_w1 = glorot(rng, d, cfg.ffn_dim);
    e.ffn_b1 = nn::Tensor({cfg.ffn_dim});
    e.ffn_w2 = glorot(rng, cfg.ffn_dim, d);
    e.ffn_b2 = nn::Tensor({d});
    e.ln2_gamma = nn::Tensor::full({d}, 1.0);
    e.ln2_beta = nn::Tensor({d});
  }

  params.lstm1.fwd = init_lstm_direction(rng, d, h);
  params.lstm1.bwd = init_lstm_direction(rng, d, h);
  params.lstm2.fwd = init_lstm_direction(rng, 2 * h, h);
  params.lstm2.bwd = init_lstm_direction(rng, 2 * h, h);

  params.head_w = glorot(rng, 2 * h, kNumEventClasses);
  params.head_b = nn::Tensor({kNumEventClasses});
  return params;
}

ParamNodes bind_params(nn::Tape& t, const ModelParams& params) {
  ParamNodes nodes;
  nodes.encoder.resize(params.encoder.size());
  std::vector<const nn::Tensor*> values;
  visit_params(params, [&values](const std::string&, const nn::Tensor& v) {
    values.push_back(&v);
  });
  std::vector<nn::NodeId*> slots;
  visit_params(nodes, [&slots](const std::string&, nn::NodeId& v) { slots.push_back(&v); });
  for (std::size_t i = 0; i < values.size(); ++i) *slots[i] = t.leaf(*values[i]);
  return nodes;
}

ModelParams extract_grads(const nn::Tape& t, const ParamNodes& nodes) {
  std::vector<const nn::NodeId*> ids;
  visit_params(nodes, [&ids](const std::string&, const nn::NodeId& v) { ids.push_back(&v); });
  ModelParams grads;
  grads.encoder.resize(nodes.encoder.size());
  std::vector<nn::Tensor*> slots;
  visit_params(grads, [&slots](const std::string&, nn::Tensor& v) { slots.push_back(&v); });
  for (std::size_t i = 0; i < ids.size(); ++i) *slots[i] = t.grad(*ids[i]);
  return grads;
}

std::vector<std::pair<std::string, nn::Tensor*>> flatten(ModelParams& p) {
  std::vector<std::pair<std::string, nn::Tensor*>> out;
  visit_params(p, [&out](const std::string& name, nn::Tensor& v) { out.emplace_back(name, &v); });
  return out;
}

std::vector<std::pair<std::string, const nn::Tensor*>> flatten(const ModelParams& p) {
  std::vector<std::pair<std::string, const nn::Tensor*>> out;
  visit_params(p, [&out](const std::string& name, const nn::Tensor& v) {
    out.emplace_back(name, &v);
  });
  return out;
}

std::int64_t param_count(const ModelParams& p) {
  std::int64_t n = 0;
  visit_params(p, [&n](const std::string&, const nn::Tensor& v) { n += v.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// forward graph
// ---------------------------------------------------------------------------

nn::NodeId embed_patches(nn::Tape& t, nn::NodeId features, const ParamNodes& n,
                         const ModelConfig& cfg) {
  const int p = cfg.num_patches();
  // Row-major [block_size x 3] regrouped into one row per patch.
  nn::NodeId patches = nn::reshape(t, features, {p, cfg.patch_size * kNumAccChannels});
  nn::NodeId x = nn::add(t, nn::matmul(t, patches, n.embed_w), n.embed_b);
  return nn::add(t, x, n.pos);
}

nn::NodeId multi_head_attention(nn::Tape& t, nn::NodeId x, const EncoderLayerT<nn::NodeId>& layer,
                                const ModelConfig& cfg, Rng& rng, bool train_mode) {
  const int dh = cfg.model_dim / cfg.num_heads;
  nn::NodeId q = nn::add(t, nn::matmul(t, x, layer.wq), layer.bq);
  nn::NodeId k = nn::add(t, nn::matmul(t, x, layer.wk), layer.bk);
  nn::NodeId v = nn::add(t, nn::matmul(t, x, layer.wv), layer.bv);

  std::vector<nn::NodeId> heads;
  heads.reserve(static_cast<std::size_t>(cfg.num_heads));
  for (int h = 0; h < cfg.num_heads; ++h) {
    const int c0 = h * dh, c1 = (h + 1) * dh;
    nn::NodeId qh = nn::slice_cols(t, q, c0, c1);
    nn::NodeId kh = nn::slice_cols(t, k, c0, c1);
    nn::NodeId vh = nn::slice_cols(t, v, c0, c1);
    nn::NodeId scores = nn::scale(t, nn::matmul(t, qh, nn::transpose(t, kh)),
                                  1.0 / std::sqrt(static_cast<double>(dh)));
    nn::NodeId attn = nn::softmax(t, scores, /*axis=*/1);
    attn = nn::dropout(t, attn, cfg.mha_dropout, rng, train_mode);
    heads.push_back(nn::matmul(t, attn, vh));
  }
  nn::NodeId merged = heads.size() == 1 ? heads[0] : nn::concat(t, heads, /*axis=*/1);
  return nn::add(t, nn::matmul(t, merged, layer.wo), layer.bo);
}

nn::NodeId encoder_layer(nn::Tape& t, nn::NodeId x, const EncoderLayerT<nn::NodeId>& layer,
                         const ModelConfig& cfg, Rng& rng, bool train_mode) {
  nn::NodeId attn = multi_head_attention(t, x, layer, cfg, rng, train_mode);
  attn = nn::dropout(t, attn, cfg.encoder_dropout, rng, train_mode);
  nn::NodeId y = nn::layer_norm(t, nn::add(t, x, attn), layer.ln1_gamma, layer.ln1_beta);

  nn::NodeId f = nn::relu(t, nn::add(t, nn::matmul(t, y, layer.ffn_w1), layer.ffn_b1));
  f = nn::add(t, nn::matmul(t, f, layer.ffn_w2), layer.ffn_b2);
  f = nn::dropout(t, f, cfg.encoder_dropout, rng, train_mode);
  return nn::layer_norm(t, nn::add(t, y, f), layer.ln2_gamma, layer.ln2_beta);
}

namespace {

nn::NodeId lstm_direction(nn::Tape& t, nn::NodeId x, const LstmDirectionT<nn::NodeId>& dir,
                          int hidden, bool reversed) {
  const int p = t.value(x).dim(0);
  nn::NodeId h = t.leaf(nn::Tensor({1, hidden}));
  nn::NodeId c = t.leaf(nn::Tensor({1, hidden}));
  std::vector<nn::NodeId> outputs(static_cast<std::size_t>(p));
  for (int step = 0; step < p; ++step) {
    const int ti = reversed ? p - 1 - step : step;
    nn::NodeId xt = nn::slice_rows(t, x, ti, ti + 1);
    nn::NodeId gates = nn::add(
        t, nn::add(t, nn::matmul(t, xt, dir.wx), nn::matmul(t, h, dir.wh)), dir.b);
    nn::NodeId gi = nn::sigmoid(t, nn::slice_cols(t, gates, 0, hidden));
    nn::NodeId gf = nn::sigmoid(t, nn::slice_cols(t, gates, hidden, 2 * hidden));
    nn::NodeId gg = nn::tanh_op(t, nn::slice_cols(t, gates, 2 * hidden, 3 * hidden));
    nn::NodeId go = nn::sigmoid(t, nn::slice_cols(t, gates, 3 * hidden, 4 * hidden));
    c = nn::add(t, nn::mul(t, gf, c), nn::mul(t, gi, gg));
    h = nn::mul(t, go, nn::tanh_op(t, c));
    outputs[static_cast<std::size_t>(ti)] = h;
  }
  return outputs.size() == 1 ? outputs[0] : nn::concat(t, outputs, /*axis=*/0);
}

}  // namespace

nn::NodeId bilstm_layer(nn::Tape& t, nn::NodeId x, const BiLstmT<nn::NodeId>& lstm, int hidden) {
  nn::NodeId fwd = lstm_direction(t, x, lstm.fwd, hidden, /*reversed=*/false);
  nn::NodeId bwd = lstm_direction(t, x, lstm.bwd, hidden, /*reversed=*/true);
  return nn::concat(t, fwd, bwd, /*axis=*/1);
}

nn::NodeId forward_features(nn::Tape& t, nn::NodeId features, const ParamNodes& n,
                            const ModelConfig& cfg, Rng& rng, bool train_mode) {
  nn::NodeId x = embed_patches(t, features, n, cfg);
  x = nn::dropout(t, x, cfg.first_dropout, rng, train_mode);
  for (const auto& layer : n.encoder) x = encoder_layer(t, x, layer, cfg, rng, train_mode);
  x = bilstm_layer(t, x, n.lstm1, cfg.lstm_hidden);
  x = bilstm_layer(t, x, n.lstm2, cfg.lstm_hidden);
  nn::NodeId logits = nn::add(t, nn::matmul(t, x, n.head_w), n.head_b);
  return nn::sigmoid(t, logits);
}

nn::NodeId forward(nn::Tape& t, const preprocess::Block& block, const ParamNodes& n,
                   const ModelConfig& cfg, Rng& rng, bool train_mode) {
  const auto& f = block.features;
  if (f.rank() != 2 || f.dim(0) != cfg.block_size || f.dim(1) != kNumAccChannels)
    throw ConfigError("block features " + nn::shape_str(f.shape()) +
                      " do not match model.block_size " + std::to_string(cfg.block_size));
  if (block.targets.dim(0) != cfg.num_patches())
    throw ConfigError("block has " + std::to_string(block.targets.dim(0)) +
                      " patches but the model expects " + std::to_string(cfg.num_patches()));
  return forward_features(t, t.leaf(f), n, cfg, rng, train_mode);
}

}  // namespace fog::model
