#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fog/preprocess.hpp"
#include "fog/rng.hpp"
#include "fog/tape.hpp"

namespace fog::model {

/// Architecture hyperparameters.  Defaults give the full-size network; tests
/// shrink everything for speed.
struct ModelConfig {
  int block_size = 864;   // samples per input window
  int patch_size = 18;    // samples per patch; one prediction per patch
  int model_dim = 320;    // transformer width D
  int num_heads = 4;      // attention heads; must divide model_dim
  int num_encoder_layers = 2;
  int ffn_dim = 1280;     // feed-forward hidden width
  int lstm_hidden = 160;  // per-direction LSTM width H
  double first_dropout = 0.1;    // after patch embedding + positions
  double encoder_dropout = 0.1;  // on each residual branch
  double mha_dropout = 0.1;      // on attention weights
  int num_patches() const { return block_size / patch_size; }
  bool operator==(const ModelConfig&) const = default;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

// Parameter containers are templated on the element type so the same
// structure and traversal order serve plain tensors (storage, gradients,
// optimizer moments) and tape nodes (graph building).

template <class T>
struct EncoderLayerT {
  T wq, bq, wk, bk, wv, bv, wo, bo;  // attention projections
  T ln1_gamma, ln1_beta;             // post-attention layer norm
  T ffn_w1, ffn_b1, ffn_w2, ffn_b2;  // position-wise feed-forward
  T ln2_gamma, ln2_beta;             // post-FFN layer norm
};

template <class T>
struct LstmDirectionT {
  T wx;  // [in x 4H], gate order i, f, g, o
  T wh;  // [H x 4H]
  T b;   // [4H]
};

template <class T>
struct BiLstmT {
  LstmDirectionT<T> fwd, bwd;
};

template <class T>
struct ParamSetT {
  T embed_w;  // [3*patch_size x D]
  T embed_b;  // [D]
  T pos;      // [P x D] trainable positional encoding
  std::vector<EncoderLayerT<T>> encoder;
  BiLstmT<T> lstm1;  // input D
  BiLstmT<T> lstm2;  // input 2H
  T head_w;  // [2H x 3]
  T head_b;  // [3]
};

using ModelParams = ParamSetT<nn::Tensor>;
using ParamNodes = ParamSetT<nn::NodeId>;

/// Visits every parameter in canonical order with f(name, field).  The order
/// defines checkpoint layout, optimizer-state alignment, and init sequence.
template <class ParamSet, class F>
void visit_params(ParamSet& p, F&& f) {
  f("embed.w", p.embed_w);
  f("embed.b", p.embed_b);
  f("pos", p.pos);
  for (std::size_t i = 0; i < p.encoder.size(); ++i) {
    auto& e = p.encoder[i];
    const std::string k = "enc" + std::to_string(i) + ".";
    f(k + "wq", e.wq);
    f(k + "bq", e.bq);
    f(k + "wk", e.wk);
    f(k + "bk", e.bk);
    f(k + "wv", e.wv);
    f(k + "bv", e.bv);
    f(k + "wo", e.wo);
    f(k + "bo", e.bo);
    f(k + "ln1.gamma", e.ln1_gamma);
    f(k + "ln1.beta", e.ln1_beta);
    f(k + "ffn.w1", e.ffn_w1);
    f(k + "ffn.b1", e.ffn_b1);
    f(k + "ffn.w2", e.ffn_w2);
    f(k + "ffn.b2", e.ffn_b2);
    f(k + "ln2.gamma", e.ln2_gamma);
    f(k + "ln2.beta", e.ln2_beta);
  }
  const auto visit_lstm = [&f](const std::string& prefix, auto& lstm) {
    f(prefix + ".fwd.wx", lstm.fwd.wx);
    f(prefix + ".fwd.wh", lstm.fwd.wh);
    f(prefix + ".fwd.b", lstm.fwd.b);
    f(prefix + ".bwd.wx", lstm.bwd.wx);
    f(prefix + ".bwd.wh", lstm.bwd.wh);
    f(prefix + ".bwd.b", lstm.bwd.b);
  };
  visit_lstm("lstm1", p.lstm1);
  visit_lstm("lstm2", p.lstm2);
  f("head.w", p.head_w);
  f("head.b", p.head_b);
}

/// Fresh parameters: weight matrices Glorot-uniform
/// (limit sqrt(6 / (fan_in + fan_out)), drawn in canonical order from an Rng
/// seeded with `seed`), biases zero except LSTM forget gates at 1, layer-norm
/// gains 1, positional encodings zero.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Copies every parameter onto the tape as a leaf, preserving canonical order.
ParamNodes bind_params(nn::Tape& t, const ModelParams& params);

/// Gradients of all parameters after backward, in a ModelParams-shaped holder.
ModelParams extract_grads(const nn::Tape& t, const ParamNodes& nodes);

/// Name->tensor views in canonical order.
std::vector<std::pair<std::string, nn::Tensor*>> flatten(ModelParams& p);
std::vector<std::pair<std::string, const nn::Tensor*>> flatten(const ModelParams& p);

std::int64_t param_count(const ModelParams& p);

// -- forward graph pieces ---------------------------------------------------

/// [block_size x 3] features -> [P x D] embedded patches with positions.
nn::NodeId embed_patches(nn::Tape& t, nn::NodeId features, const ParamNodes& n,
                         const ModelConfig& cfg);

/// Scaled dot-product multi-head self-attention over [P x D].
nn::NodeId multi_head_attention(nn::Tape& t, nn::NodeId x, const EncoderLayerT<nn::NodeId>& layer,
                                const ModelConfig& cfg, Rng& rng, bool train_mode);

/// One post-norm encoder layer: LN(x + Drop(MHA(x))) then LN(y + Drop(FFN(y))).
nn::NodeId encoder_layer(nn::Tape& t, nn::NodeId x, const EncoderLayerT<nn::NodeId>& layer,
                         const ModelConfig& cfg, Rng& rng, bool train_mode);

/// Bidirectional LSTM over the patch sequence; output [P x 2H].
nn::NodeId bilstm_layer(nn::Tape& t, nn::NodeId x, const BiLstmT<nn::NodeId>& lstm, int hidden);

/// Full network on already-embedded input features [block_size x 3];
/// returns per-patch confidences [P x 3] in (0, 1).
nn::NodeId forward_features(nn::Tape& t, nn::NodeId features, const ParamNodes& n,
                            const ModelConfig& cfg, Rng& rng, bool train_mode);

/// Convenience wrapper: checks the block geometry against `cfg`
/// (ConfigError on mismatch), places features on the tape, runs the network.
nn::NodeId forward(nn::Tape& t, const preprocess::Block& block, const ParamNodes& n,
                   const ModelConfig& cfg, Rng& rng, bool train_mode);

}  // namespace fog::model
