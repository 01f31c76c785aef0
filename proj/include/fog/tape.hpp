#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fog/rng.hpp"
#include "fog/tensor.hpp"

namespace fog::nn {

/// Index of a node on a Tape.
using NodeId = std::int32_t;

/// Reverse-mode automatic differentiation over a linear tape of dense-tensor
/// operations.  Each op appends a node holding its forward value plus a
/// backward closure that accumulates into its parents' gradients.
///
/// Usage: create leaves with `leaf`, build the graph with the free functions
/// below, call `backward` on a scalar root, then read `grad(id)`.
/// Gradients from multiple uses of the same node accumulate additively.
/// `backward` re-zeroes all gradients first, so it can be called repeatedly
/// for different roots on the same tape.
class Tape {
 public:
  /// Adds an input node.  Leaves participate in backward like any other node;
  /// whether the caller reads their gradient is up to the caller.
  NodeId leaf(Tensor value);

  const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  std::size_t node_count() const { return nodes_.size(); }

  /// Runs reverse accumulation from `root`, which must hold a single element.
  void backward(NodeId root);

  /// Drops all nodes; existing NodeIds become invalid.
  void clear();

  // -- op-implementation interface -----------------------------------------

  /// Appends a node with no backward closure and returns its id.  Ops push
  /// first, then attach the closure with `set_pull` once the id is known.
  NodeId push(Tensor value);

  /// Attaches the backward closure: it receives the tape and must add this
  /// node's gradient contribution to its parents via `grad_ref`.
  void set_pull(NodeId id, std::function<void(Tape&)> pull);

  /// Mutable gradient accumulator for op backward closures.
  Tensor& grad_ref(NodeId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> pull;  // empty for leaves
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations.  All inputs live on `t`; the result is a new node on `t`.
// ---------------------------------------------------------------------------

/// [m x k] * [k x n] -> [m x n].
NodeId matmul(Tape& t, NodeId a, NodeId b);

/// [m x n] -> [n x m].
NodeId transpose(Tape& t, NodeId x);

/// Elementwise sum; either identical shapes, or `b` rank-1 of length equal to
/// the last dimension of `a` (bias broadcast over leading axes).
NodeId add(Tape& t, NodeId a, NodeId b);

/// Elementwise product of identically shaped tensors.
NodeId mul(Tape& t, NodeId a, NodeId b);

/// Multiply by a compile-time constant scalar.
NodeId scale(Tape& t, NodeId x, double c);

/// Elementwise product with a constant tensor (no gradient flows into `w`).
/// Zero entries of `w` therefore yield exactly-zero upstream gradients.
NodeId cmul(Tape& t, NodeId x, const Tensor& w);

NodeId sigmoid(Tape& t, NodeId x);
NodeId tanh_op(Tape& t, NodeId x);
NodeId relu(Tape& t, NodeId x);

/// Softmax along `axis` of a rank-1 or rank-2 tensor (rank-1 ignores axis).
/// Numerically stabilised by max-subtraction.
NodeId softmax(Tape& t, NodeId x, int axis = -1);

/// Layer normalisation over the last axis with trainable gain/offset.
/// gamma and beta are rank-1 nodes of the last-axis length.
NodeId layer_norm(Tape& t, NodeId x, NodeId gamma, NodeId beta, double eps = 1e-5);

/// Inverted dropout.  In training mode each element is kept with probability
/// (1 - rate) and scaled by 1/(1 - rate); in eval mode the input node is
/// returned unchanged.  rate must lie in [0, 1).  Mask draws come from `rng`
/// in element order, so identical seeds give identical masks.
NodeId dropout(Tape& t, NodeId x, double rate, Rng& rng, bool train_mode);

/// Concatenate along `axis` (0 for any rank, 1 for rank-2).
NodeId concat(Tape& t, const std::vector<NodeId>& xs, int axis);
NodeId concat(Tape& t, NodeId a, NodeId b, int axis);

/// Row/column slices of a rank-2 tensor; half-open ranges.
NodeId slice_rows(Tape& t, NodeId x, int r0, int r1);
NodeId slice_cols(Tape& t, NodeId x, int c0, int c1);

/// Reinterpret with a new shape of equal element count.
NodeId reshape(Tape& t, NodeId x, std::vector<int> shape);

/// Sum of all elements -> scalar node.
NodeId sum(Tape& t, NodeId x);

/// Elementwise binary cross-entropy against a constant target tensor.
/// Predictions are clipped to [eps, 1-eps] before the logs; the derivative is
/// zero wherever clipping is active.
NodeId bce(Tape& t, NodeId pred, const Tensor& target, double eps = 1e-7);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  bool pass = false;
  int worst_input = -1;          // index into the inputs vector
  std::int64_t worst_element = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds a scalar graph from leaves for the given inputs.  Must be pure:
/// the same inputs always produce the same value.
using ScalarFn = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

/// Compares reverse-mode gradients of `fn` against central finite differences
/// (f(x+h) - f(x-h)) / 2h for every element of every input.  Relative error
/// uses max(|analytic|, |numeric|, 1e-8) as the denominator.
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           double h = 1e-5, double tol = 1e-5);

}  // namespace fog::nn
