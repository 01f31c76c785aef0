#include "fog/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace fog::nn {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

void require_arg(bool cond, const std::string& msg) {
  if (!cond) throw ArgError(msg);
}

}  // namespace

NodeId Tape::leaf(Tensor value) { return push(std::move(value)); }

NodeId Tape::push(Tensor value) {
  Node n;
  n.grad = Tensor(value.shape());  // zero-filled, same shape
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::set_pull(NodeId id, std::function<void(Tape&)> pull) {
  nodes_[static_cast<std::size_t>(id)].pull = std::move(pull);
}

void Tape::backward(NodeId root) {
  auto& r = nodes_[static_cast<std::size_t>(root)];
  require(r.value.size() == 1,
          "backward root must be scalar, shape is " + shape_str(r.value.shape()));
  for (auto& n : nodes_) n.grad.fill(0.0);
  r.grad[0] = 1.0;
  for (NodeId i = root; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.pull) n.pull(*this);
  }
}

void Tape::clear() { nodes_.clear(); }

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

NodeId matmul(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require(av.rank() == 2 && bv.rank() == 2,
          "matmul requires rank-2 operands, got " + shape_str(av.shape()) + " and " +
              shape_str(bv.shape()));
  require(av.dim(1) == bv.dim(0),
          "matmul inner dimensions differ: " + shape_str(av.shape()) + " vs " +
              shape_str(bv.shape()));
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = av.at(i, p);
      for (int j = 0; j < n; ++j) out.at(i, j) += aip * bv.at(p, j);
    }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [a, b, id, m, k, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    Tensor& ga = tp.grad_ref(a);
    Tensor& gb = tp.grad_ref(b);
    // dA = g * B^T
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += g.at(i, j) * bv2.at(p, j);
        ga.at(i, p) += acc;
      }
    // dB = A^T * g
    for (int p = 0; p < k; ++p)
      for (int i = 0; i < m; ++i) {
        const double aip = av2.at(i, p);
        for (int j = 0; j < n; ++j) gb.at(p, j) += aip * g.at(i, j);
      }
  });
  return id;
}

NodeId transpose(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 2, "transpose requires rank-2 input, got " + shape_str(xv.shape()));
  const int m = xv.dim(0), n = xv.dim(1);
  Tensor out({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(j, i) = xv.at(i, j);
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, m, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) gx.at(i, j) += g.at(j, i);
  });
  return id;
}

NodeId add(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.same_shape(bv)) {
    Tensor out(av.shape());
    const std::int64_t n = av.size();
    for (std::int64_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
    NodeId id = t.push(std::move(out));
    t.set_pull(id, [a, b, id, n](Tape& tp) {
      const Tensor& g = tp.grad_ref(id);
      Tensor& ga = tp.grad_ref(a);
      Tensor& gb = tp.grad_ref(b);
      for (std::int64_t i = 0; i < n; ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
    });
    return id;
  }
  // bias broadcast: b is rank-1 matching the last axis of a
  require(bv.rank() == 1 && bv.dim(0) == av.shape().back(),
          "add requires equal shapes or a rank-1 bias matching the last axis, got " +
              shape_str(av.shape()) + " and " + shape_str(bv.shape()));
  const std::int64_t n = av.size();
  const std::int64_t d = bv.size();
  Tensor out(av.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = av[i] + bv[i % d];
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [a, b, id, n, d](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& ga = tp.grad_ref(a);
    Tensor& gb = tp.grad_ref(b);
    for (std::int64_t i = 0; i < n; ++i) {
      ga[i] += g[i];
      gb[i % d] += g[i];
    }
  });
  return id;
}

NodeId mul(Tape& t, NodeId a, NodeId b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require(av.same_shape(bv), "mul requires identical shapes, got " + shape_str(av.shape()) +
                                 " and " + shape_str(bv.shape()));
  const std::int64_t n = av.size();
  Tensor out(av.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [a, b, id, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    Tensor& ga = tp.grad_ref(a);
    Tensor& gb = tp.grad_ref(b);
    for (std::int64_t i = 0; i < n; ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av2[i];
    }
  });
  return id;
}

NodeId scale(Tape& t, NodeId x, double c) {
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = xv[i] * c;
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, c, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i] * c;
  });
  return id;
}

NodeId cmul(Tape& t, NodeId x, const Tensor& w) {
  const Tensor& xv = t.value(x);
  require(xv.same_shape(w), "cmul requires identical shapes, got " + shape_str(xv.shape()) +
                                " and " + shape_str(w.shape()));
  const std::int64_t n = xv.size();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = xv[i] * w[i];
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, w, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i] * w[i];
  });
  return id;
}

NodeId sigmoid(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = xv[i];
    // branch keeps exp() argument non-positive for stability
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& y = tp.value(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
  return id;
}

NodeId tanh_op(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = std::tanh(xv[i]);
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& y = tp.value(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
  return id;
}

NodeId relu(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& xv2 = tp.value(x);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i)
      if (xv2[i] > 0.0) gx[i] += g[i];
  });
  return id;
}

NodeId softmax(Tape& t, NodeId x, int axis) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 1 || xv.rank() == 2,
          "softmax requires rank-1 or rank-2 input, got " + shape_str(xv.shape()));
  if (xv.rank() == 1) axis = 0;
  if (axis == -1) axis = xv.rank() - 1;
  require_arg(axis == 0 || axis == 1, "softmax axis must be 0 or 1");

  Tensor out(xv.shape());
  const int rows = xv.rank() == 1 ? 1 : xv.dim(0);
  const int cols = xv.rank() == 1 ? xv.dim(0) : xv.dim(1);
  // normalise along rows (axis==1 or rank-1) or columns (axis==0 of rank-2)
  const bool along_cols = xv.rank() == 2 && axis == 0;
  const int groups = along_cols ? cols : rows;
  const int len = along_cols ? rows : cols;
  auto idx = [along_cols, cols](int gidx, int j) {
    return along_cols ? static_cast<std::int64_t>(j) * cols + gidx
                      : static_cast<std::int64_t>(gidx) * cols + j;
  };
  for (int gix = 0; gix < groups; ++gix) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < len; ++j) mx = std::max(mx, xv[idx(gix, j)]);
    double denom = 0.0;
    for (int j = 0; j < len; ++j) {
      const double e = std::exp(xv[idx(gix, j)] - mx);
      out[idx(gix, j)] = e;
      denom += e;
    }
    for (int j = 0; j < len; ++j) out[idx(gix, j)] /= denom;
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, groups, len, idx](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& y = tp.value(id);
    Tensor& gx = tp.grad_ref(x);
    for (int gix = 0; gix < groups; ++gix) {
      double dot = 0.0;
      for (int j = 0; j < len; ++j) dot += g[idx(gix, j)] * y[idx(gix, j)];
      for (int j = 0; j < len; ++j)
        gx[idx(gix, j)] += y[idx(gix, j)] * (g[idx(gix, j)] - dot);
    }
  });
  return id;
}

NodeId layer_norm(Tape& t, NodeId x, NodeId gamma, NodeId beta, double eps) {
  const Tensor& xv = t.value(x);
  const Tensor& gv = t.value(gamma);
  const Tensor& bv = t.value(beta);
  const int d = xv.shape().back();
  require(gv.rank() == 1 && gv.dim(0) == d && bv.rank() == 1 && bv.dim(0) == d,
          "layer_norm gamma/beta must be rank-1 of the last-axis length");
  require_arg(eps > 0.0, "layer_norm eps must be positive");
  const std::int64_t rows = xv.size() / d;

  Tensor out(xv.shape());
  // cache per-row inverse stddev and normalised values for backward
  std::vector<double> inv_std(static_cast<std::size_t>(rows));
  std::vector<double> xhat(static_cast<std::size_t>(xv.size()));
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::int64_t base = r * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xv[base + j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = xv[base + j] - mean;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (int j = 0; j < d; ++j) {
      const double xh = (xv[base + j] - mean) * is;
      xhat[static_cast<std::size_t>(base + j)] = xh;
      out[base + j] = gv[j] * xh + bv[j];
    }
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, gamma, beta, id, rows, d, inv_std = std::move(inv_std),
                  xhat = std::move(xhat)](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& gv2 = tp.value(gamma);
    Tensor& gx = tp.grad_ref(x);
    Tensor& gg = tp.grad_ref(gamma);
    Tensor& gb = tp.grad_ref(beta);
    for (std::int64_t r = 0; r < rows; ++r) {
      const std::int64_t base = r * d;
      const double is = inv_std[static_cast<std::size_t>(r)];
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (int j = 0; j < d; ++j) {
        const double gij = g[base + j];
        const double xh = xhat[static_cast<std::size_t>(base + j)];
        gg[j] += gij * xh;
        gb[j] += gij;
        const double dxh = gij * gv2[j];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh;
      }
      const double m1 = sum_dxh / d;
      const double m2 = sum_dxh_xh / d;
      for (int j = 0; j < d; ++j) {
        const double dxh = g[base + j] * gv2[j];
        const double xh = xhat[static_cast<std::size_t>(base + j)];
        gx[base + j] += is * (dxh - m1 - xh * m2);
      }
    }
  });
  return id;
}

NodeId dropout(Tape& t, NodeId x, double rate, Rng& rng, bool train_mode) {
  require_arg(rate >= 0.0 && rate < 1.0,
              "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!train_mode) return x;  // identity: reuse the input node
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(static_cast<std::size_t>(n));
  Tensor out(xv.shape());
  for (std::int64_t i = 0; i < n; ++i) {
    const double m = rng.uniform() >= rate ? keep_scale : 0.0;
    mask[static_cast<std::size_t>(i)] = m;
    out[i] = xv[i] * m;
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, n, mask = std::move(mask)](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i] * mask[static_cast<std::size_t>(i)];
  });
  return id;
}

NodeId concat(Tape& t, const std::vector<NodeId>& xs, int axis) {
  require_arg(!xs.empty(), "concat requires at least one input");
  const Tensor& first = t.value(xs[0]);
  if (axis == 0) {
    // stack along the first axis; all other dimensions must match
    std::int64_t slice = first.size() / first.dim(0);
    int total0 = 0;
    for (NodeId n : xs) {
      const Tensor& v = t.value(n);
      require(v.rank() == first.rank(), "concat inputs must share rank");
      for (int d = 1; d < first.rank(); ++d)
        require(v.dim(d) == first.dim(d), "concat inputs must agree on non-concat axes");
      total0 += v.dim(0);
    }
    std::vector<int> shape = first.shape();
    shape[0] = total0;
    Tensor out(shape);
    std::int64_t off = 0;
    for (NodeId n : xs) {
      const Tensor& v = t.value(n);
      const std::int64_t len = v.size();
      for (std::int64_t i = 0; i < len; ++i) out[off + i] = v[i];
      off += len;
    }
    NodeId id = t.push(std::move(out));
    t.set_pull(id, [xs, id](Tape& tp) {
      const Tensor& g = tp.grad_ref(id);
      std::int64_t off2 = 0;
      for (NodeId n : xs) {
        Tensor& gx = tp.grad_ref(n);
        const std::int64_t len = gx.size();
        for (std::int64_t i = 0; i < len; ++i) gx[i] += g[off2 + i];
        off2 += len;
      }
    });
    (void)slice;
    return id;
  }
  require_arg(axis == 1, "concat axis must be 0 or 1");
  require(first.rank() == 2, "concat along axis 1 requires rank-2 inputs");
  const int m = first.dim(0);
  int total_cols = 0;
  for (NodeId n : xs) {
    const Tensor& v = t.value(n);
    require(v.rank() == 2 && v.dim(0) == m, "concat axis-1 inputs must agree on row count");
    total_cols += v.dim(1);
  }
  Tensor out({m, total_cols});
  int coff = 0;
  for (NodeId n : xs) {
    const Tensor& v = t.value(n);
    const int c = v.dim(1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < c; ++j) out.at(i, coff + j) = v.at(i, j);
    coff += c;
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [xs, id, m](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    int coff2 = 0;
    for (NodeId n : xs) {
      Tensor& gx = tp.grad_ref(n);
      const int c = gx.dim(1);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < c; ++j) gx.at(i, j) += g.at(i, coff2 + j);
      coff2 += c;
    }
  });
  return id;
}

NodeId concat(Tape& t, NodeId a, NodeId b, int axis) {
  return concat(t, std::vector<NodeId>{a, b}, axis);
}

NodeId slice_rows(Tape& t, NodeId x, int r0, int r1) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 2, "slice_rows requires rank-2 input, got " + shape_str(xv.shape()));
  require_arg(0 <= r0 && r0 < r1 && r1 <= xv.dim(0),
              "slice_rows range [" + std::to_string(r0) + ", " + std::to_string(r1) +
                  ") out of bounds for " + shape_str(xv.shape()));
  const int n = xv.dim(1);
  Tensor out({r1 - r0, n});
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < n; ++j) out.at(i - r0, j) = xv.at(i, j);
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, r0, r1, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < n; ++j) gx.at(i, j) += g.at(i - r0, j);
  });
  return id;
}

NodeId slice_cols(Tape& t, NodeId x, int c0, int c1) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 2, "slice_cols requires rank-2 input, got " + shape_str(xv.shape()));
  require_arg(0 <= c0 && c0 < c1 && c1 <= xv.dim(1),
              "slice_cols range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                  ") out of bounds for " + shape_str(xv.shape()));
  const int m = xv.dim(0);
  Tensor out({m, c1 - c0});
  for (int i = 0; i < m; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = xv.at(i, j);
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, c0, c1, m](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (int i = 0; i < m; ++i)
      for (int j = c0; j < c1; ++j) gx.at(i, j) += g.at(i, j - c0);
  });
  return id;
}

NodeId reshape(Tape& t, NodeId x, std::vector<int> shape) {
  const Tensor& xv = t.value(x);
  require(numel(shape) == xv.size(), "reshape element count mismatch: " + shape_str(xv.shape()) +
                                         " -> " + shape_str(shape));
  std::vector<double> data(xv.data(), xv.data() + xv.size());
  Tensor out(std::move(shape), std::move(data));
  const std::int64_t n = xv.size();
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [x, id, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g[i];
  });
  return id;
}

NodeId sum(Tape& t, NodeId x) {
  const Tensor& xv = t.value(x);
  const std::int64_t n = xv.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) acc += xv[i];
  NodeId id = t.push(Tensor::scalar(acc));
  t.set_pull(id, [x, id, n](Tape& tp) {
    const double g = tp.grad_ref(id)[0];
    Tensor& gx = tp.grad_ref(x);
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g;
  });
  return id;
}

NodeId bce(Tape& t, NodeId pred, const Tensor& target, double eps) {
  const Tensor& pv = t.value(pred);
  require(pv.same_shape(target), "bce prediction/target shapes differ: " +
                                     shape_str(pv.shape()) + " vs " + shape_str(target.shape()));
  require_arg(eps > 0.0 && eps < 0.5, "bce eps must lie in (0, 0.5)");
  const std::int64_t n = pv.size();
  Tensor out(pv.shape());
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(pv[i], eps, 1.0 - eps);
    const double tt = target[i];
    out[i] = -(tt * std::log(p) + (1.0 - tt) * std::log(1.0 - p));
  }
  NodeId id = t.push(std::move(out));
  t.set_pull(id, [pred, id, target, eps, n](Tape& tp) {
    const Tensor& g = tp.grad_ref(id);
    const Tensor& pv2 = tp.value(pred);
    Tensor& gp = tp.grad_ref(pred);
    for (std::int64_t i = 0; i < n; ++i) {
      const double p = pv2[i];
      if (p < eps || p > 1.0 - eps) continue;  // clipped region: zero derivative
      const double tt = target[i];
      gp[i] += g[i] * (-(tt / p) + (1.0 - tt) / (1.0 - p));
    }
  });
  return id;
}

// ---------------------------------------------------------------------------
// gradient checking
// ---------------------------------------------------------------------------

namespace {

double eval_scalar(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Tape t;
  std::vector<NodeId> ids;
  ids.reserve(inputs.size());
  for (const auto& in : inputs) ids.push_back(t.leaf(in));
  const NodeId root = fn(t, ids);
  return t.value(root).item();
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs, double h,
                           double tol) {
  require_arg(h > 0.0, "grad_check step h must be positive");
  // analytic gradients
  std::vector<Tensor> analytic;
  {
    Tape t;
    std::vector<NodeId> ids;
    ids.reserve(inputs.size());
    for (const auto& in : inputs) ids.push_back(t.leaf(in));
    const NodeId root = fn(t, ids);
    t.backward(root);
    for (NodeId id : ids) analytic.push_back(t.grad(id));
  }

  GradCheckResult res;
  std::vector<Tensor> work = inputs;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const std::int64_t n = work[i].size();
    for (std::int64_t j = 0; j < n; ++j) {
      const double orig = work[i][j];
      work[i][j] = orig + h;
      const double fp = eval_scalar(fn, work);
      work[i][j] = orig - h;
      const double fm = eval_scalar(fn, work);
      work[i][j] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[i][j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_input = static_cast<int>(i);
        res.worst_element = j;
        res.worst_analytic = a;
        res.worst_numeric = numeric;
      }
    }
  }
  res.pass = res.max_rel_error <= tol;
  return res;
}

}  // namespace fog::nn
