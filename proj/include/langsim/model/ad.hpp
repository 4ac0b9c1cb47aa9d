// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal tape-based reverse-mode differentiation over dense row-major
// matrices. Products accumulate each output row on its own so that every row
// depends only on the matching input row; stacking independent samples
// therefore gives bitwise the same numbers as evaluating them one at a time.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "langsim/core/error.hpp"

namespace langsim::ad {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Mat&)>;

  Tape() { nodes_.reserve(512); }

  Var constant(Mat v) { return push(std::move(v), false, nullptr); }

  /// Leaf whose gradient is accumulated into `sink` (no gradient if null).
  /// The value is referenced, not copied, and must outlive the tape.
  Var param(const Mat& v, Mat* sink) {
    Node n;
    n.ref = &v;
    n.requires_grad = sink != nullptr;
    n.sink = sink;
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  /// Leaf that records its own gradient (read back with grad()).
  Var input(Mat v, bool requires_grad) { return push(std::move(v), requires_grad, nullptr); }

  Var push(Mat v, bool requires_grad, Backward bw) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = requires_grad;
    if (requires_grad) n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  const Mat& value(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  bool requires_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].requires_grad; }

  /// Gradient buffer of a node, zero-initialised on first use.
  Mat& grad_ref(Var v) {
    Node& n = nodes_[static_cast<size_t>(v.id)];
    if (n.sink != nullptr) return *n.sink;
    if (n.grad.size() == 0) {
      const Mat& val = value(v);
      n.grad = Mat::Zero(val.rows(), val.cols());
    }
    return n.grad;
  }

  void accumulate(Var v, const Mat& g) {
    if (!requires_grad(v)) return;
    grad_ref(v) += g;
  }

  /// Gradient of an input node after backward(), or an empty matrix.
  const Mat& grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].grad; }

  void backward(Var out, const Mat& seed) {
    require_shape(seed.rows() == value(out).rows() && seed.cols() == value(out).cols(),
                  "Tape::backward: seed shape mismatch");
    if (!requires_grad(out)) return;
    grad_ref(out) += seed;
    for (int i = out.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) {
        const Mat g = std::move(n.grad);
        n.grad = Mat();
        n.backward(*this, g);
      }
    }
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* ref = nullptr;
    Mat grad;
    bool requires_grad = false;
    Mat* sink = nullptr;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Elementary operations.

/// Row-independent product: each output row is accumulated from rows of b in
/// a fixed order, independent of how many rows a has.
template <typename A, typename B>
Mat mm(const A& a, const B& b) {
  Mat out = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    auto o = out.row(r);
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      const double v = a(r, i);
      if (v != 0.0) o.noalias() += v * b.row(i);
    }
  }
  return out;
}

/// acc += a^T g as a sum of per-row outer products.
inline void add_outer(Mat& acc, const Mat& a, const Mat& g) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      const double v = a(r, i);
      if (v != 0.0) acc.row(i).noalias() += v * g.row(r);
    }
  }
}

inline Var matmul(Tape& t, Var a, Var b) {
  require_shape(t.value(a).cols() == t.value(b).rows(), "matmul: inner dimension mismatch");
  Mat out = mm(t.value(a), t.value(b));
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.push(std::move(out), rg, [a, b](Tape& tp, const Mat& g) {
    if (tp.requires_grad(a)) tp.grad_ref(a).noalias() += g.lazyProduct(tp.value(b).transpose());
    if (tp.requires_grad(b)) add_outer(tp.grad_ref(b), tp.value(a), g);
  });
}

inline Var add(Tape& t, Var a, Var b) {
  require_shape(t.value(a).rows() == t.value(b).rows() && t.value(a).cols() == t.value(b).cols(),
                "add: shape mismatch");
  Mat out = t.value(a) + t.value(b);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.push(std::move(out), rg, [a, b](Tape& tp, const Mat& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

/// a (R x C) + row (1 x C) broadcast over rows.
inline Var add_row(Tape& t, Var a, Var row) {
  require_shape(t.value(row).rows() == 1 && t.value(row).cols() == t.value(a).cols(),
                "add_row: shape mismatch");
  Mat out = t.value(a).rowwise() + t.value(row).row(0);
  const bool rg = t.requires_grad(a) || t.requires_grad(row);
  return t.push(std::move(out), rg, [a, row](Tape& tp, const Mat& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) {
      Mat s = Mat::Zero(1, g.cols());
      for (Eigen::Index r = 0; r < g.rows(); ++r) s.row(0) += g.row(r);
      tp.grad_ref(row) += s;
    }
  });
}

inline Var scale(Tape& t, Var a, double s) {
  Mat out = t.value(a) * s;
  return t.push(std::move(out), t.requires_grad(a),
                [a, s](Tape& tp, const Mat& g) { tp.grad_ref(a) += g * s; });
}

inline Var silu(Tape& t, Var a) {
  const Mat& x = t.value(a);
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    out.data()[i] = v / (1.0 + std::exp(-v));
  }
  return t.push(std::move(out), t.requires_grad(a), [a](Tape& tp, const Mat& g) {
    const Mat& x = tp.value(a);
    Mat& ga = tp.grad_ref(a);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x.data()[i];
      const double s = 1.0 / (1.0 + std::exp(-v));
      ga.data()[i] += g.data()[i] * s * (1.0 + v * (1.0 - s));
    }
  });
}

/// Row-wise layer normalisation with learned gain and bias (1 x C each).
inline Var layer_norm(Tape& t, Var a, Var gain, Var bias, double eps = 1e-5) {
  const Mat& x = t.value(a);
  const Eigen::Index R = x.rows(), C = x.cols();
  require_shape(t.value(gain).cols() == C && t.value(bias).cols() == C, "layer_norm: shape");
  Mat xhat(R, C);
  std::vector<double> inv(static_cast<size_t>(R));
  for (Eigen::Index r = 0; r < R; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * inv[r];
  }
  Mat out = (xhat.array().rowwise() * t.value(gain).row(0).array()).rowwise() +
            t.value(bias).row(0).array();
  const bool rg = t.requires_grad(a) || t.requires_grad(gain) || t.requires_grad(bias);
  return t.push(std::move(out), rg,
                [a, gain, bias, xhat = std::move(xhat), inv = std::move(inv)](Tape& tp,
                                                                              const Mat& g) {
                  const Eigen::Index R = g.rows(), C = g.cols();
                  if (tp.requires_grad(gain)) {
                    Mat gg = Mat::Zero(1, C);
                    for (Eigen::Index r = 0; r < R; ++r) {
                      gg.row(0).array() += g.row(r).array() * xhat.row(r).array();
                    }
                    tp.grad_ref(gain) += gg;
                  }
                  if (tp.requires_grad(bias)) {
                    Mat gb = Mat::Zero(1, C);
                    for (Eigen::Index r = 0; r < R; ++r) gb.row(0) += g.row(r);
                    tp.grad_ref(bias) += gb;
                  }
                  if (tp.requires_grad(a)) {
                    const auto& w = tp.value(gain);
                    Mat& ga = tp.grad_ref(a);
                    for (Eigen::Index r = 0; r < R; ++r) {
                      const Eigen::ArrayXd dxh = (g.row(r).array() * w.row(0).array()).transpose();
                      const Eigen::ArrayXd xh = xhat.row(r).array().transpose();
                      const double m1 = dxh.mean();
                      const double m2 = (dxh * xh).mean();
                      ga.row(r).array() += (inv[r] * (dxh - m1 - xh * m2)).transpose();
                    }
                  }
                });
}

/// Multiplies row r by mask[r] (a constant).
inline Var mask_rows(Tape& t, Var a, const std::vector<double>& mask) {
  const Mat& x = t.value(a);
  require_shape(static_cast<Eigen::Index>(mask.size()) == x.rows(), "mask_rows: size mismatch");
  Mat out = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) *= mask[static_cast<size_t>(r)];
  return t.push(std::move(out), t.requires_grad(a), [a, mask](Tape& tp, const Mat& g) {
    Mat& ga = tp.grad_ref(a);
    for (Eigen::Index r = 0; r < g.rows(); ++r) ga.row(r) += g.row(r) * mask[static_cast<size_t>(r)];
  });
}

/// [a | b] column concatenation.
inline Var concat_cols(Tape& t, Var a, Var b) {
  const Mat& x = t.value(a);
  const Mat& y = t.value(b);
  require_shape(x.rows() == y.rows(), "concat_cols: row mismatch");
  Mat out(x.rows(), x.cols() + y.cols());
  out << x, y;
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const Eigen::Index ca = x.cols(), cb = y.cols();
  return t.push(std::move(out), rg, [a, b, ca, cb](Tape& tp, const Mat& g) {
    if (tp.requires_grad(a)) tp.grad_ref(a) += g.leftCols(ca);
    if (tp.requires_grad(b)) tp.grad_ref(b) += g.rightCols(cb);
  });
}

/// Stacks vars vertically.
inline Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = t.value(parts[0]).cols();
  bool rg = false;
  for (Var p : parts) {
    require_shape(t.value(p).cols() == cols, "concat_rows: column mismatch");
    rows += t.value(p).rows();
    rg = rg || t.requires_grad(p);
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, t.value(p).rows()) = t.value(p);
    r += t.value(p).rows();
  }
  return t.push(std::move(out), rg, [parts](Tape& tp, const Mat& g) {
    Eigen::Index r = 0;
    for (Var p : parts) {
      const Eigen::Index n = tp.value(p).rows();
      if (tp.requires_grad(p)) tp.grad_ref(p) += g.middleRows(r, n);
      r += n;
    }
  });
}

/// Mean over l of table[ids[l]] * (1 + pos[l]) (elementwise); a 1 x C result.
inline Var embed_mean(Tape& t, Var table, Var pos, const std::vector<int>& ids) {
  require(!ids.empty(), "embed_mean: empty id list");
  const Mat& e = t.value(table);
  const Mat& p = t.value(pos);
  require_shape(e.cols() == p.cols(), "embed_mean: width mismatch");
  require(static_cast<Eigen::Index>(ids.size()) <= p.rows(), "embed_mean: sequence too long");
  Mat out = Mat::Zero(1, e.cols());
  for (size_t l = 0; l < ids.size(); ++l) {
    require(ids[l] >= 0 && ids[l] < e.rows(), "embed_mean: token id out of range");
    const auto L = static_cast<Eigen::Index>(l);
    out.row(0).array() += e.row(ids[l]).array() * (1.0 + p.row(L).array());
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  out *= inv;
  const bool rg = t.requires_grad(table) || t.requires_grad(pos);
  return t.push(std::move(out), rg, [table, pos, ids, inv](Tape& tp, const Mat& g) {
    const Mat& ev = tp.value(table);
    const Mat& pv = tp.value(pos);
    for (size_t l = 0; l < ids.size(); ++l) {
      const auto L = static_cast<Eigen::Index>(l);
      if (tp.requires_grad(table)) {
        tp.grad_ref(table).row(ids[l]).array() += g.row(0).array() * (1.0 + pv.row(L).array()) * inv;
      }
      if (tp.requires_grad(pos)) {
        tp.grad_ref(pos).row(L).array() += g.row(0).array() * ev.row(ids[l]).array() * inv;
      }
    }
  });
}

/// Multi-head attention with relative key/value terms.
///
/// Queries come in G groups of n rows; memory in Gm groups of n rows (group g
/// reads memory group g*Gm/G). rel is (n*n) x r with row i*n+j describing
/// memory element j as seen from query i; its projections wk_rel / wv_rel
/// (r x d) are added to the keys and values.
inline Var rel_attention(Tape& t, Var q, Var km, Var vm, const Mat& rel, Var wk_rel, Var wv_rel,
                         int n, int heads) {
  const Mat& Q = t.value(q);
  const Mat& K = t.value(km);
  const Mat& V = t.value(vm);
  const Eigen::Index d = Q.cols();
  require(n > 0 && heads > 0 && d % heads == 0, "rel_attention: bad head configuration");
  require_shape(Q.rows() % n == 0 && K.rows() % n == 0 && K.rows() == V.rows() &&
                    K.cols() == d && V.cols() == d && rel.rows() == static_cast<Eigen::Index>(n) * n,
                "rel_attention: shape mismatch");
  const int G = static_cast<int>(Q.rows() / n);
  const int Gm = static_cast<int>(K.rows() / n);
  require(Gm >= 1 && G % Gm == 0, "rel_attention: memory groups must divide query groups");
  const Mat RK = mm(rel, t.value(wk_rel));  // (n*n) x d
  const Mat RV = mm(rel, t.value(wv_rel));
  const int dh = static_cast<int>(d / heads);
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat out = Mat::Zero(Q.rows(), d);
  // Attention weights per (group, head, i, j).
  std::vector<double> A(static_cast<size_t>(G) * heads * n * n);
  auto aidx = [&](int g, int h, int i, int j) {
    return ((static_cast<size_t>(g) * heads + h) * n + i) * n + j;
  };
  std::vector<double> s(static_cast<size_t>(n));
  for (int g = 0; g < G; ++g) {
    const int mg = g * Gm / G;
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n; ++i) {
        const auto qi = Q.row(g * n + i).segment(h * dh, dh);
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
          const auto kj = K.row(mg * n + j).segment(h * dh, dh);
          const auto rk = RK.row(i * n + j).segment(h * dh, dh);
          double dot = 0.0;
          for (int c = 0; c < dh; ++c) dot += qi[c] * (kj[c] + rk[c]);
          s[j] = dot * sc;
          mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (int j = 0; j < n; ++j) {
          s[j] = std::exp(s[j] - mx);
          z += s[j];
        }
        auto orow = out.row(g * n + i).segment(h * dh, dh);
        for (int j = 0; j < n; ++j) {
          const double a = s[j] / z;
          A[aidx(g, h, i, j)] = a;
          orow += a * (V.row(mg * n + j).segment(h * dh, dh) + RV.row(i * n + j).segment(h * dh, dh));
        }
      }
    }
  }
  const bool rg = t.requires_grad(q) || t.requires_grad(km) || t.requires_grad(vm) ||
                  t.requires_grad(wk_rel) || t.requires_grad(wv_rel);
  return t.push(
      std::move(out), rg,
      [q, km, vm, wk_rel, wv_rel, rel, RK, RV, A = std::move(A), n, heads, G, Gm, dh, sc](
          Tape& tp, const Mat& g) {
        const Mat& Q = tp.value(q);
        const Mat& K = tp.value(km);
        const Mat& V = tp.value(vm);
        const Eigen::Index d = Q.cols();
        Mat dQ = Mat::Zero(Q.rows(), d);
        Mat dK = Mat::Zero(K.rows(), d);
        Mat dV = Mat::Zero(V.rows(), d);
        Mat dRK = Mat::Zero(RK.rows(), d);
        Mat dRV = Mat::Zero(RV.rows(), d);
        std::vector<double> da(static_cast<size_t>(n));
        auto aidx = [&](int gg, int h, int i, int j) {
          return ((static_cast<size_t>(gg) * heads + h) * n + i) * n + j;
        };
        for (int gg = 0; gg < G; ++gg) {
          const int mg = gg * Gm / G;
          for (int h = 0; h < heads; ++h) {
            for (int i = 0; i < n; ++i) {
              const auto go = g.row(gg * n + i).segment(h * dh, dh);
              double dot_a = 0.0;
              for (int j = 0; j < n; ++j) {
                const double a = A[aidx(gg, h, i, j)];
                const auto vj = V.row(mg * n + j).segment(h * dh, dh);
                const auto rv = RV.row(i * n + j).segment(h * dh, dh);
                double v = 0.0;
                for (int c = 0; c < dh; ++c) v += go[c] * (vj[c] + rv[c]);
                da[j] = v;
                dot_a += a * v;
                dV.row(mg * n + j).segment(h * dh, dh) += a * go;
                dRV.row(i * n + j).segment(h * dh, dh) += a * go;
              }
              const auto qi = Q.row(gg * n + i).segment(h * dh, dh);
              for (int j = 0; j < n; ++j) {
                const double ds = A[aidx(gg, h, i, j)] * (da[j] - dot_a) * sc;
                if (ds == 0.0) continue;
                const auto kj = K.row(mg * n + j).segment(h * dh, dh);
                const auto rk = RK.row(i * n + j).segment(h * dh, dh);
                dQ.row(gg * n + i).segment(h * dh, dh) += ds * (kj + rk);
                dK.row(mg * n + j).segment(h * dh, dh) += ds * qi;
                dRK.row(i * n + j).segment(h * dh, dh) += ds * qi;
              }
            }
          }
        }
        tp.accumulate(q, dQ);
        tp.accumulate(km, dK);
        tp.accumulate(vm, dV);
        if (tp.requires_grad(wk_rel)) add_outer(tp.grad_ref(wk_rel), rel, dRK);
        if (tp.requires_grad(wv_rel)) add_outer(tp.grad_ref(wv_rel), rel, dRV);
      });
}

}  // namespace langsim::ad
