#include "doanav/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace doanav::ad {
namespace {

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw std::invalid_argument("Var not attached to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("operands live on different tapes");
  return tape_of(a);
}

bool needs(Var a) { return a.tape->requires_grad(a.id); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

// c (m x n) += a (m x k) * b (k x n)
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c (m x k) += a (m x n) * b^T where b is (k x n)
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                 std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
      ci[p] += s;
    }
  }
}

// c (k x n) += a^T * b where a is (m x k), b is (m x n)
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

template <typename F, typename D>
Var unary(Var x, F forward, D derivative) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = forward(xv[i]);
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, derivative](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    const Tensor& xv = tp.value(xid);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * derivative(xv[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ " + av.shape_string() + " * " +
                         bv.shape_string());
  }
  Tensor out(m, n);
  gemm_acc(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  const std::size_t aid = a.id, bid = b.id;
  const bool ga = needs(a), gb = needs(b);
  return t.push(std::move(out), ga || gb, [aid, bid, ga, gb, m, k, n](Tape& tp, std::size_t self) {
    const double* g = tp.grad(self).data().data();
    if (ga) {
      // dA = dC * B^T
      gemm_nt_acc(g, tp.value(bid).data().data(), tp.grad_slot(aid).data().data(), m, n, k);
    }
    if (gb) {
      // dB = A^T * dC
      gemm_tn_acc(tp.value(aid).data().data(), g, tp.grad_slot(bid).data().data(), m, k, n);
    }
  });
}

Var transpose(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = xv(i, j);
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j * m + i];
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t aid = a.id, bid = b.id;
  const bool ga = needs(a), gb = needs(b);
  return t.push(std::move(out), ga || gb, [aid, bid, ga, gb](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (ga) {
      Tensor& s = tp.grad_slot(aid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
    }
    if (gb) {
      Tensor& s = tp.grad_slot(bid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  const bool ga = needs(a), gb = needs(b);
  return t.push(std::move(out), ga || gb, [aid, bid, ga, gb](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (ga) {
      const Tensor& bv = tp.value(bid);
      Tensor& s = tp.grad_slot(aid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * bv[i];
    }
    if (gb) {
      const Tensor& av = tp.value(aid);
      Tensor& s = tp.grad_slot(bid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * av[i];
    }
  });
}

Var add_row_bias(Var x, Var bias) {
  Tape& t = tape_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (bv.size() != n) {
    throw DimensionError("add_row_bias: bias " + bv.shape_string() + " for input " +
                         xv.shape_string());
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  const std::size_t xid = x.id, bid = bias.id;
  const bool gx = needs(x), gb = needs(bias);
  return t.push(std::move(out), gx || gb, [xid, bid, gx, gb, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (gx) {
      Tensor& s = tp.grad_slot(xid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
    }
    if (gb) {
      Tensor& s = tp.grad_slot(bid);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) s[j] += g[i * n + j];
    }
  });
}

Var scale(Var x, double s) {
  Tape& t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v *= s;
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, s](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s;
  });
}

Var scale_by(Var x, Var s) {
  Tape& t = tape_of(x, s);
  if (s.value().size() != 1) throw DimensionError("scale_by: scale must be 1x1");
  const double sv = s.value()[0];
  Tensor out = x.value();
  for (double& v : out.values()) v *= sv;
  const std::size_t xid = x.id, sid = s.id;
  const bool gx = needs(x), gs = needs(s);
  return t.push(std::move(out), gx || gs, [xid, sid, gx, gs](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv = tp.value(xid);
    const double sv = tp.value(sid)[0];
    if (gx) {
      Tensor& s = tp.grad_slot(xid);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * sv;
    }
    if (gs) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      tp.grad_slot(sid)[0] += acc;
    }
  });
}

Var scale_rows(Var x, Var w) {
  Tape& t = tape_of(x, w);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (wv.size() != m) {
    throw DimensionError("scale_rows: weights " + wv.shape_string() + " for input " +
                         xv.shape_string());
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= wv[i];
  const std::size_t xid = x.id, wid = w.id;
  const bool gx = needs(x), gw = needs(w);
  return t.push(std::move(out), gx || gw, [xid, wid, gx, gw, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (gx) {
      const Tensor& wv = tp.value(wid);
      Tensor& s = tp.grad_slot(xid);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) s[i * n + j] += g[i * n + j] * wv[i];
    }
    if (gw) {
      const Tensor& xv = tp.value(xid);
      Tensor& s = tp.grad_slot(wid);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * xv[i * n + j];
        s[i] += acc;
      }
    }
  });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var softmax_rows(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (n == 0) throw DimensionError("softmax_rows: empty rows");
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = &xv.data()[i * n];
    double* yi = &out.data()[i * n];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(xi[j])) throw NumericError("softmax_rows: non-finite input");
      mx = std::max(mx, xi[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (yi[j] = std::exp(xi[j] - mx));
    for (std::size_t j = 0; j < n; ++j) yi[j] /= z;
  }
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

Var log_softmax_rows(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (n == 0) throw DimensionError("log_softmax_rows: empty rows");
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = &xv.data()[i * n];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(xi[j])) throw NumericError("log_softmax_rows: non-finite input");
      mx = std::max(mx, xi[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(xi[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xi[j] - lz;
  }
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < m; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += g[i * n + j];
      for (std::size_t j = 0; j < n; ++j)
        gx[i * n + j] += g[i * n + j] - std::exp(y[i * n + j]) * gs;
    }
  });
}

Var mean_pool_rows(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (m == 0) throw DimensionError("mean_pool_rows: no rows");
  Tensor out(1, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += xv[i * n + j];
  for (double& v : out.values()) v /= static_cast<double>(m);
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j] * inv;
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t xid = x.id;
  return t.push(Tensor::scalar(s), needs(x), [xid](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad_slot(xid).values()) v += g;
  });
}

Var concat(std::span<const Var> xs, int axis) {
  if (xs.empty()) throw DimensionError("concat: no inputs");
  if (axis != 0 && axis != 1) throw DimensionError("concat: axis must be 0 or 1");
  Tape& t = tape_of(xs[0]);
  bool any = false;
  std::size_t rows = 0, cols = 0;
  for (const Var& v : xs) {
    tape_of(xs[0], v);
    const Tensor& tv = v.value();
    any = any || needs(v);
    if (axis == 0) {
      if (rows == 0 && cols == 0) cols = tv.cols();
      if (tv.cols() != cols) throw DimensionError("concat axis 0: column counts differ");
      rows += tv.rows();
    } else {
      if (rows == 0 && cols == 0) rows = tv.rows();
      if (tv.rows() != rows) throw DimensionError("concat axis 1: row counts differ");
      cols += tv.cols();
    }
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& v : xs) {
    const Tensor& tv = v.value();
    ids.push_back(v.id);
    offsets.push_back(off);
    for (std::size_t i = 0; i < tv.rows(); ++i)
      for (std::size_t j = 0; j < tv.cols(); ++j) {
        if (axis == 0)
          out(off + i, j) = tv(i, j);
        else
          out(i, off + j) = tv(i, j);
      }
    off += axis == 0 ? tv.rows() : tv.cols();
  }
  return t.push(std::move(out), any,
                [ids, offsets, axis, cols](Tape& tp, std::size_t self) {
                  const Tensor& g = tp.grad(self);
                  for (std::size_t k = 0; k < ids.size(); ++k) {
                    if (!tp.requires_grad(ids[k])) continue;
                    Tensor& gx = tp.grad_slot(ids[k]);
                    const std::size_t r = gx.rows(), c = gx.cols();
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < c; ++j) {
                        gx[i * c + j] += axis == 0 ? g[(offsets[k] + i) * cols + j]
                                                   : g[i * cols + offsets[k] + j];
                      }
                  }
                });
}

Var concat(std::initializer_list<Var> xs, int axis) {
  return concat(std::span<const Var>(xs.begin(), xs.size()), axis);
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (begin + count > n) throw DimensionError("slice_cols: range out of bounds");
  Tensor out(m, count);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = xv[i * n + begin + j];
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, m, n, begin, count](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) gx[i * n + begin + j] += g[i * count + j];
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor out(rows.size(), n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= m) throw DimensionError("gather_rows: index out of range");
    for (std::size_t j = 0; j < n; ++j) out(k, j) = xv[rows[k] * n + j];
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, idx, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t j = 0; j < n; ++j) gx[idx[k] * n + j] += g[k * n + j];
  });
}

Var row(Var x, std::size_t r) {
  const std::size_t idx[1] = {r};
  return gather_rows(x, idx);
}

Var scatter_cols(Var x, std::span<const std::size_t> index, std::size_t n) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  if (xv.rows() != 1 || xv.cols() != index.size()) {
    throw DimensionError("scatter_cols: expects 1 x k input matching index length");
  }
  Tensor out(1, n);
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= n) throw DimensionError("scatter_cols: index out of range");
    out[index[k]] = xv[k];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, idx](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t k = 0; k < idx.size(); ++k) gx[k] += g[idx[k]];
  });
}

Var reshape(Var x, std::size_t rows, std::size_t cols) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  if (rows * cols != xv.size()) throw DimensionError("reshape: element count changes");
  Tensor out({rows, cols}, xv.values());
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var pick(Var x, std::size_t i) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  if (i >= xv.size()) throw DimensionError("pick: index out of range");
  const std::size_t xid = x.id;
  return t.push(Tensor::scalar(xv[i]), needs(x), [xid, i](Tape& tp, std::size_t self) {
    tp.grad_slot(xid)[i] += tp.grad(self)[0];
  });
}

Var detach(Var x) { return tape_of(x).constant(x.value()); }

Var dropout(Var x, double rate, std::mt19937_64& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv = 1.0 / (1.0 - rate);
  Tensor mask(xv.shape());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = keep(rng) ? inv : 0.0;
    out[i] = xv[i] * mask[i];
  }
  const std::size_t xid = x.id;
  return t.push(std::move(out), needs(x), [xid, mask = std::move(mask)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

std::pair<Var, Var> lstm_step(const LstmWeights& w, Var x, Var h, Var c) {
  const std::size_t hidden = h.value().cols();
  if (w.hidden_weights.rows() != hidden || w.hidden_weights.cols() != 4 * hidden ||
      w.input_weights.cols() != 4 * hidden || w.bias.value().size() != 4 * hidden ||
      c.value().cols() != hidden) {
    throw DimensionError("lstm_step: gate parameter shapes inconsistent with hidden size " +
                         std::to_string(hidden));
  }
  Var gates = add_row_bias(add(matmul(x, w.input_weights), matmul(h, w.hidden_weights)), w.bias);
  Var i = sigmoid(slice_cols(gates, 0, hidden));
  Var f = sigmoid(slice_cols(gates, hidden, hidden));
  Var g = tanh(slice_cols(gates, 2 * hidden, hidden));
  Var o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  Var c_next = add(mul(f, c), mul(i, g));
  Var h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

}  // namespace doanav::ad
