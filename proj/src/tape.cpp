#include "graphtax/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "graphtax/error.hpp"

namespace graphtax {

VarId Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.grad = Tensor(n.value.rows, n.value.cols, 0.0);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size()) - 1;
}

void Tape::check_finite(const Tensor& t, const char* op) const {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite result");
}

const Tensor& Tape::grad(VarId id) const {
  const Node& n = nodes_.at(id);
  if (!n.needs_grad) throw InputError("tape: gradient requested for non-differentiable node");
  return n.grad;
}

VarId Tape::constant(Tensor v) { return push(std::move(v), false); }

VarId Tape::input(Tensor v) { return push(std::move(v), true); }

VarId Tape::param(int index) {
  if (params_ == nullptr) throw InputError("tape: no parameter store bound");
  int id = push(params_->entries.at(index).value, true);
  nodes_[id].param_binding = index;
  return id;
}

VarId Tape::matmul(VarId a, VarId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  Tensor out(av.rows, bv.cols);
  kernels::matmul(av, bv, out);
  check_finite(out, "matmul");
  bool ng = needs(a) || needs(b);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, b, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& avv = t.nodes_[a].value;
      const Tensor& bvv = t.nodes_[b].value;
      if (t.needs(a)) {
        Tensor bt(bvv.cols, bvv.rows);
        kernels::transpose(bvv, bt);
        Tensor da(g.rows, bt.cols);
        kernels::matmul(g, bt, da);
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < da.size(); ++i) ga.data[i] += da.data[i];
      }
      if (t.needs(b)) {
        Tensor at(avv.cols, avv.rows);
        kernels::transpose(avv, at);
        Tensor db(at.rows, g.cols);
        kernels::matmul(at, g, db);
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < db.size(); ++i) gb.data[i] += db.data[i];
      }
    };
  }
  return id;
}

VarId Tape::block_mul(const std::vector<Tensor>* blocks, const BatchLayout* layout, VarId h) {
  const Tensor& hv = value(h);
  Tensor out(hv.rows, hv.cols);
  kernels::block_diag_mul(*blocks, *layout, hv, out);
  check_finite(out, "block_mul");
  bool ng = needs(h);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [blocks, layout, h, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      Tensor dh(g.rows, g.cols);
      kernels::block_diag_mul(*blocks, *layout, g, dh);  // blocks symmetric
      Tensor& ha = t.grad_mut(h);
      for (int i = 0; i < dh.size(); ++i) ha.data[i] += dh.data[i];
    };
  }
  return id;
}

VarId Tape::add(VarId a, VarId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw InputError("add: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  check_finite(out, "add");
  bool ng = needs(a) || needs(b);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, b, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      if (t.needs(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
      }
      if (t.needs(b)) {
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
      }
    };
  }
  return id;
}

VarId Tape::sub(VarId a, VarId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw InputError("sub: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
  check_finite(out, "sub");
  bool ng = needs(a) || needs(b);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, b, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      if (t.needs(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
      }
      if (t.needs(b)) {
        Tensor& gb = t.grad_mut(b);
        for (int i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
      }
    };
  }
  return id;
}

VarId Tape::scale(VarId a, double c) {
  Tensor out = value(a);
  for (double& x : out.data) x *= c;
  check_finite(out, "scale");
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, c, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      Tensor& ga = t.grad_mut(a);
      for (int i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    };
  }
  return id;
}

VarId Tape::add_row_broadcast(VarId a, VarId bias) {
  const Tensor& av = value(a);
  const Tensor& bv = value(bias);
  if (bv.rows != 1 || bv.cols != av.cols) throw InputError("add_row_broadcast: bias must be 1 x cols");
  Tensor out = av;
  for (int i = 0; i < out.rows; ++i) {
    double* r = out.row_ptr(i);
    for (int j = 0; j < out.cols; ++j) r[j] += bv.data[j];
  }
  check_finite(out, "add_row_broadcast");
  bool ng = needs(a) || needs(bias);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, bias, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      if (t.needs(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
      }
      if (t.needs(bias)) {
        Tensor& gb = t.grad_mut(bias);
        for (int i = 0; i < g.rows; ++i) {
          const double* r = g.row_ptr(i);
          for (int j = 0; j < g.cols; ++j) gb.data[j] += r[j];
        }
      }
    };
  }
  return id;
}

VarId Tape::relu(VarId a) {
  Tensor out = value(a);
  for (double& x : out.data)
    if (x < 0.0) x = 0.0;
  check_finite(out, "relu");
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& y = t.nodes_[id].value;
      Tensor& ga = t.grad_mut(a);
      for (int i = 0; i < g.size(); ++i)
        if (y.data[i] > 0.0) ga.data[i] += g.data[i];
    };
  }
  return id;
}

VarId Tape::leaky_relu(VarId a, double slope) {
  const Tensor& av = value(a);
  Tensor out = av;
  for (double& x : out.data)
    if (x < 0.0) x *= slope;
  check_finite(out, "leaky_relu");
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, slope, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.nodes_[a].value;
      Tensor& ga = t.grad_mut(a);
      for (int i = 0; i < g.size(); ++i)
        ga.data[i] += g.data[i] * (x.data[i] > 0.0 ? 1.0 : slope);
    };
  }
  return id;
}

VarId Tape::row_softmax(VarId a) {
  Tensor out = softmax_rows(value(a));
  check_finite(out, "row_softmax");
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& y = t.nodes_[id].value;
      Tensor& ga = t.grad_mut(a);
      for (int i = 0; i < g.rows; ++i) {
        const double* gr = g.row_ptr(i);
        const double* yr = y.row_ptr(i);
        double dot = 0.0;
        for (int j = 0; j < g.cols; ++j) dot += gr[j] * yr[j];
        double* gar = ga.row_ptr(i);
        for (int j = 0; j < g.cols; ++j) gar[j] += yr[j] * (gr[j] - dot);
      }
    };
  }
  return id;
}

VarId Tape::concat_cols(const std::vector<VarId>& xs) {
  if (xs.empty()) throw InputError("concat_cols: empty input list");
  int rows = value(xs[0]).rows;
  int cols = 0;
  for (VarId x : xs) {
    if (value(x).rows != rows) throw InputError("concat_cols: row mismatch");
    cols += value(x).cols;
  }
  Tensor out(rows, cols);
  int off = 0;
  for (VarId x : xs) {
    const Tensor& xv = value(x);
    for (int i = 0; i < rows; ++i) {
      const double* src = xv.row_ptr(i);
      double* dst = out.row_ptr(i) + off;
      for (int j = 0; j < xv.cols; ++j) dst[j] = src[j];
    }
    off += xv.cols;
  }
  bool ng = false;
  for (VarId x : xs) ng = ng || needs(x);
  VarId id = push(std::move(out), ng);
  if (ng) {
    std::vector<VarId> parents = xs;
    nodes_[id].back = [parents, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      int off2 = 0;
      for (VarId x : parents) {
        const Tensor& xv = t.nodes_[x].value;
        if (t.needs(x)) {
          Tensor& gx = t.grad_mut(x);
          for (int i = 0; i < g.rows; ++i) {
            const double* src = g.row_ptr(i) + off2;
            double* dst = gx.row_ptr(i);
            for (int j = 0; j < xv.cols; ++j) dst[j] += src[j];
          }
        }
        off2 += xv.cols;
      }
    };
  }
  return id;
}

VarId Tape::dropout(VarId a, double p, std::mt19937_64& rng, bool train_mode) {
  if (p < 0.0 || p >= 1.0) throw InputError("dropout: p must be in [0, 1)");
  if (!train_mode || p == 0.0) return a;
  const Tensor& av = value(a);
  Tensor mask(av.rows, av.cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double keep = 1.0 - p;
  for (int i = 0; i < mask.size(); ++i) mask.data[i] = (u(rng) < keep) ? 1.0 / keep : 0.0;
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out.data[i] *= mask.data[i];
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    auto m = std::make_shared<Tensor>(std::move(mask));
    nodes_[id].back = [a, m, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      Tensor& ga = t.grad_mut(a);
      for (int i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * m->data[i];
    };
  }
  return id;
}

VarId Tape::segment_mean(VarId a, const BatchLayout* layout) {
  const Tensor& av = value(a);
  int g = layout->num_graphs();
  if (layout->total_rows() != av.rows) throw InputError("segment_mean: layout row mismatch");
  Tensor out(g, av.cols, 0.0);
  for (int s = 0; s < g; ++s) {
    int lo = layout->offsets[s], hi = layout->offsets[s + 1];
    if (hi == lo) throw InputError("segment_mean: empty segment");
    double inv = 1.0 / static_cast<double>(hi - lo);
    double* orow = out.row_ptr(s);
    for (int i = lo; i < hi; ++i) {
      const double* r = av.row_ptr(i);
      for (int j = 0; j < av.cols; ++j) orow[j] += r[j];
    }
    for (int j = 0; j < av.cols; ++j) orow[j] *= inv;
  }
  check_finite(out, "segment_mean");
  bool ng = needs(a);
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [a, layout, id](Tape& t) {
      const Tensor& g2 = t.nodes_[id].grad;
      Tensor& ga = t.grad_mut(a);
      for (int s = 0; s < g2.rows; ++s) {
        int lo = layout->offsets[s], hi = layout->offsets[s + 1];
        double inv = 1.0 / static_cast<double>(hi - lo);
        const double* grow = g2.row_ptr(s);
        for (int i = lo; i < hi; ++i) {
          double* r = ga.row_ptr(i);
          for (int j = 0; j < g2.cols; ++j) r[j] += grow[j] * inv;
        }
      }
    };
  }
  return id;
}

VarId Tape::batchnorm(VarId x, VarId gamma, VarId beta, BatchNormState& state, bool train_mode) {
  const Tensor& xv = value(x);
  int m = xv.rows, c = xv.cols;
  const Tensor& gv = value(gamma);
  const Tensor& bv = value(beta);
  if (gv.rows != 1 || gv.cols != c || bv.rows != 1 || bv.cols != c)
    throw InputError("batchnorm: gamma/beta must be 1 x channels");
  if (state.running_mean.cols != c) throw InputError("batchnorm: state channel mismatch");

  Tensor out(m, c);
  bool ng = needs(x) || needs(gamma) || needs(beta);
  if (train_mode) {
    if (m < 1) throw InputError("batchnorm: train mode needs at least one row");
    Tensor mu(1, c, 0.0), var(1, c, 0.0), s(1, c, 0.0);
    for (int i = 0; i < m; ++i) {
      const double* r = xv.row_ptr(i);
      for (int j = 0; j < c; ++j) mu.data[j] += r[j];
    }
    for (int j = 0; j < c; ++j) mu.data[j] /= m;
    for (int i = 0; i < m; ++i) {
      const double* r = xv.row_ptr(i);
      for (int j = 0; j < c; ++j) {
        double d = r[j] - mu.data[j];
        var.data[j] += d * d;
      }
    }
    for (int j = 0; j < c; ++j) {
      var.data[j] /= m;
      s.data[j] = std::sqrt(var.data[j] + state.eps);
    }
    auto xhat = std::make_shared<Tensor>(m, c);
    for (int i = 0; i < m; ++i) {
      const double* r = xv.row_ptr(i);
      double* h = xhat->row_ptr(i);
      double* o = out.row_ptr(i);
      for (int j = 0; j < c; ++j) {
        h[j] = (r[j] - mu.data[j]) / s.data[j];
        o[j] = gv.data[j] * h[j] + bv.data[j];
      }
    }
    for (int j = 0; j < c; ++j) {
      state.running_mean.data[j] =
          (1.0 - state.momentum) * state.running_mean.data[j] + state.momentum * mu.data[j];
      state.running_var.data[j] =
          (1.0 - state.momentum) * state.running_var.data[j] + state.momentum * var.data[j];
    }
    check_finite(out, "batchnorm");
    VarId id = push(std::move(out), ng);
    if (ng) {
      auto sv = std::make_shared<Tensor>(std::move(s));
      nodes_[id].back = [x, gamma, beta, xhat, sv, m, c, id](Tape& t) {
        const Tensor& g = t.nodes_[id].grad;
        const Tensor& gvv = t.nodes_[gamma].value;
        if (t.needs(beta)) {
          Tensor& gb = t.grad_mut(beta);
          for (int i = 0; i < m; ++i) {
            const double* gr = g.row_ptr(i);
            for (int j = 0; j < c; ++j) gb.data[j] += gr[j];
          }
        }
        if (t.needs(gamma)) {
          Tensor& gg = t.grad_mut(gamma);
          for (int i = 0; i < m; ++i) {
            const double* gr = g.row_ptr(i);
            const double* h = xhat->row_ptr(i);
            for (int j = 0; j < c; ++j) gg.data[j] += gr[j] * h[j];
          }
        }
        if (t.needs(x)) {
          // dxhat = g * gamma; dx = (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat)) / s
          std::vector<double> sum1(c, 0.0), sum2(c, 0.0);
          for (int i = 0; i < m; ++i) {
            const double* gr = g.row_ptr(i);
            const double* h = xhat->row_ptr(i);
            for (int j = 0; j < c; ++j) {
              double dh = gr[j] * gvv.data[j];
              sum1[j] += dh;
              sum2[j] += dh * h[j];
            }
          }
          Tensor& gx = t.grad_mut(x);
          double invm = 1.0 / static_cast<double>(m);
          for (int i = 0; i < m; ++i) {
            const double* gr = g.row_ptr(i);
            const double* h = xhat->row_ptr(i);
            double* gxr = gx.row_ptr(i);
            for (int j = 0; j < c; ++j) {
              double dh = gr[j] * gvv.data[j];
              gxr[j] += (dh - sum1[j] * invm - h[j] * sum2[j] * invm) / sv->data[j];
            }
          }
        }
      };
    }
    return id;
  }

  // Eval mode: normalize by running statistics.
  auto s = std::make_shared<Tensor>(1, c);
  for (int j = 0; j < c; ++j) s->data[j] = std::sqrt(state.running_var.data[j] + state.eps);
  auto xhat = std::make_shared<Tensor>(m, c);
  for (int i = 0; i < m; ++i) {
    const double* r = xv.row_ptr(i);
    double* h = xhat->row_ptr(i);
    double* o = out.row_ptr(i);
    for (int j = 0; j < c; ++j) {
      h[j] = (r[j] - state.running_mean.data[j]) / s->data[j];
      o[j] = gv.data[j] * h[j] + bv.data[j];
    }
  }
  check_finite(out, "batchnorm");
  VarId id = push(std::move(out), ng);
  if (ng) {
    nodes_[id].back = [x, gamma, beta, xhat, s, m, c, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& gvv = t.nodes_[gamma].value;
      if (t.needs(beta)) {
        Tensor& gb = t.grad_mut(beta);
        for (int i = 0; i < m; ++i) {
          const double* gr = g.row_ptr(i);
          for (int j = 0; j < c; ++j) gb.data[j] += gr[j];
        }
      }
      if (t.needs(gamma)) {
        Tensor& gg = t.grad_mut(gamma);
        for (int i = 0; i < m; ++i) {
          const double* gr = g.row_ptr(i);
          const double* h = xhat->row_ptr(i);
          for (int j = 0; j < c; ++j) gg.data[j] += gr[j] * h[j];
        }
      }
      if (t.needs(x)) {
        Tensor& gx = t.grad_mut(x);
        for (int i = 0; i < m; ++i) {
          const double* gr = g.row_ptr(i);
          double* gxr = gx.row_ptr(i);
          for (int j = 0; j < c; ++j) gxr[j] += gr[j] * gvv.data[j] / s->data[j];
        }
      }
    };
  }
  return id;
}

VarId Tape::gat_attention(VarId p, VarId a_src, VarId a_dst, const NeighborLists* nbrs,
                          double slope) {
  const Tensor& pv = value(p);
  const Tensor& asv = value(a_src);
  const Tensor& adv = value(a_dst);
  int n = pv.rows, d = pv.cols;
  if (asv.rows != d || asv.cols != 1 || adv.rows != d || adv.cols != 1)
    throw InputError("gat_attention: attention vectors must be d x 1");
  if (static_cast<int>(nbrs->support.size()) != n)
    throw InputError("gat_attention: support size mismatch");

  // s_u = p_u . a_src, t_v = p_v . a_dst
  std::vector<double> s(n, 0.0), tt(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* r = pv.row_ptr(i);
    double su = 0.0, tu = 0.0;
    for (int j = 0; j < d; ++j) {
      su += r[j] * asv.data[j];
      tu += r[j] * adv.data[j];
    }
    s[i] = su;
    tt[i] = tu;
  }

  auto alpha = std::make_shared<std::vector<std::vector<double>>>(n);
  Tensor out(n, d, 0.0);
  for (int u = 0; u < n; ++u) {
    const auto& supp = nbrs->support[u];
    if (supp.empty()) throw InputError("gat_attention: empty support row");
    std::vector<double>& au = (*alpha)[u];
    au.resize(supp.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < supp.size(); ++k) {
      double z = s[u] + tt[supp[k]];
      double e = z > 0.0 ? z : slope * z;
      au[k] = e;
      if (e > mx) mx = e;
    }
    double denom = 0.0;
    for (double& e : au) {
      e = std::exp(e - mx);
      denom += e;
    }
    double* orow = out.row_ptr(u);
    for (size_t k = 0; k < supp.size(); ++k) {
      au[k] /= denom;
      const double* rp = pv.row_ptr(supp[k]);
      for (int j = 0; j < d; ++j) orow[j] += au[k] * rp[j];
    }
  }
  check_finite(out, "gat_attention");

  bool ng = needs(p) || needs(a_src) || needs(a_dst);
  VarId id = push(std::move(out), ng);
  if (ng) {
    auto scap = std::make_shared<std::vector<double>>(std::move(s));
    auto tcap = std::make_shared<std::vector<double>>(std::move(tt));
    nodes_[id].back = [p, a_src, a_dst, nbrs, slope, alpha, scap, tcap, n, d, id](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& pvv = t.nodes_[p].value;
      std::vector<double> ds(n, 0.0), dt(n, 0.0);
      Tensor dp(n, d, 0.0);
      for (int u = 0; u < n; ++u) {
        const auto& supp = nbrs->support[u];
        const auto& au = (*alpha)[u];
        const double* gr = g.row_ptr(u);
        // d(alpha_uk) = g_u . p_{supp[k]}; softmax backward; leaky-relu backward
        std::vector<double> dalpha(supp.size());
        double beta_sum = 0.0;
        for (size_t k = 0; k < supp.size(); ++k) {
          const double* rp = pvv.row_ptr(supp[k]);
          double dot = 0.0;
          for (int j = 0; j < d; ++j) dot += gr[j] * rp[j];
          dalpha[k] = dot;
          beta_sum += au[k] * dot;
          // dP_v += alpha_uk * g_u
          double* dpr = dp.row_ptr(supp[k]);
          for (int j = 0; j < d; ++j) dpr[j] += au[k] * gr[j];
        }
        for (size_t k = 0; k < supp.size(); ++k) {
          double de = au[k] * (dalpha[k] - beta_sum);
          double z = (*scap)[u] + (*tcap)[supp[k]];
          double dz = de * (z > 0.0 ? 1.0 : slope);
          ds[u] += dz;
          dt[supp[k]] += dz;
        }
      }
      // s = P a_src, t = P a_dst
      if (t.needs(p)) {
        const Tensor& asvv = t.nodes_[a_src].value;
        const Tensor& advv = t.nodes_[a_dst].value;
        Tensor& gp = t.grad_mut(p);
        for (int i = 0; i < n; ++i) {
          double* gpr = gp.row_ptr(i);
          const double* dpr = dp.row_ptr(i);
          for (int j = 0; j < d; ++j)
            gpr[j] += dpr[j] + ds[i] * asvv.data[j] + dt[i] * advv.data[j];
        }
      }
      if (t.needs(a_src)) {
        Tensor& ga = t.grad_mut(a_src);
        for (int i = 0; i < n; ++i) {
          const double* rp = pvv.row_ptr(i);
          for (int j = 0; j < d; ++j) ga.data[j] += ds[i] * rp[j];
        }
      }
      if (t.needs(a_dst)) {
        Tensor& ga = t.grad_mut(a_dst);
        for (int i = 0; i < n; ++i) {
          const double* rp = pvv.row_ptr(i);
          for (int j = 0; j < d; ++j) ga.data[j] += dt[i] * rp[j];
        }
      }
    };
  }
  return id;
}

VarId Tape::cross_entropy(VarId logits, const std::vector<int>* labels,
                          const std::vector<int>* rows) {
  const Tensor& lv = value(logits);
  int n = lv.rows, c = lv.cols;
  if (static_cast<int>(labels->size()) != n) throw InputError("cross_entropy: label count mismatch");
  std::vector<int> sel;
  if (rows != nullptr) {
    sel = *rows;
  } else {
    sel.resize(n);
    for (int i = 0; i < n; ++i) sel[i] = i;
  }
  if (sel.empty()) throw InputError("cross_entropy: no rows selected");
  for (int r : sel) {
    if (r < 0 || r >= n) throw InputError("cross_entropy: row index out of range");
    int y = (*labels)[r];
    if (y < 0 || y >= c) throw InputError("cross_entropy: label id out of range");
  }

  auto probs = std::make_shared<Tensor>(static_cast<int>(sel.size()), c);
  double loss = 0.0;
  for (size_t k = 0; k < sel.size(); ++k) {
    const double* z = lv.row_ptr(sel[k]);
    double mx = z[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, z[j]);
    double denom = 0.0;
    for (int j = 0; j < c; ++j) denom += std::exp(z[j] - mx);
    double lse = mx + std::log(denom);
    loss += lse - z[(*labels)[sel[k]]];
    double* pr = probs->row_ptr(static_cast<int>(k));
    for (int j = 0; j < c; ++j) pr[j] = std::exp(z[j] - lse);
  }
  loss /= static_cast<double>(sel.size());
  Tensor out(1, 1, loss);
  check_finite(out, "cross_entropy");
  bool ng = needs(logits);
  VarId id = push(std::move(out), ng);
  if (ng) {
    auto selcap = std::make_shared<std::vector<int>>(std::move(sel));
    nodes_[id].back = [logits, labels, probs, selcap, c, id](Tape& t) {
      double gscale = t.nodes_[id].grad.data[0] / static_cast<double>(selcap->size());
      Tensor& gl = t.grad_mut(logits);
      for (size_t k = 0; k < selcap->size(); ++k) {
        int r = (*selcap)[k];
        const double* pr = probs->row_ptr(static_cast<int>(k));
        double* gr = gl.row_ptr(r);
        for (int j = 0; j < c; ++j) gr[j] += gscale * pr[j];
        gr[(*labels)[r]] -= gscale;
      }
    };
  }
  return id;
}

void Tape::backward(VarId loss) {
  Node& top = nodes_.at(loss);
  if (!top.needs_grad) throw InputError("backward: loss does not require gradients");
  if (top.value.rows != 1 || top.value.cols != 1) throw InputError("backward: loss must be 1 x 1");
  top.grad.data[0] = 1.0;
  for (int i = loss; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.back) n.back(*this);
    if (n.param_binding >= 0) {
      Tensor& pg = params_->entries[n.param_binding].grad;
      for (int k = 0; k < n.grad.size(); ++k) pg.data[k] += n.grad.data[k];
    }
  }
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  for (int i = 0; i < out.rows; ++i) {
    double* r = out.row_ptr(i);
    double mx = r[0];
    for (int j = 1; j < out.cols; ++j) mx = std::max(mx, r[j]);
    double denom = 0.0;
    for (int j = 0; j < out.cols; ++j) {
      r[j] = std::exp(r[j] - mx);
      denom += r[j];
    }
    for (int j = 0; j < out.cols; ++j) r[j] /= denom;
  }
  return out;
}

}  // namespace graphtax
