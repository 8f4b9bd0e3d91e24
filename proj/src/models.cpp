#include "graphtax/models.hpp"

#include <algorithm>
#include <cmath>

#include "graphtax/error.hpp"

namespace graphtax {

std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::GCN: return "gcn";
    case ModelKind::GAT: return "gat";
    case ModelKind::GIN: return "gin";
    case ModelKind::Cheb: return "cheb";
  }
  throw InputError("model_name: bad kind");
}

ModelKind parse_model(const std::string& token) {
  if (token == "gcn") return ModelKind::GCN;
  if (token == "gat") return ModelKind::GAT;
  if (token == "gin") return ModelKind::GIN;
  if (token == "cheb") return ModelKind::Cheb;
  throw InputError("unknown model: " + token);
}

const std::vector<ModelKind>& all_models() {
  static const std::vector<ModelKind> kinds = {ModelKind::GCN, ModelKind::GAT, ModelKind::GIN,
                                               ModelKind::Cheb};
  return kinds;
}

Tensor adjacency_dense(const Graph& g) {
  Tensor a(g.n, g.n, 0.0);
  for (auto [u, v] : g.edges) {
    a.at(u, v) = 1.0;
    a.at(v, u) = 1.0;
  }
  return a;
}

Tensor gcn_propagation(const Graph& g) {
  std::vector<int> deg = degrees(g);
  std::vector<double> dinv(g.n);
  for (int i = 0; i < g.n; ++i) dinv[i] = 1.0 / std::sqrt(static_cast<double>(deg[i] + 1));
  Tensor s(g.n, g.n, 0.0);
  for (int i = 0; i < g.n; ++i) s.at(i, i) = dinv[i] * dinv[i];
  for (auto [u, v] : g.edges) {
    double w = dinv[u] * dinv[v];
    s.at(u, v) = w;
    s.at(v, u) = w;
  }
  return s;
}

Tensor cheb_scaled_laplacian(const Graph& g) {
  std::vector<int> deg = degrees(g);
  std::vector<double> dinv(g.n, 0.0);
  for (int i = 0; i < g.n; ++i)
    if (deg[i] > 0) dinv[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]));
  Tensor lt(g.n, g.n, 0.0);
  for (auto [u, v] : g.edges) {
    double w = -dinv[u] * dinv[v];
    lt.at(u, v) = w;
    lt.at(v, u) = w;
  }
  return lt;
}

PreparedBatch prepare_batch(const std::vector<const Graph*>& graphs, ModelKind kind) {
  if (graphs.empty()) throw InputError("prepare_batch: empty batch");
  int d = graphs[0]->features.cols;
  int total = 0;
  for (const Graph* g : graphs) {
    if (g->n == 0) throw InputError("prepare_batch: empty graph in batch");
    if (g->features.cols != d) throw InputError("prepare_batch: feature width mismatch");
    total += g->n;
  }

  PreparedBatch b;
  b.layout.offsets.resize(graphs.size() + 1);
  b.layout.offsets[0] = 0;
  for (size_t i = 0; i < graphs.size(); ++i)
    b.layout.offsets[i + 1] = b.layout.offsets[i] + graphs[i]->n;

  b.features = Tensor(total, d);
  for (size_t i = 0; i < graphs.size(); ++i) {
    const Tensor& f = graphs[i]->features;
    int off = b.layout.offsets[i];
    for (int r = 0; r < f.rows; ++r)
      for (int c = 0; c < d; ++c) b.features.at(off + r, c) = f.at(r, c);
  }

  if (kind == ModelKind::GAT) {
    b.nbrs.support.resize(total);
    for (size_t i = 0; i < graphs.size(); ++i) {
      const Graph* g = graphs[i];
      int off = b.layout.offsets[i];
      auto adj = adjacency_lists(*g);
      for (int u = 0; u < g->n; ++u) {
        auto& supp = b.nbrs.support[off + u];
        supp.reserve(adj[u].size() + 1);
        supp.push_back(off + u);
        for (int v : adj[u]) supp.push_back(off + v);
      }
    }
  } else {
    b.blocks.reserve(graphs.size());
    for (const Graph* g : graphs) {
      switch (kind) {
        case ModelKind::GCN: b.blocks.push_back(gcn_propagation(*g)); break;
        case ModelKind::GIN: b.blocks.push_back(adjacency_dense(*g)); break;
        case ModelKind::Cheb: b.blocks.push_back(cheb_scaled_laplacian(*g)); break;
        case ModelKind::GAT: break;
      }
    }
  }

  b.graph_labels.reserve(graphs.size());
  for (const Graph* g : graphs) b.graph_labels.push_back(g->graph_label.value_or(-1));
  b.node_labels.reserve(total);
  for (const Graph* g : graphs) {
    if (g->node_labels) {
      for (int y : *g->node_labels) b.node_labels.push_back(y);
    } else {
      b.node_labels.insert(b.node_labels.end(), g->n, -1);
    }
  }
  return b;
}

namespace {

// Registers the weights of one conv layer (in -> out) and returns their ids.
std::vector<int> add_conv_params(ParamStore& p, const ModelConfig& cfg, int layer, int in,
                                 int out, std::mt19937_64& rng) {
  std::string base = "conv" + std::to_string(layer) + ".";
  std::vector<int> ids;
  switch (cfg.kind) {
    case ModelKind::GCN:
      ids.push_back(p.add(base + "w", glorot_uniform(in, out, rng)));
      break;
    case ModelKind::GIN:
      ids.push_back(p.add(base + "mlp.w1", glorot_uniform(in, cfg.hidden_dim, rng)));
      ids.push_back(p.add(base + "mlp.b1", Tensor(1, cfg.hidden_dim, 0.0)));
      ids.push_back(p.add(base + "mlp.w2", glorot_uniform(cfg.hidden_dim, out, rng)));
      ids.push_back(p.add(base + "mlp.b2", Tensor(1, out, 0.0)));
      break;
    case ModelKind::GAT: {
      int hd = out / cfg.gat_heads;
      for (int h = 0; h < cfg.gat_heads; ++h) {
        std::string hb = base + "head" + std::to_string(h) + ".";
        ids.push_back(p.add(hb + "w", glorot_uniform(in, hd, rng)));
        ids.push_back(p.add(hb + "a_src", glorot_uniform(hd, 1, rng)));
        ids.push_back(p.add(hb + "a_dst", glorot_uniform(hd, 1, rng)));
      }
      break;
    }
    case ModelKind::Cheb:
      for (int j = 0; j < cfg.cheb_order; ++j)
        ids.push_back(p.add(base + "w" + std::to_string(j), glorot_uniform(in, out, rng)));
      break;
  }
  return ids;
}

}  // namespace

GNNModel assemble(const ModelConfig& cfg, int in_dim, int num_classes, TaskKind task,
                  std::uint64_t seed) {
  if (in_dim < 1) throw InputError("assemble: input dim must be >= 1");
  if (num_classes < 2) throw InputError("assemble: need at least 2 classes");
  if (cfg.hidden_dim < 1 || cfg.num_conv_layers < 1) throw InputError("assemble: bad config");
  if (cfg.kind == ModelKind::GAT && cfg.hidden_dim % cfg.gat_heads != 0)
    throw InputError("assemble: hidden_dim must be divisible by gat_heads");
  if (cfg.kind == ModelKind::Cheb && cfg.cheb_order < 1)
    throw InputError("assemble: cheb_order must be >= 1");

  GNNModel m;
  m.cfg = cfg;
  m.task = task;
  m.in_dim = in_dim;
  m.num_classes = num_classes;

  std::mt19937_64 rng(seed);
  bool node_task = task != TaskKind::GraphClassification;
  int h = cfg.hidden_dim;

  if (node_task) {
    m.embed_w.push_back(m.params.add("embed.w1", glorot_uniform(in_dim, h, rng)));
    m.embed_b.push_back(m.params.add("embed.b1", Tensor(1, h, 0.0)));
    m.embed_w.push_back(m.params.add("embed.w2", glorot_uniform(h, h, rng)));
    m.embed_b.push_back(m.params.add("embed.b2", Tensor(1, h, 0.0)));
  }

  int conv_in = node_task ? h : in_dim;
  for (int l = 0; l < cfg.num_conv_layers; ++l) {
    int in = l == 0 ? conv_in : h;
    m.conv_w.push_back(add_conv_params(m.params, cfg, l, in, h, rng));
    m.bn_gamma.push_back(m.params.add("bn" + std::to_string(l) + ".gamma", Tensor(1, h, 1.0)));
    m.bn_beta.push_back(m.params.add("bn" + std::to_string(l) + ".beta", Tensor(1, h, 0.0)));
    m.bn.emplace_back(h);
  }
  if (conv_in != h) m.skip_w = m.params.add("skip.w", glorot_uniform(conv_in, h, rng));

  m.head_w.push_back(m.params.add("head.w1", glorot_uniform(h, h, rng)));
  m.head_b.push_back(m.params.add("head.b1", Tensor(1, h, 0.0)));
  m.head_w.push_back(m.params.add("head.w2", glorot_uniform(h, num_classes, rng)));
  m.head_b.push_back(m.params.add("head.b2", Tensor(1, num_classes, 0.0)));
  return m;
}

namespace {

VarId conv_apply(Tape& t, GNNModel& m, const PreparedBatch& b, int layer, VarId h) {
  const auto& ids = m.conv_w[layer];
  switch (m.cfg.kind) {
    case ModelKind::GCN: {
      VarId hw = t.matmul(h, t.param(ids[0]));
      return t.block_mul(&b.blocks, &b.layout, hw);
    }
    case ModelKind::GIN: {
      VarId agg = t.block_mul(&b.blocks, &b.layout, h);
      if (m.cfg.gin_eps != 0.0) {
        agg = t.add(t.scale(h, 1.0 + m.cfg.gin_eps), agg);
      } else {
        agg = t.add(h, agg);
      }
      VarId z = t.add_row_broadcast(t.matmul(agg, t.param(ids[0])), t.param(ids[1]));
      z = t.relu(z);
      return t.add_row_broadcast(t.matmul(z, t.param(ids[2])), t.param(ids[3]));
    }
    case ModelKind::GAT: {
      std::vector<VarId> heads;
      for (int hd = 0; hd < m.cfg.gat_heads; ++hd) {
        VarId p = t.matmul(h, t.param(ids[3 * hd]));
        heads.push_back(t.gat_attention(p, t.param(ids[3 * hd + 1]), t.param(ids[3 * hd + 2]),
                                        &b.nbrs, m.cfg.lrelu_slope));
      }
      return heads.size() == 1 ? heads[0] : t.concat_cols(heads);
    }
    case ModelKind::Cheb: {
      VarId out = t.matmul(h, t.param(ids[0]));  // T_0 = I
      if (m.cfg.cheb_order == 1) return out;
      VarId zprev = h;
      VarId z = t.block_mul(&b.blocks, &b.layout, h);  // T_1 = L~
      out = t.add(out, t.matmul(z, t.param(ids[1])));
      for (int j = 2; j < m.cfg.cheb_order; ++j) {
        VarId znext = t.sub(t.scale(t.block_mul(&b.blocks, &b.layout, z), 2.0), zprev);
        zprev = z;
        z = znext;
        out = t.add(out, t.matmul(z, t.param(ids[j])));
      }
      return out;
    }
  }
  throw InputError("conv_apply: bad kind");
}

[[noreturn]] void rethrow_in_layer(const std::string& where, const NumericError& e) {
  throw NumericError(where + ": " + e.what());
}

}  // namespace

VarId model_forward(Tape& t, GNNModel& m, const PreparedBatch& b, bool train_mode,
                    std::mt19937_64& rng) {
  if (b.features.cols != m.in_dim) throw InputError("forward: feature dim mismatch");
  bool node_task = m.task != TaskKind::GraphClassification;

  VarId h = t.constant(b.features);
  if (node_task) {
    try {
      h = t.add_row_broadcast(t.matmul(h, t.param(m.embed_w[0])), t.param(m.embed_b[0]));
      h = t.relu(h);
      h = t.add_row_broadcast(t.matmul(h, t.param(m.embed_w[1])), t.param(m.embed_b[1]));
    } catch (const NumericError& e) {
      rethrow_in_layer("embed-mlp", e);
    }
  }

  for (int l = 0; l < m.cfg.num_conv_layers; ++l) {
    std::string where = "conv layer " + std::to_string(l + 1) + " (" + model_name(m.cfg.kind) + ")";
    try {
      VarId hin = t.dropout(h, m.cfg.dropout, rng, train_mode);
      VarId z = conv_apply(t, m, b, l, hin);
      z = t.batchnorm(z, t.param(m.bn_gamma[l]), t.param(m.bn_beta[l]), m.bn[l], train_mode);
      z = t.relu(z);
      VarId skip = (l == 0 && m.skip_w >= 0) ? t.matmul(hin, t.param(m.skip_w)) : hin;
      h = t.add(z, skip);
    } catch (const NumericError& e) {
      rethrow_in_layer(where, e);
    }
  }

  try {
    if (!node_task) h = t.segment_mean(h, &b.layout);
    h = t.dropout(h, m.cfg.dropout, rng, train_mode);
    h = t.add_row_broadcast(t.matmul(h, t.param(m.head_w[0])), t.param(m.head_b[0]));
    h = t.relu(h);
    h = t.add_row_broadcast(t.matmul(h, t.param(m.head_w[1])), t.param(m.head_b[1]));
  } catch (const NumericError& e) {
    rethrow_in_layer("head-mlp", e);
  }
  return h;
}

}  // namespace graphtax
