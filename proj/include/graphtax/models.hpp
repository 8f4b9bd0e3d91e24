#pragma once

#include <random>
#include <string>
#include <vector>

#include "graphtax/graph.hpp"
#include "graphtax/tape.hpp"

namespace graphtax {

enum class ModelKind { GCN, GAT, GIN, Cheb };

std::string model_name(ModelKind k);
ModelKind parse_model(const std::string& token);
const std::vector<ModelKind>& all_models();  // canonical order: gcn, gat, gin, cheb

struct ModelConfig {
  ModelKind kind = ModelKind::GCN;
  int hidden_dim = 64;
  int num_conv_layers = 5;
  int gat_heads = 4;
  int cheb_order = 3;  // K
  double gin_eps = 0.0;
  double dropout = 0.0;
  double lrelu_slope = 0.2;
};

// Fixed stack: [2-layer embed MLP, node tasks only] -> num_conv_layers conv
// blocks (conv -> batchnorm -> relu -> +skip) -> [mean pool, graph tasks
// only] -> 2-layer MLP head. Parameter layout is fixed by assemble().
struct GNNModel {
  ModelConfig cfg;
  TaskKind task = TaskKind::GraphClassification;
  int in_dim = 0;
  int num_classes = 0;

  ParamStore params;
  std::vector<BatchNormState> bn;  // one per conv layer

  // Parameter ids into `params`.
  std::vector<int> embed_w, embed_b;        // node tasks: 2 each
  std::vector<std::vector<int>> conv_w;     // per layer, layout depends on kind
  int skip_w = -1;                          // layer-1 projection (graph tasks, in != hidden)
  std::vector<int> bn_gamma, bn_beta;       // per conv layer
  std::vector<int> head_w, head_b;          // 2 each
};

// Dense per-graph operators used by the conv layers.
Tensor adjacency_dense(const Graph& g);
// S = D~^{-1/2} (A + I) D~^{-1/2}
Tensor gcn_propagation(const Graph& g);
// L~ = L - I = -D^{-1/2} A D^{-1/2} (lambda_max fixed at 2; isolated rows 0)
Tensor cheb_scaled_laplacian(const Graph& g);

// Disjoint-union batch with the kind-specific propagation structure. The
// batch must outlive any tape built over it.
struct PreparedBatch {
  Tensor features;             // total_rows x d
  BatchLayout layout;
  std::vector<Tensor> blocks;  // GCN: S, GIN: A, Cheb: L~; empty for GAT
  NeighborLists nbrs;          // GAT only
  std::vector<int> graph_labels;  // -1 where missing
  std::vector<int> node_labels;   // flattened; -1 where missing
};

PreparedBatch prepare_batch(const std::vector<const Graph*>& graphs, ModelKind kind);

GNNModel assemble(const ModelConfig& cfg, int in_dim, int num_classes, TaskKind task,
                  std::uint64_t seed);

// Builds the forward graph on `tape` and returns the logits node:
// (num_graphs x C) for graph tasks, (total_rows x C) for node tasks.
// Non-finite activations raise NumericError naming the layer.
VarId model_forward(Tape& tape, GNNModel& model, const PreparedBatch& batch, bool train_mode,
                    std::mt19937_64& rng);

}  // namespace graphtax
