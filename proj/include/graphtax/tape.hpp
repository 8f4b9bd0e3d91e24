#pragma once

#include <functional>
#include <random>
#include <vector>

#include "graphtax/kernels.hpp"
#include "graphtax/nn.hpp"

namespace graphtax {

using VarId = int;

// Attention support per node row: self first, then neighbors within the same
// graph block in ascending row order.
struct NeighborLists {
  std::vector<std::vector<int>> support;
};

// Reverse-mode tape over dense tensors. Ops evaluate eagerly; nodes are
// created in topological order, so backward() is a reverse sweep. A tape is
// built per forward pass and discarded. External pointers passed to ops
// (block matrices, layouts, neighbor lists, label vectors) must outlive the
// tape.
class Tape {
public:
  explicit Tape(ParamStore* params = nullptr) : params_(params) {}

  VarId constant(Tensor v);  // leaf, no gradient tracked
  VarId input(Tensor v);     // leaf with gradient (used by grad checks/tests)
  VarId param(int index);    // leaf bound to a ParamStore entry

  VarId matmul(VarId a, VarId b);
  // Per-graph block product out_g = blocks[g] * h_g. Blocks are constant and
  // must be symmetric (the backward pass reuses them untransposed).
  VarId block_mul(const std::vector<Tensor>* blocks, const BatchLayout* layout, VarId h);
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId scale(VarId a, double c);
  VarId add_row_broadcast(VarId a, VarId bias);  // bias is 1 x C
  VarId relu(VarId a);
  VarId leaky_relu(VarId a, double slope);
  VarId row_softmax(VarId a);
  VarId concat_cols(const std::vector<VarId>& xs);
  // Identity when p == 0 or in eval mode; otherwise inverted-dropout mask.
  VarId dropout(VarId a, double p, std::mt19937_64& rng, bool train_mode);
  // G x C matrix of per-graph row means.
  VarId segment_mean(VarId a, const BatchLayout* layout);
  VarId batchnorm(VarId x, VarId gamma, VarId beta, BatchNormState& state, bool train_mode);
  // Multi-head building block for one head: given projected features p and
  // the two attention vectors (d x 1), softmax-normalized leaky-relu scores
  // over each node's support, then the attention-weighted sum of p rows.
  VarId gat_attention(VarId p, VarId a_src, VarId a_dst, const NeighborLists* nbrs,
                      double slope);
  // Mean negative log-softmax of the true class over `rows` (all rows when
  // rows == nullptr). Returns a 1x1 tensor.
  VarId cross_entropy(VarId logits, const std::vector<int>* labels,
                      const std::vector<int>* rows = nullptr);

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse; afterwards
  // gradients of bound parameters have been accumulated into the ParamStore.
  void backward(VarId loss);

  const Tensor& value(VarId id) const { return nodes_.at(id).value; }
  const Tensor& grad(VarId id) const;
  int size() const { return static_cast<int>(nodes_.size()); }

private:
  struct Node {
    Tensor value;
    Tensor grad;        // allocated only when needs_grad
    bool needs_grad = false;
    int param_binding = -1;
    std::function<void(Tape&)> back;  // empty for leaves
  };

  VarId push(Tensor value, bool needs_grad, std::function<void(Tape&)> back = {});
  bool needs(VarId id) const { return nodes_.at(id).needs_grad; }
  Tensor& grad_mut(VarId id) { return nodes_.at(id).grad; }
  void check_finite(const Tensor& t, const char* op) const;

  ParamStore* params_ = nullptr;
  std::vector<Node> nodes_;
};

// Numerically stable row-wise softmax (no tape).
Tensor softmax_rows(const Tensor& logits);

}  // namespace graphtax
