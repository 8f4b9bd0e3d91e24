#pragma once

#include <vector>

#include "graphtax/tensor.hpp"

namespace graphtax {

// Row ranges of a disjoint-union batch: graph g owns rows
// [offsets[g], offsets[g+1]).
struct BatchLayout {
  std::vector<int> offsets;  // size num_graphs + 1, offsets[0] == 0

  int num_graphs() const { return static_cast<int>(offsets.size()) - 1; }
  int total_rows() const { return offsets.empty() ? 0 : offsets.back(); }
  int graph_of_row(int r) const;  // linear scan, test/debug use
};

namespace ref {

// Straight-line serial kernels. These are the semantics of record: the
// OpenMP kernels below must match them bit for bit for any thread count.
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void transpose(const Tensor& a, Tensor& out);
// out rows of graph g = blocks[g] * h rows of graph g. Blocks are square
// per-graph matrices (n_g x n_g).
void block_diag_mul(const std::vector<Tensor>& blocks, const BatchLayout& layout,
                    const Tensor& h, Tensor& out);

}  // namespace ref

namespace kernels {

// OpenMP kernels. Every output element is accumulated sequentially in the
// same k-order as the reference, so results are independent of thread count.
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void transpose(const Tensor& a, Tensor& out);
void block_diag_mul(const std::vector<Tensor>& blocks, const BatchLayout& layout,
                    const Tensor& h, Tensor& out);

}  // namespace kernels

}  // namespace graphtax
