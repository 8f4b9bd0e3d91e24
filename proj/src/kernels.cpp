#include "graphtax/kernels.hpp"

namespace graphtax {

int BatchLayout::graph_of_row(int r) const {
  for (int g = 0; g < num_graphs(); ++g)
    if (r >= offsets[g] && r < offsets[g + 1]) return g;
  throw InputError("BatchLayout: row out of range");
}

namespace {

void check_matmul_shapes(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows) throw InputError("matmul: inner dimensions differ");
}

void check_block_shapes(const std::vector<Tensor>& blocks, const BatchLayout& layout,
                        const Tensor& h) {
  if (static_cast<int>(blocks.size()) != layout.num_graphs())
    throw InputError("block_diag_mul: block count != graph count");
  if (h.rows != layout.total_rows())
    throw InputError("block_diag_mul: row count mismatch");
  for (int g = 0; g < layout.num_graphs(); ++g) {
    const int n = layout.offsets[g + 1] - layout.offsets[g];
    if (blocks[g].rows != n || blocks[g].cols != n)
      throw InputError("block_diag_mul: block is not n_g x n_g");
  }
}

// One output row of a matmul, accumulated over k in ascending order.
inline void matmul_row(const Tensor& a, const Tensor& b, int i, double* out_row) {
  for (int k = 0; k < a.cols; ++k) {
    const double aik = a.at(i, k);
    const double* b_row = b.row_ptr(k);
    for (int j = 0; j < b.cols; ++j) out_row[j] += aik * b_row[j];
  }
}

inline void block_rows(const Tensor& block, const Tensor& h, int off, Tensor& out) {
  const int n = block.rows;
  for (int i = 0; i < n; ++i) {
    double* out_row = out.row_ptr(off + i);
    for (int k = 0; k < n; ++k) {
      const double s = block.at(i, k);
      const double* h_row = h.row_ptr(off + k);
      for (int j = 0; j < h.cols; ++j) out_row[j] += s * h_row[j];
    }
  }
}

}  // namespace

namespace ref {

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
  check_matmul_shapes(a, b);
  out = Tensor(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, i, out.row_ptr(i));
}

void transpose(const Tensor& a, Tensor& out) {
  out = Tensor(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
}

void block_diag_mul(const std::vector<Tensor>& blocks, const BatchLayout& layout,
                    const Tensor& h, Tensor& out) {
  check_block_shapes(blocks, layout, h);
  out = Tensor(h.rows, h.cols);
  for (int g = 0; g < layout.num_graphs(); ++g)
    block_rows(blocks[g], h, layout.offsets[g], out);
}

}  // namespace ref

namespace kernels {

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
  check_matmul_shapes(a, b);
  out = Tensor(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, i, out.row_ptr(i));
}

void transpose(const Tensor& a, Tensor& out) {
  out = Tensor(a.cols, a.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
}

void block_diag_mul(const std::vector<Tensor>& blocks, const BatchLayout& layout,
                    const Tensor& h, Tensor& out) {
  check_block_shapes(blocks, layout, h);
  out = Tensor(h.rows, h.cols);
  const int ngraphs = layout.num_graphs();
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < ngraphs; ++g) block_rows(blocks[g], h, layout.offsets[g], out);
}

}  // namespace kernels

}  // namespace graphtax
