#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "graphtax/error.hpp"

namespace graphtax {

// Dense row-major matrix of doubles. Row/column vectors are 1xN or Nx1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw InputError("Tensor: negative shape");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c, 0.0); }
  static Tensor ones(int r, int c) { return Tensor(r, c, 1.0); }
  static Tensor identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rws) {
    Tensor t(static_cast<int>(rws.size()),
             rws.size() ? static_cast<int>(rws.begin()->size()) : 0);
    int i = 0;
    for (const auto& row : rws) {
      if (static_cast<int>(row.size()) != t.cols)
        throw InputError("Tensor::from_rows: ragged rows");
      int j = 0;
      for (double v : row) t.at(i, j++) = v;
      ++i;
    }
    return t;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  int size() const { return static_cast<int>(data.size()); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
  }
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw InputError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace graphtax
