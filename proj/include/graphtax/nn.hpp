#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "graphtax/tensor.hpp"

namespace graphtax {

// Ordered named parameters with matching gradient buffers. Iteration order is
// the registration order, which fixes the Adam update order and the RNG draw
// order at init.
struct ParamStore {
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };

  std::vector<Entry> entries;

  int add(std::string name, Tensor init) {
    const int id = static_cast<int>(entries.size());
    Tensor grad(init.rows, init.cols);
    entries.push_back({std::move(name), std::move(init), std::move(grad)});
    return id;
  }

  Entry& operator[](int i) { return entries.at(i); }
  const Entry& operator[](int i) const { return entries.at(i); }
  int size() const { return static_cast<int>(entries.size()); }

  long long num_values() const {
    long long total = 0;
    for (const auto& e : entries) total += static_cast<long long>(e.value.size());
    return total;
  }

  void zero_grads() {
    for (auto& e : entries) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
};

// Glorot-style uniform init, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  long step = 0;
  std::vector<Tensor> m, v;  // first/second moments, mirroring param shapes

  explicit AdamState(const ParamStore& params, AdamConfig cfg = {});
};

// Standard Adam update with bias correction; zeroes gradients afterwards.
void adam_step(ParamStore& params, AdamState& state);

// Running statistics for one batch-norm layer; scale/shift live in the
// ParamStore.
struct BatchNormState {
  Tensor running_mean;  // 1 x C
  Tensor running_var;   // 1 x C
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(int channels)
      : running_mean(1, channels, 0.0), running_var(1, channels, 1.0) {}
};

// Central-finite-difference gradient check (h = 1e-5). `fn` must be a pure
// function of the parameter values; when accumulate_grads is set it must
// additionally leave dloss/dparam in the store's grad buffers. Compares the
// analytic gradient against finite differences on up to max_coords sampled
// coordinates and returns the max relative error
//   |analytic - fd| / max(1e-3, |analytic| + |fd|).
double grad_check(ParamStore& params, const std::function<double(bool accumulate_grads)>& fn,
                  int max_coords, std::uint64_t seed);

}  // namespace graphtax
