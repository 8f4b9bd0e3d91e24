#include "graphtax/nn.hpp"

#include <algorithm>
#include <cmath>

namespace graphtax {

Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t(rows, cols);
  for (double& v : t.data) v = dist(rng);
  return t;
}

AdamState::AdamState(const ParamStore& params, AdamConfig cfg_) : cfg(cfg_) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& e : params.entries) {
    m.emplace_back(e.value.rows, e.value.cols);
    v.emplace_back(e.value.rows, e.value.cols);
  }
}

void adam_step(ParamStore& params, AdamState& state) {
  if (static_cast<int>(state.m.size()) != params.size())
    throw InputError("adam_step: state does not mirror params");
  ++state.step;
  const double b1 = state.cfg.beta1;
  const double b2 = state.cfg.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (int p = 0; p < params.size(); ++p) {
    auto& value = params[p].value.data;
    auto& grad = params[p].grad.data;
    auto& m = state.m[p].data;
    auto& v = state.v[p].data;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      value[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
  params.zero_grads();
}

double grad_check(ParamStore& params, const std::function<double(bool)>& fn,
                  int max_coords, std::uint64_t seed) {
  constexpr double kStep = 1e-5;

  params.zero_grads();
  fn(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& e : params.entries) analytic.push_back(e.grad);
  params.zero_grads();

  // Enumerate all (param, coord) pairs, then sample without replacement.
  std::vector<std::pair<int, int>> coords;
  for (int p = 0; p < params.size(); ++p)
    for (int i = 0; i < static_cast<int>(params[p].value.size()); ++i)
      coords.emplace_back(p, i);
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  if (max_coords > 0 && static_cast<int>(coords.size()) > max_coords)
    coords.resize(max_coords);

  double max_rel = 0.0;
  for (auto [p, i] : coords) {
    double& x = params[p].value.data[i];
    const double saved = x;
    x = saved + kStep;
    const double f_plus = fn(false);
    x = saved - kStep;
    const double f_minus = fn(false);
    x = saved;
    const double fd = (f_plus - f_minus) / (2.0 * kStep);
    const double a = analytic[p].data[i];
    const double rel = std::abs(a - fd) / std::max(1e-3, std::abs(a) + std::abs(fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace graphtax
