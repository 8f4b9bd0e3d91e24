#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately brute force and shares no code with the
// algorithms under test: Floyd-Warshall instead of BFS, pair counting
// instead of rank statistics, exhaustive agglomeration from the Ward ESS
// formula instead of the Lance-Williams recurrence.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graphtax/graph.hpp"
#include "graphtax/perturb.hpp"
#include "graphtax/tensor.hpp"

namespace oracle {

inline constexpr int kUnreachable = 1 << 28;

// All-pairs hop distances by Floyd-Warshall, restricted to nodes with
// alive[v] != 0 (alive empty = all nodes). Dead nodes keep kUnreachable
// everywhere except d[v][v] which is also kUnreachable, so callers can treat
// them as absent.
std::vector<std::vector<int>> floyd_warshall(const graphtax::Graph& g,
                                             const std::vector<char>& alive = {});

// Greedy fragment cover recomputed from scratch: repeatedly pick a seed in
// the unassigned set (per policy), take every unassigned node whose residual
// Floyd-Warshall distance to the seed is < k, repeat. Returns fragment id
// per node, ids in discovery order.
std::vector<int> fragment_assignment_fw(const graphtax::Graph& g, int k,
                                        graphtax::SeedPolicy policy);

// Full fragmentation oracle: drop every edge whose endpoints land in
// different fragments of fragment_assignment_fw.
graphtax::Graph fragmented_fw(const graphtax::Graph& g, int k, graphtax::SeedPolicy policy);

// Connected components by union-find; ids dense, ordered by smallest member.
std::vector<int> components_uf(const graphtax::Graph& g);

// P(random positive ranked above random negative), ties counted 1/2, by
// direct enumeration of all positive/negative pairs. Returns NaN when either
// side is empty.
double pairwise_auroc(const std::vector<double>& scores, const std::vector<char>& positive);

// Macro one-vs-rest multiclass AUROC built on pairwise_auroc; classes with
// zero or full coverage are skipped. Returns NaN when nothing is evaluable.
double macro_ovr_auroc(const graphtax::Tensor& probs, const std::vector<int>& labels);

struct WardMerge {
  int a = 0, b = 0;  // cluster ids; leaves 0..n-1, merge t creates id n+t
  double dist = 0.0;
};

// Exhaustive Ward agglomeration: clusters kept as explicit member lists,
// every pair distance recomputed each round from the closed form
//   d(A,B) = sqrt(2|A||B|/(|A|+|B|) * ||mean(A) - mean(B)||^2),
// ties broken by (min leaf rep, then other rep) like the implementation.
std::vector<WardMerge> ward_exhaustive(const graphtax::Tensor& points);

// L2-regularized logistic regression on raw vectors via plain gradient
// descent; returns P(class 1) per row of eval. Oracle for "the labels are
// linearly separable from the features".
std::vector<double> logistic_probs(const graphtax::Tensor& train_x,
                                   const std::vector<int>& train_y,
                                   const graphtax::Tensor& eval_x);

// G(n, p) with U(0,1) features of width d (d = 0 -> ones n x 1).
graphtax::Graph random_graph(int n, double edge_p, int feat_dim, std::mt19937_64& rng);

// Relabel nodes: node i becomes perm[i].
graphtax::Graph permute_graph(const graphtax::Graph& g, const std::vector<int>& perm);

// Every labeled graph on exactly n nodes (all 2^(n choose 2) edge subsets),
// with seeded random features of width feat_dim.
std::vector<graphtax::Graph> all_graphs_on(int n, int feat_dim, std::uint64_t seed);

inline std::string fixture_path(const std::string& rel) {
  return std::string(GRAPHTAX_TEST_DIR) + "/fixtures/" + rel;
}

// Scratch directory under the test working directory; wiped on creation.
std::string fresh_dir(const std::string& name);

}  // namespace oracle
