#pragma once

#include <string>
#include <vector>

#include "graphtax/graph.hpp"

namespace graphtax {

enum class SeedPolicy { LowestId, HighestDegreeThenLowestId };

// One of the six dataset transforms. Fragmented carries its radius parameter
// k (>= 1) and the fragment seed selection policy.
struct PerturbationKind {
  enum class Tag {
    Identity,
    NoNodeFeatures,
    NodeDegree,
    NoEdges,
    FullyConnected,
    Fragmented,
  };

  Tag tag = Tag::Identity;
  int k = 1;  // Fragmented only
  SeedPolicy seed_policy = SeedPolicy::LowestId;

  static PerturbationKind identity() { return {Tag::Identity, 1, SeedPolicy::LowestId}; }
  static PerturbationKind no_node_features() { return {Tag::NoNodeFeatures, 1, SeedPolicy::LowestId}; }
  static PerturbationKind node_degree() { return {Tag::NodeDegree, 1, SeedPolicy::LowestId}; }
  static PerturbationKind no_edges() { return {Tag::NoEdges, 1, SeedPolicy::LowestId}; }
  static PerturbationKind fully_connected() { return {Tag::FullyConnected, 1, SeedPolicy::LowestId}; }
  static PerturbationKind fragmented(int k, SeedPolicy policy = SeedPolicy::LowestId);

  // Stable token used in CLI flags, CSV rows and JSON logs, e.g.
  // "no-edges", "fragmented-k2", "fragmented-k2-hd".
  std::string name() const;
  static PerturbationKind parse(const std::string& token);

  friend bool operator==(const PerturbationKind&, const PerturbationKind&) = default;
};

// The fixed benchmark suite: identity, no-node-features, node-degree,
// no-edges, fully-connected, fragmented k=1..3.
std::vector<PerturbationKind> canonical_suite();

// Dataset -> Dataset dispatch. Preserves graph count, per-graph n, labels,
// task kind and split.
Dataset apply(const PerturbationKind& p, const Dataset& d);

Graph no_node_features(const Graph& g);
// Dataset-level: the degree vocabulary is shared across all graphs.
Dataset node_degree_features(const Dataset& d);
Graph no_edges(const Graph& g);
Graph fully_connected(const Graph& g);
// Greedy cover by BFS balls of hop radius k-1 grown inside the unassigned
// node set; edges crossing fragment boundaries are dropped.
Graph fragmented(const Graph& g, int k, SeedPolicy policy = SeedPolicy::LowestId);

// Fragment id per node, exposed for tests of fragment geometry.
std::vector<int> fragment_assignment(const Graph& g, int k, SeedPolicy policy);

}  // namespace graphtax
