#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphtax/tensor.hpp"

namespace graphtax {

using Edge = std::pair<int, int>;  // canonical form: first < second

// Simple undirected attributed graph. Immutable by convention once built;
// safe to share across readers. Edges are stored canonically (u < v, sorted,
// unique, no self-loops); build through make_graph to enforce that.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;
  Tensor features;  // n x d, d >= 0
  std::optional<std::vector<int>> node_labels;
  std::optional<int> graph_label;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n == b.n && a.edges == b.edges && a.features == b.features &&
           a.node_labels == b.node_labels && a.graph_label == b.graph_label;
  }
};

// Canonicalizes edges (dedupe unordered pairs, drop self-loops, sort) and
// validates endpoints and feature shape. Throws InputError on bad input.
Graph make_graph(int n, std::vector<Edge> edges, Tensor features,
                 std::optional<std::vector<int>> node_labels = std::nullopt,
                 std::optional<int> graph_label = std::nullopt);

void validate_graph(const Graph& g);

enum class TaskKind {
  GraphClassification,
  NodeClassificationInductive,
  NodeClassificationTransductive,
};

std::string task_name(TaskKind t);
TaskKind parse_task(const std::string& s);

// Train/validation/test index sets: graph indices for inductive tasks,
// node indices for transductive ones.
struct SplitSpec {
  std::vector<int> train, val, test;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  TaskKind task = TaskKind::GraphClassification;
  int num_classes = 0;
  std::optional<SplitSpec> split;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks all Dataset invariants: label presence for the task kind, label
// ranges, transductive single-graph rule, split disjointness/coverage.
void validate_dataset(const Dataset& d);

std::vector<int> degrees(const Graph& g);

std::vector<std::vector<int>> adjacency_lists(const Graph& g);

// Nodes reachable from seed within `radius` hops through nodes satisfying
// `allowed` (empty predicate = all nodes). Result is sorted ascending and
// always contains seed. Throws InputError if seed is out of range or not
// allowed.
std::vector<int> bfs_ball(const Graph& g, int seed, int radius,
                          const std::function<bool(int)>& allowed = {});

// Component id per node, ids dense and ordered by smallest member.
std::vector<int> connected_components(const Graph& g);

}  // namespace graphtax
