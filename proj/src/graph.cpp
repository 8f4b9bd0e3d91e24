#include "graphtax/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace graphtax {

Graph make_graph(int n, std::vector<Edge> edges, Tensor features,
                 std::optional<std::vector<int>> node_labels,
                 std::optional<int> graph_label) {
  if (n < 0) throw InputError("make_graph: negative node count");
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw InputError("make_graph: edge endpoint out of range");
    if (u == v) continue;  // self-loops are never stored
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  Graph g{n, std::move(canon), std::move(features), std::move(node_labels),
          std::move(graph_label)};
  validate_graph(g);
  return g;
}

void validate_graph(const Graph& g) {
  if (g.n < 0) throw InputError("graph: negative node count");
  for (auto [u, v] : g.edges) {
    if (u < 0 || u >= g.n || v < 0 || v >= g.n)
      throw InputError("graph: edge endpoint out of range");
    if (u == v) throw InputError("graph: self-loop stored");
    if (u > v) throw InputError("graph: edge not in canonical (u < v) order");
  }
  for (std::size_t i = 1; i < g.edges.size(); ++i)
    if (g.edges[i - 1] >= g.edges[i])
      throw InputError("graph: edges not sorted unique");
  if (g.features.rows != g.n)
    throw InputError("graph: feature row count != node count");
  if (g.node_labels && static_cast<int>(g.node_labels->size()) != g.n)
    throw InputError("graph: node label count != node count");
}

std::string task_name(TaskKind t) {
  switch (t) {
    case TaskKind::GraphClassification: return "graph-classification";
    case TaskKind::NodeClassificationInductive: return "node-inductive";
    case TaskKind::NodeClassificationTransductive: return "node-transductive";
  }
  throw InputError("task_name: bad enum");
}

TaskKind parse_task(const std::string& s) {
  if (s == "graph-classification") return TaskKind::GraphClassification;
  if (s == "node-inductive") return TaskKind::NodeClassificationInductive;
  if (s == "node-transductive") return TaskKind::NodeClassificationTransductive;
  throw InputError("unknown task kind: " + s);
}

namespace {

void check_split_indices(const std::vector<int>& idx, int limit, const char* which) {
  if (idx.empty()) throw InputError(std::string("split: empty ") + which + " set");
  for (int i : idx)
    if (i < 0 || i >= limit)
      throw InputError(std::string("split: ") + which + " index out of range");
}

}  // namespace

void validate_dataset(const Dataset& d) {
  if (d.num_classes <= 0) throw InputError("dataset: num_classes must be positive");
  if (d.task == TaskKind::NodeClassificationTransductive && d.graphs.size() != 1)
    throw InputError("dataset: transductive task requires exactly one graph");
  const bool need_graph_labels = d.task == TaskKind::GraphClassification;
  const bool need_node_labels = !need_graph_labels;
  int feat_dim = -1;
  for (const Graph& g : d.graphs) {
    validate_graph(g);
    if (feat_dim < 0) feat_dim = g.features.cols;
    if (g.features.cols != feat_dim)
      throw InputError("dataset: inconsistent feature width across graphs");
    if (need_graph_labels) {
      if (!g.graph_label) throw InputError("dataset: graph task requires graph labels");
      if (*g.graph_label < 0 || *g.graph_label >= d.num_classes)
        throw InputError("dataset: graph label out of class range");
    }
    if (need_node_labels) {
      if (!g.node_labels) throw InputError("dataset: node task requires node labels");
      for (int y : *g.node_labels)
        if (y < 0 || y >= d.num_classes)
          throw InputError("dataset: node label out of class range");
    }
  }
  if (d.split) {
    const int limit = d.task == TaskKind::NodeClassificationTransductive
                          ? d.graphs.at(0).n
                          : static_cast<int>(d.graphs.size());
    check_split_indices(d.split->train, limit, "train");
    check_split_indices(d.split->val, limit, "validation");
    check_split_indices(d.split->test, limit, "test");
    std::set<int> seen;
    for (const auto* part : {&d.split->train, &d.split->val, &d.split->test})
      for (int i : *part)
        if (!seen.insert(i).second)
          throw InputError("split: sets are not pairwise disjoint");
  }
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(g.n, 0);
  for (auto [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

std::vector<int> bfs_ball(const Graph& g, int seed, int radius,
                          const std::function<bool(int)>& allowed) {
  if (seed < 0 || seed >= g.n) throw InputError("bfs_ball: seed out of range");
  if (radius < 0) throw InputError("bfs_ball: negative radius");
  if (allowed && !allowed(seed)) throw InputError("bfs_ball: seed not allowed");

  const auto adj = adjacency_lists(g);
  std::vector<int> dist(g.n, -1);
  dist[seed] = 0;
  std::deque<int> queue{seed};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (dist[u] == radius) continue;
    for (int v : adj[u]) {
      if (dist[v] >= 0) continue;
      if (allowed && !allowed(v)) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  std::vector<int> ball;
  for (int v = 0; v < g.n; ++v)
    if (dist[v] >= 0) ball.push_back(v);
  return ball;
}

std::vector<int> connected_components(const Graph& g) {
  const auto adj = adjacency_lists(g);
  std::vector<int> comp(g.n, -1);
  int next = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (comp[v] >= 0) continue;
        comp[v] = next;
        queue.push_back(v);
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace graphtax
