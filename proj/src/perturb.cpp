#include "graphtax/perturb.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace graphtax {

PerturbationKind PerturbationKind::fragmented(int k, SeedPolicy policy) {
  if (k < 1) throw InputError("fragmented: k must be >= 1");
  return {Tag::Fragmented, k, policy};
}

std::string PerturbationKind::name() const {
  switch (tag) {
    case Tag::Identity: return "identity";
    case Tag::NoNodeFeatures: return "no-node-features";
    case Tag::NodeDegree: return "node-degree";
    case Tag::NoEdges: return "no-edges";
    case Tag::FullyConnected: return "fully-connected";
    case Tag::Fragmented: {
      std::string s = "fragmented-k" + std::to_string(k);
      if (seed_policy == SeedPolicy::HighestDegreeThenLowestId) s += "-hd";
      return s;
    }
  }
  throw InputError("PerturbationKind::name: bad enum");
}

PerturbationKind PerturbationKind::parse(const std::string& token) {
  if (token == "identity") return identity();
  if (token == "no-node-features") return no_node_features();
  if (token == "node-degree") return node_degree();
  if (token == "no-edges") return no_edges();
  if (token == "fully-connected") return fully_connected();
  if (token.rfind("fragmented-k", 0) == 0) {
    std::string rest = token.substr(12);
    SeedPolicy policy = SeedPolicy::LowestId;
    if (rest.size() > 3 && rest.substr(rest.size() - 3) == "-hd") {
      policy = SeedPolicy::HighestDegreeThenLowestId;
      rest = rest.substr(0, rest.size() - 3);
    }
    try {
      std::size_t used = 0;
      const int k = std::stoi(rest, &used);
      if (used == rest.size() && k >= 1) return fragmented(k, policy);
    } catch (const std::exception&) {
    }
  }
  throw InputError("unknown perturbation: " + token);
}

std::vector<PerturbationKind> canonical_suite() {
  return {PerturbationKind::identity(),        PerturbationKind::no_node_features(),
          PerturbationKind::node_degree(),     PerturbationKind::no_edges(),
          PerturbationKind::fully_connected(), PerturbationKind::fragmented(1),
          PerturbationKind::fragmented(2),     PerturbationKind::fragmented(3)};
}

Graph no_node_features(const Graph& g) {
  Graph out = g;
  out.features = Tensor::ones(g.n, 1);
  return out;
}

Dataset node_degree_features(const Dataset& d) {
  std::set<int> vocab;
  for (const Graph& g : d.graphs)
    for (int deg : degrees(g)) vocab.insert(deg);
  std::map<int, int> index;
  for (int deg : vocab) index.emplace(deg, static_cast<int>(index.size()));

  Dataset out = d;
  const int width = std::max<int>(1, static_cast<int>(vocab.size()));
  for (Graph& g : out.graphs) {
    Tensor feats(g.n, width);
    const auto deg = degrees(g);
    for (int v = 0; v < g.n; ++v) feats.at(v, index.at(deg[v])) = 1.0;
    g.features = std::move(feats);
  }
  return out;
}

Graph no_edges(const Graph& g) {
  Graph out = g;
  out.edges.clear();
  return out;
}

Graph fully_connected(const Graph& g) {
  Graph out = g;
  out.edges.clear();
  out.edges.reserve(static_cast<std::size_t>(g.n) * (g.n - 1) / 2);
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v) out.edges.emplace_back(u, v);
  return out;
}

std::vector<int> fragment_assignment(const Graph& g, int k, SeedPolicy policy) {
  if (k < 1) throw InputError("fragmented: k must be >= 1");
  const auto deg = degrees(g);
  std::vector<int> fragment(g.n, -1);
  int next = 0;
  for (;;) {
    int seed = -1;
    for (int v = 0; v < g.n; ++v) {
      if (fragment[v] >= 0) continue;
      if (seed < 0) {
        seed = v;
      } else if (policy == SeedPolicy::HighestDegreeThenLowestId && deg[v] > deg[seed]) {
        seed = v;  // ties keep the smaller id already held
      }
    }
    if (seed < 0) break;
    const auto ball = bfs_ball(g, seed, k - 1,
                               [&](int v) { return fragment[v] < 0; });
    for (int v : ball) fragment[v] = next;
    ++next;
  }
  return fragment;
}

Graph fragmented(const Graph& g, int k, SeedPolicy policy) {
  const auto fragment = fragment_assignment(g, k, policy);
  Graph out = g;
  out.edges.clear();
  for (auto [u, v] : g.edges)
    if (fragment[u] == fragment[v]) out.edges.emplace_back(u, v);
  return out;
}

Dataset apply(const PerturbationKind& p, const Dataset& d) {
  switch (p.tag) {
    case PerturbationKind::Tag::Identity:
      return d;
    case PerturbationKind::Tag::NodeDegree:
      return node_degree_features(d);
    default:
      break;
  }
  Dataset out = d;
  for (Graph& g : out.graphs) {
    switch (p.tag) {
      case PerturbationKind::Tag::NoNodeFeatures: g = no_node_features(g); break;
      case PerturbationKind::Tag::NoEdges: g = no_edges(g); break;
      case PerturbationKind::Tag::FullyConnected: g = fully_connected(g); break;
      case PerturbationKind::Tag::Fragmented: g = fragmented(g, p.k, p.seed_policy); break;
      default: throw InputError("apply: unhandled perturbation");
    }
  }
  return out;
}

}  // namespace graphtax
