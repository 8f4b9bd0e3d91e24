#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "graphtax/error.hpp"
#include "graphtax/graph.hpp"
#include "oracles.hpp"

using namespace graphtax;

namespace {

Graph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, std::move(e), Tensor::ones(n, 1));
}

Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, Tensor::ones(3, 1)); }

}  // namespace

TEST_CASE("make_graph canonicalizes edges") {
  Graph g = make_graph(4, {{2, 1}, {1, 2}, {0, 3}, {3, 3}, {0, 3}}, Tensor::ones(4, 2));
  CHECK(g.edges == std::vector<Edge>{{0, 3}, {1, 2}});  // dedup, self-loop dropped, sorted

  CHECK_THROWS_AS(make_graph(2, {{0, 2}}, Tensor::ones(2, 1)), InputError);
  CHECK_THROWS_AS(make_graph(2, {{-1, 0}}, Tensor::ones(2, 1)), InputError);
  CHECK_THROWS_AS(make_graph(3, {}, Tensor::ones(2, 1)), InputError);  // feature rows != n
  CHECK_THROWS_AS(make_graph(2, {}, Tensor::ones(2, 1), std::vector<int>{0}), InputError);
  CHECK_THROWS_AS(make_graph(-1, {}, Tensor()), InputError);

  Graph empty = make_graph(0, {}, Tensor(0, 1));
  CHECK(empty.n == 0);
  CHECK(empty.edges.empty());
}

TEST_CASE("degrees") {
  CHECK(degrees(triangle()) == std::vector<int>{2, 2, 2});
  CHECK(degrees(path(3)) == std::vector<int>{1, 2, 1});
  CHECK(degrees(make_graph(4, {}, Tensor::ones(4, 1))) == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("adjacency lists are sorted") {
  Graph g = make_graph(4, {{0, 2}, {0, 1}, {2, 3}}, Tensor::ones(4, 1));
  auto adj = adjacency_lists(g);
  CHECK(adj[0] == std::vector<int>{1, 2});
  CHECK(adj[2] == std::vector<int>{0, 3});
  CHECK(adj[3] == std::vector<int>{2});
}

TEST_CASE("bfs_ball") {
  Graph p5 = path(5);
  CHECK(bfs_ball(p5, 0, 1) == std::vector<int>{0, 1});
  auto allowed = [](int v) { return v >= 2 && v <= 4; };
  CHECK(bfs_ball(p5, 2, 1, allowed) == std::vector<int>{2, 3});
  CHECK(bfs_ball(p5, 3, 0) == std::vector<int>{3});
  CHECK(bfs_ball(p5, 1, 100) == std::vector<int>{0, 1, 2, 3, 4});

  CHECK_THROWS_AS(bfs_ball(p5, 9, 1), InputError);
  CHECK_THROWS_AS(bfs_ball(p5, 0, 1, allowed), InputError);  // seed not allowed

  // cross-check against Floyd-Warshall distances on random graphs
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    Graph g = oracle::random_graph(n, 0.35, 1, rng);
    std::vector<char> alive(n, 0);
    for (int v = 0; v < n; ++v) alive[v] = rng() % 3 ? 1 : 0;
    const int seed = static_cast<int>(rng() % n);
    alive[seed] = 1;
    const int radius = static_cast<int>(rng() % 4);
    auto dist = oracle::floyd_warshall(g, alive);
    std::vector<int> expect;
    for (int v = 0; v < n; ++v)
      if (alive[v] && dist[seed][v] <= radius) expect.push_back(v);
    auto got = bfs_ball(g, seed, radius, [&](int v) { return alive[v] != 0; });
    CHECK(got == expect);
  }
}

TEST_CASE("connected_components") {
  Graph two_tri = make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}},
                             Tensor::ones(6, 1));
  CHECK(connected_components(two_tri) == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(connected_components(make_graph(3, {}, Tensor::ones(3, 1))) ==
        std::vector<int>{0, 1, 2});
  CHECK(connected_components(path(5)) == std::vector<int>{0, 0, 0, 0, 0});

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    Graph g = oracle::random_graph(n, 0.25, 1, rng);
    CHECK(connected_components(g) == oracle::components_uf(g));
  }
}

TEST_CASE("task names round-trip") {
  for (auto t : {TaskKind::GraphClassification, TaskKind::NodeClassificationInductive,
                 TaskKind::NodeClassificationTransductive})
    CHECK(parse_task(task_name(t)) == t);
  CHECK_THROWS_AS(parse_task("bogus"), InputError);
}

TEST_CASE("validate_dataset") {
  Dataset d;
  d.name = "toy";
  d.task = TaskKind::GraphClassification;
  d.num_classes = 2;
  d.graphs = {triangle(), path(3)};
  d.graphs[0].graph_label = 0;
  d.graphs[1].graph_label = 1;
  CHECK_NOTHROW(validate_dataset(d));

  Dataset missing = d;
  missing.graphs[1].graph_label.reset();
  CHECK_THROWS_AS(validate_dataset(missing), InputError);

  Dataset range = d;
  range.graphs[0].graph_label = 2;
  CHECK_THROWS_AS(validate_dataset(range), InputError);

  Dataset node = d;
  node.task = TaskKind::NodeClassificationInductive;
  CHECK_THROWS_AS(validate_dataset(node), InputError);  // node labels missing
  for (auto& g : node.graphs) g.node_labels = std::vector<int>(g.n, 1);
  CHECK_NOTHROW(validate_dataset(node));

  Dataset trans = node;
  trans.task = TaskKind::NodeClassificationTransductive;
  CHECK_THROWS_AS(validate_dataset(trans), InputError);  // must be a single graph
  trans.graphs.resize(1);
  trans.split = SplitSpec{{0}, {1}, {2}};
  CHECK_NOTHROW(validate_dataset(trans));
  trans.split = SplitSpec{{0, 1}, {2}, {}};
  CHECK_THROWS_AS(validate_dataset(trans), InputError);  // empty test set
  trans.split = SplitSpec{{0, 1}, {}, {2}};
  CHECK_THROWS_AS(validate_dataset(trans), InputError);  // empty val set
  trans.split = SplitSpec{{0, 1}, {1}, {2}};
  CHECK_THROWS_AS(validate_dataset(trans), InputError);  // overlap
  trans.split = SplitSpec{{0, 7}, {1}, {2}};
  CHECK_THROWS_AS(validate_dataset(trans), InputError);  // out of range
}
