#include "graphtax/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "graphtax/error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace graphtax {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct LineFile {
  std::string path;
  std::vector<std::string> lines;  // trimmed, trailing blank lines dropped

  IoError err(size_t lineno, const std::string& msg) const {
    return IoError(path + ":" + std::to_string(lineno) + ": " + msg);
  }
};

LineFile read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  LineFile f;
  f.path = path;
  std::string line;
  while (std::getline(in, line)) f.lines.push_back(trim(line));
  while (!f.lines.empty() && f.lines.back().empty()) f.lines.pop_back();
  return f;
}

long parse_long(const LineFile& f, size_t lineno, const std::string& tok) {
  try {
    size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw f.err(lineno, "expected integer, got '" + tok + "'");
  }
}

double parse_double(const LineFile& f, size_t lineno, const std::string& tok) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw f.err(lineno, "expected number, got '" + tok + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

// Dense 0-based remap in ascending order of the original values.
std::vector<int> remap_dense(const std::vector<long>& raw) {
  std::set<long> vals(raw.begin(), raw.end());
  std::map<long, int> to_id;
  for (long v : vals) to_id.emplace(v, static_cast<int>(to_id.size()));
  std::vector<int> out;
  out.reserve(raw.size());
  for (long v : raw) out.push_back(to_id.at(v));
  return out;
}

}  // namespace

Dataset load_tu(const std::string& dir, const std::string& name) {
  auto fpath = [&](const std::string& suffix) { return dir + "/" + name + suffix; };

  LineFile indicator = read_lines(fpath("_graph_indicator.txt"));
  int num_nodes = static_cast<int>(indicator.lines.size());
  if (num_nodes == 0) throw indicator.err(1, "no nodes");
  std::vector<int> graph_of(num_nodes);
  int num_graphs = 0;
  for (int i = 0; i < num_nodes; ++i) {
    long g = parse_long(indicator, i + 1, indicator.lines[i]);
    if (g < 1) throw indicator.err(i + 1, "graph ids are 1-based");
    graph_of[i] = static_cast<int>(g - 1);
    num_graphs = std::max(num_graphs, static_cast<int>(g));
  }
  std::vector<int> local(num_nodes), nsize(num_graphs, 0);
  for (int i = 0; i < num_nodes; ++i) local[i] = nsize[graph_of[i]]++;

  LineFile afile = read_lines(fpath("_A.txt"));
  std::vector<std::vector<Edge>> edges(num_graphs);
  for (size_t ln = 0; ln < afile.lines.size(); ++ln) {
    if (afile.lines[ln].empty()) continue;
    auto cells = split_csv(afile.lines[ln]);
    if (cells.size() != 2) throw afile.err(ln + 1, "expected 'u, v'");
    long u = parse_long(afile, ln + 1, cells[0]);
    long v = parse_long(afile, ln + 1, cells[1]);
    if (u < 1 || u > num_nodes || v < 1 || v > num_nodes)
      throw afile.err(ln + 1, "node id out of range");
    int gu = graph_of[u - 1], gv = graph_of[v - 1];
    if (gu != gv) throw afile.err(ln + 1, "edge crosses graphs");
    if (u == v) continue;  // self-loops dropped
    edges[gu].push_back({local[u - 1], local[v - 1]});
  }

  LineFile glabels = read_lines(fpath("_graph_labels.txt"));
  if (static_cast<int>(glabels.lines.size()) != num_graphs)
    throw glabels.err(glabels.lines.size(), "graph label count != graph count");
  std::vector<long> graw(num_graphs);
  for (int g = 0; g < num_graphs; ++g) graw[g] = parse_long(glabels, g + 1, glabels.lines[g]);
  std::vector<int> glabel = remap_dense(graw);

  std::vector<int> nlabel;
  bool have_node_labels = fs::exists(fpath("_node_labels.txt"));
  if (have_node_labels) {
    LineFile nl = read_lines(fpath("_node_labels.txt"));
    if (static_cast<int>(nl.lines.size()) != num_nodes)
      throw nl.err(nl.lines.size(), "node label count != node count");
    std::vector<long> raw(num_nodes);
    for (int i = 0; i < num_nodes; ++i) raw[i] = parse_long(nl, i + 1, nl.lines[i]);
    nlabel = remap_dense(raw);
  }

  Tensor attrs;
  bool have_attrs = fs::exists(fpath("_node_attributes.txt"));
  if (have_attrs) {
    LineFile na = read_lines(fpath("_node_attributes.txt"));
    if (static_cast<int>(na.lines.size()) != num_nodes)
      throw na.err(na.lines.size(), "attribute row count != node count");
    auto first = split_csv(na.lines[0]);
    attrs = Tensor(num_nodes, static_cast<int>(first.size()));
    for (int i = 0; i < num_nodes; ++i) {
      auto cells = split_csv(na.lines[i]);
      if (static_cast<int>(cells.size()) != attrs.cols)
        throw na.err(i + 1, "ragged attribute row");
      for (int j = 0; j < attrs.cols; ++j) attrs.at(i, j) = parse_double(na, i + 1, cells[j]);
    }
  }

  // Sidecar: task kind, class count, node-label role, optional split.
  TaskKind task = TaskKind::GraphClassification;
  bool node_labels_are_targets = false;
  int num_classes = 0;
  std::optional<SplitSpec> split;
  std::string meta_path = fpath("_meta.json");
  if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    json meta;
    try {
      meta = json::parse(in);
    } catch (const std::exception& e) {
      throw IoError(meta_path + ": " + e.what());
    }
    if (meta.contains("task")) task = parse_task(meta.at("task").get<std::string>());
    if (meta.contains("node_labels_are_targets"))
      node_labels_are_targets = meta.at("node_labels_are_targets").get<bool>();
    if (meta.contains("num_classes")) num_classes = meta.at("num_classes").get<int>();
    if (meta.contains("split")) {
      SplitSpec s;
      s.train = meta.at("split").at("train").get<std::vector<int>>();
      s.val = meta.at("split").at("val").get<std::vector<int>>();
      s.test = meta.at("split").at("test").get<std::vector<int>>();
      split = std::move(s);
    }
  }
  if (task != TaskKind::GraphClassification) node_labels_are_targets = true;
  if (node_labels_are_targets && !have_node_labels)
    throw IoError(fpath("_node_labels.txt") + ": required for node classification tasks");

  // Per-node features: attributes win; otherwise one-hot node labels
  // (feature role only); otherwise constant ones.
  int nl_vocab = 0;
  if (have_node_labels)
    for (int y : nlabel) nl_vocab = std::max(nl_vocab, y + 1);

  Dataset d;
  d.name = name;
  d.task = task;
  d.split = split;
  for (int g = 0; g < num_graphs; ++g) {
    int n = nsize[g];
    if (n == 0) throw IoError(fpath("_graph_indicator.txt") + ": graph " + std::to_string(g + 1) +
                              " has no nodes");
    Tensor feat;
    if (have_attrs) {
      feat = Tensor(n, attrs.cols);
    } else if (have_node_labels && !node_labels_are_targets) {
      feat = Tensor(n, nl_vocab);
    } else {
      feat = Tensor::ones(n, 1);
    }
    Graph gr = make_graph(n, edges[g], std::move(feat));
    if (node_labels_are_targets) gr.node_labels = std::vector<int>(n, 0);
    d.graphs.push_back(std::move(gr));
  }
  for (int i = 0; i < num_nodes; ++i) {
    Graph& gr = d.graphs[graph_of[i]];
    int r = local[i];
    if (have_attrs) {
      for (int j = 0; j < attrs.cols; ++j) gr.features.at(r, j) = attrs.at(i, j);
    } else if (have_node_labels && !node_labels_are_targets) {
      gr.features.at(r, nlabel[i]) = 1.0;
    }
    if (node_labels_are_targets) (*gr.node_labels)[r] = nlabel[i];
  }
  if (task == TaskKind::GraphClassification) {
    for (int g = 0; g < num_graphs; ++g) d.graphs[g].graph_label = glabel[g];
  }

  if (num_classes == 0) {
    if (task == TaskKind::GraphClassification) {
      for (int g = 0; g < num_graphs; ++g) num_classes = std::max(num_classes, glabel[g] + 1);
    } else {
      num_classes = nl_vocab;
    }
  }
  d.num_classes = num_classes;
  validate_dataset(d);
  return d;
}

void write_tu(const std::string& dir, const std::string& name, const Dataset& d) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  auto fpath = [&](const std::string& suffix) { return dir + "/" + name + suffix; };
  auto open = [](const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
  };

  bool node_targets = d.task != TaskKind::GraphClassification;

  {
    std::ofstream a = open(fpath("_A.txt"));
    int off = 0;
    for (const Graph& g : d.graphs) {
      for (auto [u, v] : g.edges) {
        a << off + u + 1 << ", " << off + v + 1 << '\n';
        a << off + v + 1 << ", " << off + u + 1 << '\n';
      }
      off += g.n;
    }
    if (!a) throw IoError("write failed: " + fpath("_A.txt"));
  }
  {
    std::ofstream f = open(fpath("_graph_indicator.txt"));
    for (size_t g = 0; g < d.graphs.size(); ++g)
      for (int i = 0; i < d.graphs[g].n; ++i) f << g + 1 << '\n';
  }
  {
    std::ofstream f = open(fpath("_graph_labels.txt"));
    for (const Graph& g : d.graphs) f << g.graph_label.value_or(0) << '\n';
  }
  if (node_targets) {
    std::ofstream f = open(fpath("_node_labels.txt"));
    for (const Graph& g : d.graphs)
      for (int y : *g.node_labels) f << y << '\n';
  }
  {
    std::ofstream f = open(fpath("_node_attributes.txt"));
    char buf[32];
    for (const Graph& g : d.graphs) {
      for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.features.cols; ++j) {
          std::snprintf(buf, sizeof(buf), "%.17g", g.features.at(i, j));
          f << (j ? ", " : "") << buf;
        }
        f << '\n';
      }
    }
  }
  {
    json meta;
    meta["task"] = task_name(d.task);
    meta["num_classes"] = d.num_classes;
    meta["node_labels_are_targets"] = node_targets;
    if (d.split) {
      meta["split"] = {{"train", d.split->train}, {"val", d.split->val}, {"test", d.split->test}};
    }
    std::ofstream f = open(fpath("_meta.json"));
    f << meta.dump(2) << '\n';
  }
}

Dataset gen_sbm_cluster(const SBMSpec& spec) {
  if (spec.blocks < 2) throw InputError("gen_sbm_cluster: need at least 2 blocks");
  if (!(spec.q >= 0.0 && spec.q < spec.p && spec.p <= 1.0))
    throw InputError("gen_sbm_cluster: need 0 <= q < p <= 1");
  if (spec.block_min < 1 || spec.block_min > spec.block_max)
    throw InputError("gen_sbm_cluster: bad block size range");
  if (spec.labeled_fraction < 0.0 || spec.labeled_fraction > 1.0)
    throw InputError("gen_sbm_cluster: labeled_fraction must be in [0, 1]");
  if (spec.num_graphs < 1) throw InputError("gen_sbm_cluster: need at least 1 graph");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> size_dist(spec.block_min, spec.block_max);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  int c = spec.blocks;

  Dataset d;
  d.name = "sbm-cluster";
  d.task = TaskKind::NodeClassificationInductive;
  d.num_classes = c;
  for (int gi = 0; gi < spec.num_graphs; ++gi) {
    std::vector<int> bsize(c), boff(c + 1, 0);
    for (int b = 0; b < c; ++b) {
      bsize[b] = size_dist(rng);
      boff[b + 1] = boff[b] + bsize[b];
    }
    int n = boff[c];
    std::vector<int> block(n);
    for (int b = 0; b < c; ++b)
      for (int i = boff[b]; i < boff[b + 1]; ++i) block[i] = b;

    Tensor feat(n, c + 1, 0.0);
    for (int i = 0; i < n; ++i) feat.at(i, c) = 1.0;  // unlabeled indicator
    for (int b = 0; b < c; ++b) {
      int keys = static_cast<int>(std::ceil(spec.labeled_fraction * bsize[b]));
      keys = std::min(keys, bsize[b]);
      std::vector<int> ids(bsize[b]);
      for (int i = 0; i < bsize[b]; ++i) ids[i] = boff[b] + i;
      std::shuffle(ids.begin(), ids.end(), rng);
      for (int k = 0; k < keys; ++k) {
        feat.at(ids[k], b) = 1.0;
        feat.at(ids[k], c) = 0.0;
      }
    }

    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        double pr = block[u] == block[v] ? spec.p : spec.q;
        if (coin(rng) < pr) edges.push_back({u, v});
      }

    Graph g = make_graph(n, edges, std::move(feat));
    g.node_labels = std::move(block);
    d.graphs.push_back(std::move(g));
  }
  validate_dataset(d);
  return d;
}

Dataset gen_feature_only(int n_graphs, std::uint64_t seed) {
  if (n_graphs < 1) throw InputError("gen_feature_only: need at least 1 graph");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(8, 16);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int dim = 8;

  Dataset d;
  d.name = "feature-only";
  d.task = TaskKind::GraphClassification;
  d.num_classes = 2;
  for (int gi = 0; gi < n_graphs; ++gi) {
    int n;
    Tensor feat;
    double mean;
    do {  // keep a margin around the threshold so the task is cleanly separable
      n = size_dist(rng);
      feat = Tensor(n, dim);
      double sum = 0.0;
      for (double& x : feat.data) {
        x = unif(rng);
        sum += x;
      }
      mean = sum / feat.size();
    } while (std::abs(mean - 0.5) < 0.005);

    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (unif(rng) < 0.3) edges.push_back({u, v});

    Graph g = make_graph(n, edges, std::move(feat));
    g.graph_label = mean > 0.5 ? 1 : 0;
    d.graphs.push_back(std::move(g));
  }
  validate_dataset(d);
  return d;
}

Dataset gen_structure_only(int n_graphs, std::uint64_t seed) {
  if (n_graphs < 1) throw InputError("gen_structure_only: need at least 1 graph");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m_dist(4, 8);

  Dataset d;
  d.name = "structure-only";
  d.task = TaskKind::GraphClassification;
  d.num_classes = 2;
  for (int gi = 0; gi < n_graphs; ++gi) {
    int m = m_dist(rng);
    int n = 2 * m;
    std::vector<Edge> edges;
    if (gi % 2 == 0) {  // class 0: one cycle of length 2m
      for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
    } else {  // class 1: two disjoint m-cycles
      for (int i = 0; i < m; ++i) edges.push_back({i, (i + 1) % m});
      for (int i = 0; i < m; ++i) edges.push_back({m + i, m + (i + 1) % m});
    }
    Graph g = make_graph(n, edges, Tensor::ones(n, 1));
    g.graph_label = gi % 2;
    d.graphs.push_back(std::move(g));
  }
  validate_dataset(d);
  return d;
}

Dataset realize(const DatasetSpec& spec) {
  Dataset d;
  if (!spec.path.empty()) {
    std::string name = spec.name.empty() ? fs::path(spec.path).filename().string() : spec.name;
    d = load_tu(spec.path, name);
  } else if (spec.generator == "sbm-cluster") {
    SBMSpec s = spec.sbm;
    s.num_graphs = spec.num_graphs;
    s.seed = spec.seed;
    d = gen_sbm_cluster(s);
  } else if (spec.generator == "feature-only") {
    d = gen_feature_only(spec.num_graphs, spec.seed);
  } else if (spec.generator == "structure-only") {
    d = gen_structure_only(spec.num_graphs, spec.seed);
  } else {
    throw InputError("unknown generator: " + spec.generator);
  }
  if (!spec.name.empty()) d.name = spec.name;
  return d;
}

namespace {

void check_keys(const json& j, const std::string& where,
                const std::vector<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw IoError(path + ": " + e.what());
  }

  try {
    check_keys(j, "config",
               {"datasets", "models", "model_overrides", "suite", "train", "out_dir", "seed",
                "n_clusters", "flag_margin", "workers"});
    RunConfig cfg;

    for (const json& dj : j.at("datasets")) {
      check_keys(dj, "datasets[]",
                 {"name", "path", "generator", "graphs", "seed", "blocks", "block_min",
                  "block_max", "p", "q", "labeled_fraction"});
      DatasetSpec s;
      if (dj.contains("name")) s.name = dj.at("name").get<std::string>();
      if (dj.contains("path")) s.path = dj.at("path").get<std::string>();
      if (dj.contains("generator")) s.generator = dj.at("generator").get<std::string>();
      if (s.path.empty() == s.generator.empty())
        throw InputError("datasets[]: need exactly one of 'path' or 'generator'");
      if (!s.path.empty() && !fs::exists(s.path))
        throw InputError("datasets[]: path does not exist: " + s.path);
      if (dj.contains("graphs")) s.num_graphs = dj.at("graphs").get<int>();
      if (dj.contains("seed")) s.seed = dj.at("seed").get<std::uint64_t>();
      if (dj.contains("blocks")) s.sbm.blocks = dj.at("blocks").get<int>();
      if (dj.contains("block_min")) s.sbm.block_min = dj.at("block_min").get<int>();
      if (dj.contains("block_max")) s.sbm.block_max = dj.at("block_max").get<int>();
      if (dj.contains("p")) s.sbm.p = dj.at("p").get<double>();
      if (dj.contains("q")) s.sbm.q = dj.at("q").get<double>();
      if (dj.contains("labeled_fraction"))
        s.sbm.labeled_fraction = dj.at("labeled_fraction").get<double>();
      cfg.datasets.push_back(std::move(s));
    }
    if (cfg.datasets.empty()) throw InputError("config: no datasets");

    ModelConfig base;
    if (j.contains("model_overrides")) {
      const json& mo = j.at("model_overrides");
      check_keys(mo, "model_overrides",
                 {"hidden_dim", "num_conv_layers", "gat_heads", "cheb_order", "dropout"});
      if (mo.contains("hidden_dim")) base.hidden_dim = mo.at("hidden_dim").get<int>();
      if (mo.contains("num_conv_layers"))
        base.num_conv_layers = mo.at("num_conv_layers").get<int>();
      if (mo.contains("gat_heads")) base.gat_heads = mo.at("gat_heads").get<int>();
      if (mo.contains("cheb_order")) base.cheb_order = mo.at("cheb_order").get<int>();
      if (mo.contains("dropout")) base.dropout = mo.at("dropout").get<double>();
    }
    for (const json& mj : j.at("models")) {
      ModelConfig mc = base;
      mc.kind = parse_model(mj.get<std::string>());
      cfg.models.push_back(mc);
    }
    if (cfg.models.empty()) throw InputError("config: no models");

    if (j.contains("suite")) {
      for (const json& sj : j.at("suite"))
        cfg.suite.push_back(PerturbationKind::parse(sj.get<std::string>()));
    } else {
      cfg.suite = canonical_suite();
    }
    bool has_identity = false;
    for (const auto& p : cfg.suite)
      if (p.tag == PerturbationKind::Tag::Identity) has_identity = true;
    if (!has_identity) throw InputError("config: suite must contain identity");

    if (j.contains("train")) {
      const json& tj = j.at("train");
      check_keys(tj, "train",
                 {"epochs", "patience", "batch_size", "folds", "repetitions", "lr",
                  "val_fraction", "divergence_tolerance"});
      if (tj.contains("epochs")) cfg.train.epochs = tj.at("epochs").get<int>();
      if (tj.contains("patience")) cfg.train.patience = tj.at("patience").get<int>();
      if (tj.contains("batch_size")) cfg.train.batch_size = tj.at("batch_size").get<int>();
      if (tj.contains("folds")) cfg.train.folds = tj.at("folds").get<int>();
      if (tj.contains("repetitions")) cfg.train.repetitions = tj.at("repetitions").get<int>();
      if (tj.contains("lr")) cfg.train.adam.lr = tj.at("lr").get<double>();
      if (tj.contains("val_fraction")) cfg.train.val_fraction = tj.at("val_fraction").get<double>();
      if (tj.contains("divergence_tolerance"))
        cfg.train.divergence_tolerance = tj.at("divergence_tolerance").get<double>();
    }
    if (j.contains("seed")) cfg.train.base_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("n_clusters")) cfg.n_clusters = j.at("n_clusters").get<int>();
    if (j.contains("flag_margin")) cfg.flag_margin = j.at("flag_margin").get<double>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace graphtax
