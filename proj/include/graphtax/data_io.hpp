#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphtax/eval.hpp"
#include "graphtax/perturb.hpp"

namespace graphtax {

// TU text layout: <name>_A.txt (1-based comma-separated edge pairs),
// <name>_graph_indicator.txt, <name>_graph_labels.txt, optional
// <name>_node_labels.txt / <name>_node_attributes.txt, plus a
// <name>_meta.json sidecar (task kind, class count, whether node labels are
// prediction targets, optional split). Parse failures carry file:line.
Dataset load_tu(const std::string& dir, const std::string& name);
// Inverse of load_tu: load_tu(write_tu(d)) == d.
void write_tu(const std::string& dir, const std::string& name, const Dataset& d);

struct SBMSpec {
  int blocks = 6;  // c; block id = node class
  int block_min = 5;
  int block_max = 15;
  double p = 0.55;  // intra-block edge probability
  double q = 0.25;  // inter-block edge probability
  double labeled_fraction = 0.01;  // ceil(f * block size) key nodes per block
  int num_graphs = 100;
  std::uint64_t seed = 0;
};

// CLUSTER-style node classification: features reveal the class of a few key
// nodes (width c+1, last slot = unlabeled indicator); everything else must be
// inferred from structure.
Dataset gen_sbm_cluster(const SBMSpec& spec);

// Label = threshold on the grand mean of the node features; topology is an
// independent Erdos-Renyi graph, so structure carries no label information.
Dataset gen_feature_only(int n_graphs, std::uint64_t seed);

// Class 0 = one cycle of length 2m, class 1 = two disjoint m-cycles, constant
// ones features: only structure carries label information.
Dataset gen_structure_only(int n_graphs, std::uint64_t seed);

struct DatasetSpec {
  std::string name;
  std::string path;       // TU directory; empty when generated
  std::string generator;  // "sbm-cluster" | "feature-only" | "structure-only"
  int num_graphs = 100;
  std::uint64_t seed = 0;
  SBMSpec sbm;
};

Dataset realize(const DatasetSpec& spec);

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelConfig> models;
  std::vector<PerturbationKind> suite;
  TrainConfig train;
  std::string out_dir = "out";
  int n_clusters = 4;
  double flag_margin = 0.02;
  int workers = 0;  // 0 = leave GRAPHTAX_WORKERS / OpenMP default
};

RunConfig parse_run_config(const std::string& path);

}  // namespace graphtax
