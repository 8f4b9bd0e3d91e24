#pragma once

#include <string>
#include <vector>

#include "graphtax/eval.hpp"
#include "graphtax/perturb.hpp"

namespace graphtax {

// One line of the run log (JSONL). auroc is NaN for diverged jobs and is
// serialized as null.
struct RunRecord {
  std::string dataset;
  std::string model;
  std::string perturbation;
  int fold_or_rep = 0;
  double auroc = 0.0;
  int epochs_ran = 0;
  std::uint64_t seed = 0;
};

std::string run_record_json(const RunRecord& r);

// Sensitivity of one (dataset, model) pair across a perturbation suite.
// Entries are aligned with `suite`; relative = raw / baseline where baseline
// is the Identity entry's raw AUROC.
struct SensitivityProfile {
  std::string dataset;
  ModelKind model = ModelKind::GCN;
  std::vector<PerturbationKind> suite;
  std::vector<double> raw;
  std::vector<double> raw_std;
  std::vector<double> relative;
  double baseline = 0.0;
  bool flag = false;  // baseline too close to chance for stable ratios
};

SensitivityProfile compute_profile(const Dataset& d, const ModelConfig& mc,
                                   const TrainConfig& tc,
                                   const std::vector<PerturbationKind>& suite,
                                   double flag_margin = 0.02,
                                   std::vector<RunRecord>* log = nullptr);

// Dataset taxonomy: Ward dendrogram over per-dataset relative-score vectors
// (mean over the models present in the profile list; Identity column carries
// no information and is excluded from the metric).
struct TaxonomyResult {
  std::vector<std::string> suite;     // full suite token names
  std::vector<std::string> datasets;  // lexicographic; leaf i = datasets[i]
  Tensor relatives;                   // datasets x suite, mean over models

  struct Merge {
    int a = 0, b = 0;      // children; leaves are 0..n-1, merge t creates id n+t
    double dist = 0.0;     // Ward linkage height, non-decreasing over merges
  };
  std::vector<Merge> merges;
  std::vector<int> cluster_of;  // flat assignment per dataset, ids 0..k-1
};

TaxonomyResult cluster_profiles(const std::vector<SensitivityProfile>& profiles, int n_clusters);

// Dendrogram leaf order (left-to-right traversal of the final merge tree).
std::vector<int> dendrogram_order(const TaxonomyResult& t);

void write_profiles_csv(const std::string& path, const std::vector<SensitivityProfile>& profiles);
std::vector<SensitivityProfile> read_profiles_csv(const std::string& path);
void write_taxonomy_json(const std::string& path, const TaxonomyResult& t);
void write_heatmap_svg(const std::string& path, const TaxonomyResult& t);

}  // namespace graphtax
