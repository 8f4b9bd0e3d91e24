#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphtax/models.hpp"

namespace graphtax {

struct TrainConfig {
  int epochs = 200;
  int patience = 30;     // early stopping on validation AUROC
  int batch_size = 32;   // in graphs; transductive runs are full-batch
  int folds = 10;
  int repetitions = 10;  // used when the dataset carries a fixed split
  std::uint64_t base_seed = 0;
  AdamConfig adam;
  double val_fraction = 0.1;          // stratified slice of the training portion
  double divergence_tolerance = 0.2;  // fail the run if more jobs diverge
};

// One training job = one fold (CV path) or one repetition (fixed-split path).
struct JobResult {
  int fold_or_rep = 0;
  double auroc = 0.0;  // NaN when diverged
  int epochs_ran = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
};

struct EvalResult {
  double mean_auroc = 0.0;
  double std_auroc = 0.0;  // population std over completed jobs
  std::vector<JobResult> jobs;
  double wall_seconds = 0.0;

  int num_diverged() const {
    int n = 0;
    for (const auto& j : jobs) n += j.diverged ? 1 : 0;
    return n;
  }
};

// splitmix64 of base + salt; derives per-fold seeds so that runs over
// perturbed copies of a dataset stay paired.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

// Disjoint stratified folds: per-class counts across folds differ by at most
// one, and the deal position carries over between classes so fold sizes stay
// balanced. Deterministic given the seed.
std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& labels, int k,
                                               std::uint64_t seed);

// Mann-Whitney AUROC with midrank tie handling. probs holds one probability
// row per sample; binary tasks score on column 1, multiclass macro-averages
// one-vs-rest over classes with both polarities present. Throws EvalError
// when no class is evaluable.
double auroc(const Tensor& probs, const std::vector<int>& labels);
// Same, restricted to a row subset (transductive masks).
double auroc_masked(const Tensor& probs, const std::vector<int>& labels,
                    const std::vector<int>& rows);

// Stratification key per graph: the graph label for graph tasks, the
// majority node label (smallest label on ties) for node tasks.
std::vector<int> stratify_labels(const Dataset& d);

// Eval-mode class probabilities for a set of graphs (one row per graph for
// graph tasks, one per node otherwise).
Tensor predict_probs(GNNModel& model, const std::vector<const Graph*>& graphs);

// The paper protocol: 10-fold stratified CV when the dataset has no split,
// otherwise `repetitions` runs with seeds base..base+N-1 on the fixed split.
// Jobs run in parallel (bounded by GRAPHTAX_WORKERS when set); results are
// deterministic for a given config regardless of worker count.
EvalResult run_protocol(const Dataset& d, const ModelConfig& mc, const TrainConfig& tc);

int worker_count();  // GRAPHTAX_WORKERS override, else OpenMP default

}  // namespace graphtax
