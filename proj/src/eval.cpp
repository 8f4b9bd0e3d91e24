#include "graphtax/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "graphtax/error.hpp"

namespace graphtax {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int worker_count() {
  if (const char* env = std::getenv("GRAPHTAX_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return omp_get_max_threads();
}

std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& labels, int k,
                                               std::uint64_t seed) {
  int n = static_cast<int>(labels.size());
  if (k < 2) throw InputError("stratified_kfold: k must be >= 2");
  if (k > n) throw InputError("stratified_kfold: k exceeds sample count");

  int num_classes = 0;
  for (int y : labels) {
    if (y < 0) throw InputError("stratified_kfold: negative label");
    num_classes = std::max(num_classes, y + 1);
  }
  std::vector<std::vector<int>> by_class(num_classes);
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> folds(k);
  int cursor = 0;  // carries over between classes to balance fold sizes
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (int idx : members) {
      folds[cursor % k].push_back(idx);
      ++cursor;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

// Mann-Whitney AUROC of one score column with midrank ties.
double binary_auroc(const std::vector<double>& score, const std::vector<char>& is_pos) {
  int n = static_cast<int>(score.size());
  long long pos = 0;
  for (char p : is_pos) pos += p ? 1 : 0;
  long long neg = n - pos;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return score[a] < score[b]; });
  double rank_pos = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && score[idx[j]] == score[idx[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based ranks i+1..j
    for (int t = i; t < j; ++t)
      if (is_pos[idx[t]]) rank_pos += midrank;
    i = j;
  }
  double u = rank_pos - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auroc_impl(const Tensor& probs, const std::vector<int>& labels,
                  const std::vector<int>& rows) {
  int c = probs.cols;
  if (c < 2) throw InputError("auroc: need at least 2 score columns");
  for (int r : rows) {
    if (r < 0 || r >= probs.rows) throw InputError("auroc: row index out of range");
    if (labels[r] < 0 || labels[r] >= c) throw InputError("auroc: label out of range");
  }
  int m = static_cast<int>(rows.size());

  auto one_vs_rest = [&](int cls) {
    std::vector<double> score(m);
    std::vector<char> is_pos(m);
    for (int i = 0; i < m; ++i) {
      score[i] = probs.at(rows[i], cls);
      is_pos[i] = labels[rows[i]] == cls ? 1 : 0;
    }
    return binary_auroc(score, is_pos);
  };

  std::vector<long long> count(c, 0);
  for (int r : rows) ++count[labels[r]];

  if (c == 2) {
    if (count[0] == 0 || count[1] == 0) throw EvalError("auroc: need both classes present");
    return one_vs_rest(1);
  }
  double total = 0.0;
  int evaluated = 0;
  for (int cls = 0; cls < c; ++cls) {
    if (count[cls] == 0 || count[cls] == m) continue;
    total += one_vs_rest(cls);
    ++evaluated;
  }
  if (evaluated == 0) throw EvalError("auroc: no class has both polarities");
  return total / evaluated;
}

}  // namespace

double auroc(const Tensor& probs, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != probs.rows)
    throw InputError("auroc: label count mismatch");
  std::vector<int> rows(probs.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return auroc_impl(probs, labels, rows);
}

double auroc_masked(const Tensor& probs, const std::vector<int>& labels,
                    const std::vector<int>& rows) {
  if (static_cast<int>(labels.size()) != probs.rows)
    throw InputError("auroc: label count mismatch");
  if (rows.empty()) throw EvalError("auroc: empty row subset");
  return auroc_impl(probs, labels, rows);
}

std::vector<int> stratify_labels(const Dataset& d) {
  std::vector<int> out;
  out.reserve(d.graphs.size());
  if (d.task == TaskKind::GraphClassification) {
    for (const Graph& g : d.graphs) out.push_back(g.graph_label.value());
    return out;
  }
  for (const Graph& g : d.graphs) {
    std::vector<int> count(d.num_classes, 0);
    for (int y : *g.node_labels) ++count[y];
    int best = 0;
    for (int y = 1; y < d.num_classes; ++y)
      if (count[y] > count[best]) best = y;
    out.push_back(best);
  }
  return out;
}

namespace {

Tensor eval_probs(GNNModel& m, const PreparedBatch& b) {
  Tape t(&m.params);
  std::mt19937_64 unused(0);
  VarId logits = model_forward(t, m, b, /*train_mode=*/false, unused);
  return softmax_rows(t.value(logits));
}

struct Snapshot {
  std::vector<Tensor> values;
  std::vector<Tensor> bn_mean, bn_var;
};

Snapshot take_snapshot(const GNNModel& m) {
  Snapshot s;
  s.values.reserve(m.params.size());
  for (const auto& e : m.params.entries) s.values.push_back(e.value);
  for (const auto& bn : m.bn) {
    s.bn_mean.push_back(bn.running_mean);
    s.bn_var.push_back(bn.running_var);
  }
  return s;
}

void restore_snapshot(GNNModel& m, const Snapshot& s) {
  for (int i = 0; i < m.params.size(); ++i) m.params.entries[i].value = s.values[i];
  for (size_t i = 0; i < m.bn.size(); ++i) {
    m.bn[i].running_mean = s.bn_mean[i];
    m.bn[i].running_var = s.bn_var[i];
  }
}

struct JobSpec {
  int fold_or_rep = 0;
  std::uint64_t seed = 0;
  // Graph indices for inductive tasks, node indices for transductive.
  std::vector<int> train, val, test;
};

std::vector<const Graph*> pick(const Dataset& d, const std::vector<int>& idx) {
  std::vector<const Graph*> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(&d.graphs[i]);
  return out;
}

std::vector<int> batch_labels(const Dataset& d, const PreparedBatch& b) {
  return d.task == TaskKind::GraphClassification ? b.graph_labels : b.node_labels;
}

// Shared epoch/early-stopping loop. `train_epoch` must return the job rng to
// a deterministic state; `val_score` returns the validation AUROC or NaN
// when there is no validation set.
template <typename TrainEpoch, typename ValScore>
int fit(GNNModel& model, const TrainConfig& tc, bool has_val, TrainEpoch train_epoch,
        ValScore val_score) {
  double best_val = -std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  Snapshot best;
  int epochs_ran = 0;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    train_epoch();
    epochs_ran = epoch + 1;
    if (!has_val) continue;
    double v = val_score();
    if (v > best_val) {
      best_val = v;
      best_epoch = epoch;
      best = take_snapshot(model);
    } else if (epoch - best_epoch >= tc.patience) {
      break;
    }
  }
  if (has_val && best_epoch >= 0) restore_snapshot(model, best);
  return epochs_ran;
}

JobResult run_job_inductive(const Dataset& d, const ModelConfig& mc, const TrainConfig& tc,
                            const JobSpec& spec) {
  JobResult res;
  res.fold_or_rep = spec.fold_or_rep;
  res.seed = spec.seed;

  GNNModel model = assemble(mc, d.graphs[0].features.cols, d.num_classes, d.task, spec.seed);
  AdamState adam(model.params, tc.adam);
  std::mt19937_64 rng(mix_seed(spec.seed, 0x7Ea1));

  PreparedBatch val_batch, test_batch;
  bool has_val = !spec.val.empty();
  if (has_val) val_batch = prepare_batch(pick(d, spec.val), mc.kind);
  test_batch = prepare_batch(pick(d, spec.test), mc.kind);
  std::vector<int> val_labels = has_val ? batch_labels(d, val_batch) : std::vector<int>{};
  std::vector<int> test_labels = batch_labels(d, test_batch);

  std::vector<int> order = spec.train;
  try {
    auto train_epoch = [&]() {
      std::shuffle(order.begin(), order.end(), rng);
      for (size_t start = 0; start < order.size(); start += tc.batch_size) {
        size_t end = std::min(order.size(), start + tc.batch_size);
        std::vector<int> chunk(order.begin() + start, order.begin() + end);
        PreparedBatch batch = prepare_batch(pick(d, chunk), mc.kind);
        std::vector<int> labels = batch_labels(d, batch);
        Tape tape(&model.params);
        VarId logits = model_forward(tape, model, batch, /*train_mode=*/true, rng);
        VarId loss = tape.cross_entropy(logits, &labels);
        tape.backward(loss);
        adam_step(model.params, adam);
      }
    };
    auto val_score = [&]() {
      try {
        return auroc(eval_probs(model, val_batch), val_labels);
      } catch (const EvalError&) {
        return 0.5;  // validation slice without both polarities: neutral score
      }
    };
    res.epochs_ran = fit(model, tc, has_val, train_epoch, val_score);
    res.auroc = auroc(eval_probs(model, test_batch), test_labels);
  } catch (const NumericError&) {
    res.diverged = true;
    res.auroc = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

JobResult run_job_transductive(const Dataset& d, const ModelConfig& mc, const TrainConfig& tc,
                               const JobSpec& spec) {
  JobResult res;
  res.fold_or_rep = spec.fold_or_rep;
  res.seed = spec.seed;

  const Graph& g = d.graphs[0];
  GNNModel model = assemble(mc, g.features.cols, d.num_classes, d.task, spec.seed);
  AdamState adam(model.params, tc.adam);
  std::mt19937_64 rng(mix_seed(spec.seed, 0x7Ea1));

  PreparedBatch batch = prepare_batch({&g}, mc.kind);
  const std::vector<int>& labels = batch.node_labels;
  bool has_val = !spec.val.empty();

  try {
    auto train_epoch = [&]() {
      Tape tape(&model.params);
      VarId logits = model_forward(tape, model, batch, /*train_mode=*/true, rng);
      VarId loss = tape.cross_entropy(logits, &labels, &spec.train);
      tape.backward(loss);
      adam_step(model.params, adam);
    };
    auto val_score = [&]() {
      try {
        return auroc_masked(eval_probs(model, batch), labels, spec.val);
      } catch (const EvalError&) {
        return 0.5;
      }
    };
    res.epochs_ran = fit(model, tc, has_val, train_epoch, val_score);
    res.auroc = auroc_masked(eval_probs(model, batch), labels, spec.test);
  } catch (const NumericError&) {
    res.diverged = true;
    res.auroc = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

// Carves a stratified validation slice out of `pool`, targeting
// round(1/val_fraction) folds; returns {train, val}.
std::pair<std::vector<int>, std::vector<int>> split_validation(const std::vector<int>& pool,
                                                               const std::vector<int>& labels,
                                                               double val_fraction,
                                                               std::uint64_t seed) {
  int n = static_cast<int>(pool.size());
  if (val_fraction <= 0.0 || n < 2) return {pool, {}};
  int kv = static_cast<int>(std::lround(1.0 / val_fraction));
  kv = std::min(kv, n);
  if (kv < 2) return {pool, {}};
  std::vector<int> pool_labels(n);
  for (int i = 0; i < n; ++i) pool_labels[i] = labels[pool[i]];
  auto folds = stratified_kfold(pool_labels, kv, seed);
  std::vector<char> in_val(n, 0);
  for (int i : folds[0]) in_val[i] = 1;
  std::vector<int> train, val;
  for (int i = 0; i < n; ++i) (in_val[i] ? val : train).push_back(pool[i]);
  return {train, val};
}

}  // namespace

EvalResult run_protocol(const Dataset& d, const ModelConfig& mc, const TrainConfig& tc) {
  validate_dataset(d);
  if (tc.folds < 2) throw InputError("run_protocol: folds must be >= 2");
  if (tc.repetitions < 1) throw InputError("run_protocol: repetitions must be >= 1");
  if (tc.epochs < 1 || tc.batch_size < 1) throw InputError("run_protocol: bad train config");
  auto t0 = std::chrono::steady_clock::now();

  bool transductive = d.task == TaskKind::NodeClassificationTransductive;
  std::vector<JobSpec> specs;

  if (d.split) {
    for (int r = 0; r < tc.repetitions; ++r) {
      JobSpec s;
      s.fold_or_rep = r;
      s.seed = tc.base_seed + static_cast<std::uint64_t>(r);
      s.train = d.split->train;
      s.val = d.split->val;
      s.test = d.split->test;
      specs.push_back(std::move(s));
    }
  } else {
    std::vector<int> labels;
    if (transductive) {
      labels = *d.graphs[0].node_labels;
    } else {
      labels = stratify_labels(d);
    }
    auto folds = stratified_kfold(labels, tc.folds, mix_seed(tc.base_seed, 0x0F01D5EEDULL));
    int n = static_cast<int>(labels.size());
    for (int f = 0; f < tc.folds; ++f) {
      JobSpec s;
      s.fold_or_rep = f;
      s.seed = mix_seed(tc.base_seed, static_cast<std::uint64_t>(f));
      s.test = folds[f];
      std::vector<char> in_test(n, 0);
      for (int i : s.test) in_test[i] = 1;
      std::vector<int> pool;
      for (int i = 0; i < n; ++i)
        if (!in_test[i]) pool.push_back(i);
      auto [train, val] = split_validation(pool, labels, tc.val_fraction, mix_seed(s.seed, 0x5A11CE));
      s.train = std::move(train);
      s.val = std::move(val);
      if (s.train.empty()) throw InputError("run_protocol: empty training portion");
      specs.push_back(std::move(s));
    }
  }

  int njobs = static_cast<int>(specs.size());
  std::vector<JobResult> results(njobs);
  std::vector<std::string> errors(njobs);
  int workers = worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < njobs; ++i) {
    try {
      results[i] = transductive ? run_job_transductive(d, mc, tc, specs[i])
                                : run_job_inductive(d, mc, tc, specs[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw EvalError("run_protocol: " + e);

  EvalResult out;
  out.jobs = std::move(results);
  int diverged = out.num_diverged();
  if (diverged > tc.divergence_tolerance * njobs)
    throw EvalError("run_protocol: " + std::to_string(diverged) + " of " +
                    std::to_string(njobs) + " runs diverged");
  double sum = 0.0;
  int completed = 0;
  for (const auto& j : out.jobs)
    if (!j.diverged) {
      sum += j.auroc;
      ++completed;
    }
  out.mean_auroc = sum / completed;
  double ss = 0.0;
  for (const auto& j : out.jobs)
    if (!j.diverged) {
      double dlt = j.auroc - out.mean_auroc;
      ss += dlt * dlt;
    }
  out.std_auroc = std::sqrt(ss / completed);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Tensor predict_probs(GNNModel& model, const std::vector<const Graph*>& graphs) {
  PreparedBatch b = prepare_batch(graphs, model.cfg.kind);
  return eval_probs(model, b);
}

}  // namespace graphtax
