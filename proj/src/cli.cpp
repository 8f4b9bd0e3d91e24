#include "graphtax/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "graphtax/data_io.hpp"
#include "graphtax/error.hpp"
#include "graphtax/profiler.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace graphtax {

namespace {

std::string basename_of(const std::string& path) {
  std::string b = fs::path(path).filename().string();
  if (b.empty()) b = fs::path(path).parent_path().filename().string();
  return b;
}

struct DatasetArg {
  std::string dir;
  std::string name;  // defaults to the directory basename

  Dataset load() const { return load_tu(dir, name.empty() ? basename_of(dir) : name); }
};

void add_dataset_flags(CLI::App* cmd, DatasetArg& arg) {
  cmd->add_option("--dataset", arg.dir, "dataset directory (TU layout)")->required();
  cmd->add_option("--name", arg.name, "dataset name (default: directory basename)");
}

struct TrainFlags {
  void attach(CLI::App* cmd) {
    cmd->add_option("--epochs", tc.epochs);
    cmd->add_option("--patience", tc.patience);
    cmd->add_option("--batch-size", tc.batch_size);
    cmd->add_option("--folds", tc.folds);
    cmd->add_option("--repetitions", tc.repetitions);
    cmd->add_option("--lr", tc.adam.lr);
    cmd->add_option("--seed", tc.base_seed);
  }
  TrainConfig tc;
};

struct ModelFlags {
  void attach(CLI::App* cmd) {
    cmd->add_option("--hidden-dim", mc.hidden_dim);
    cmd->add_option("--layers", mc.num_conv_layers);
    cmd->add_option("--heads", mc.gat_heads);
    cmd->add_option("--cheb-order", mc.cheb_order);
    cmd->add_option("--dropout", mc.dropout);
  }
  ModelConfig mc;
};

std::vector<PerturbationKind> parse_suite(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return canonical_suite();
  std::vector<PerturbationKind> suite;
  for (const auto& t : tokens) suite.push_back(PerturbationKind::parse(t));
  return suite;
}

json eval_result_json(const EvalResult& r) {
  json jobs = json::array();
  for (const auto& j : r.jobs) {
    json o;
    o["fold_or_rep"] = j.fold_or_rep;
    if (j.diverged)
      o["auroc"] = nullptr;
    else
      o["auroc"] = j.auroc;
    o["epochs_ran"] = j.epochs_ran;
    o["seed"] = j.seed;
    o["diverged"] = j.diverged;
    jobs.push_back(std::move(o));
  }
  return json{{"mean_auroc", r.mean_auroc},
              {"std_auroc", r.std_auroc},
              {"diverged", r.num_diverged()},
              {"jobs", std::move(jobs)}};
}

void set_workers(int workers) {
  if (workers > 0) setenv("GRAPHTAX_WORKERS", std::to_string(workers).c_str(), 1);
}

void write_run_log(const std::string& path, const std::vector<RunRecord>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& r : log) out << run_record_json(r) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

int run_pipeline(const RunConfig& cfg) {
  set_workers(cfg.workers);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create directory " + cfg.out_dir + ": " + ec.message());

  std::vector<SensitivityProfile> profiles;
  std::vector<RunRecord> log;
  for (const DatasetSpec& spec : cfg.datasets) {
    Dataset d = realize(spec);
    for (const ModelConfig& mc : cfg.models) {
      std::cerr << "profiling " << d.name << " x " << model_name(mc.kind) << "\n";
      profiles.push_back(compute_profile(d, mc, cfg.train, cfg.suite, cfg.flag_margin, &log));
    }
  }

  write_run_log(cfg.out_dir + "/runs.jsonl", log);
  write_profiles_csv(cfg.out_dir + "/profiles.csv", profiles);
  TaxonomyResult tax = cluster_profiles(profiles, cfg.n_clusters);
  write_taxonomy_json(cfg.out_dir + "/taxonomy.json", tax);
  write_heatmap_svg(cfg.out_dir + "/heatmap.svg", tax);
  return 0;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"graph dataset sensitivity profiles and taxonomy"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset in TU layout");
  std::string gen_kind, gen_out, gen_name;
  DatasetSpec gen_spec;
  gen->add_option("--kind", gen_kind, "sbm-cluster | feature-only | structure-only")->required();
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--name", gen_name, "dataset name (default: output basename)");
  gen->add_option("--graphs", gen_spec.num_graphs);
  gen->add_option("--seed", gen_spec.seed);
  gen->add_option("--blocks", gen_spec.sbm.blocks);
  gen->add_option("--block-min", gen_spec.sbm.block_min);
  gen->add_option("--block-max", gen_spec.sbm.block_max);
  gen->add_option("--p", gen_spec.sbm.p);
  gen->add_option("--q", gen_spec.sbm.q);
  gen->add_option("--labeled-fraction", gen_spec.sbm.labeled_fraction);

  // perturb
  auto* perturb = app.add_subcommand("perturb", "apply one perturbation, write the dataset");
  DatasetArg perturb_in;
  std::string perturb_token, perturb_out, perturb_out_name;
  add_dataset_flags(perturb, perturb_in);
  perturb->add_option("--perturbation", perturb_token, "perturbation token")->required();
  perturb->add_option("--out", perturb_out, "output dataset directory")->required();
  perturb->add_option("--out-name", perturb_out_name, "output name (default: output basename)");

  // run
  auto* run = app.add_subcommand("run", "train one dataset x model x perturbation");
  DatasetArg run_in;
  std::string run_model = "gcn", run_token = "identity";
  TrainFlags run_train;
  ModelFlags run_mc;
  int run_workers = 0;
  add_dataset_flags(run, run_in);
  run->add_option("--model", run_model);
  run->add_option("--perturbation", run_token);
  run_train.attach(run);
  run_mc.attach(run);
  run->add_option("--workers", run_workers);

  // profile
  auto* profile = app.add_subcommand("profile", "full perturbation suite -> profiles CSV");
  DatasetArg prof_in;
  std::vector<std::string> prof_models{"gcn", "gat", "gin", "cheb"};
  std::vector<std::string> prof_suite;
  std::string prof_out = "profiles.csv", prof_log;
  double prof_margin = 0.02;
  TrainFlags prof_train;
  ModelFlags prof_mc;
  int prof_workers = 0;
  add_dataset_flags(profile, prof_in);
  profile->add_option("--models", prof_models, "model tokens")->delimiter(',');
  profile->add_option("--suite", prof_suite, "perturbation tokens (default: canonical suite)")
      ->delimiter(',');
  profile->add_option("--out", prof_out, "profiles CSV path");
  profile->add_option("--log", prof_log, "run-log JSONL path");
  profile->add_option("--flag-margin", prof_margin);
  prof_train.attach(profile);
  prof_mc.attach(profile);
  profile->add_option("--workers", prof_workers);

  // taxonomy
  auto* taxonomy = app.add_subcommand("taxonomy", "profiles CSV -> taxonomy JSON + heatmap SVG");
  std::string tax_profiles, tax_out = "taxonomy";
  int tax_clusters = 4;
  taxonomy->add_option("--profiles", tax_profiles, "profiles CSV path")->required();
  taxonomy->add_option("--clusters", tax_clusters, "flat cluster count");
  taxonomy->add_option("--out", tax_out, "output directory");

  // all
  auto* all = app.add_subcommand("all", "end-to-end pipeline from a run config");
  std::string all_config, all_out;
  std::uint64_t all_seed = 0;
  bool all_seed_set = false;
  int all_workers = 0;
  all->add_option("--config", all_config, "RunConfig JSON path")->required();
  all->add_option("--out", all_out, "override output directory");
  all->add_option("--seed", all_seed)->each([&](const std::string&) { all_seed_set = true; });
  all->add_option("--workers", all_workers);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help to stdout or the error + usage hint to stderr
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    DatasetSpec spec = gen_spec;
    spec.generator = gen_kind;
    spec.name = gen_name.empty() ? basename_of(gen_out) : gen_name;
    Dataset d = realize(spec);
    write_tu(gen_out, d.name, d);
    std::cout << "wrote " << gen_out << " (" << d.graphs.size() << " graphs)\n";
    return 0;
  }
  if (*perturb) {
    Dataset d = perturb_in.load();
    Dataset pd = apply(PerturbationKind::parse(perturb_token), d);
    pd.name = perturb_out_name.empty() ? basename_of(perturb_out) : perturb_out_name;
    write_tu(perturb_out, pd.name, pd);
    std::cout << "wrote " << perturb_out << "\n";
    return 0;
  }
  if (*run) {
    set_workers(run_workers);
    Dataset d = run_in.load();
    Dataset pd = apply(PerturbationKind::parse(run_token), d);
    ModelConfig mc = run_mc.mc;
    mc.kind = parse_model(run_model);
    EvalResult r = run_protocol(pd, mc, run_train.tc);
    json out = eval_result_json(r);
    out["dataset"] = d.name;
    out["model"] = run_model;
    out["perturbation"] = PerturbationKind::parse(run_token).name();
    std::cout << out.dump() << "\n";
    return 0;
  }
  if (*profile) {
    set_workers(prof_workers);
    Dataset d = prof_in.load();
    auto suite = parse_suite(prof_suite);
    std::vector<SensitivityProfile> profiles;
    std::vector<RunRecord> log;
    for (const std::string& mt : prof_models) {
      ModelConfig mc = prof_mc.mc;
      mc.kind = parse_model(mt);
      profiles.push_back(compute_profile(d, mc, prof_train.tc, suite, prof_margin,
                                         prof_log.empty() ? nullptr : &log));
    }
    write_profiles_csv(prof_out, profiles);
    if (!prof_log.empty()) write_run_log(prof_log, log);
    std::cout << "wrote " << prof_out << "\n";
    return 0;
  }
  if (*taxonomy) {
    auto profiles = read_profiles_csv(tax_profiles);
    TaxonomyResult tax = cluster_profiles(profiles, tax_clusters);
    std::error_code ec;
    fs::create_directories(tax_out, ec);
    if (ec) throw IoError("cannot create directory " + tax_out + ": " + ec.message());
    write_taxonomy_json(tax_out + "/taxonomy.json", tax);
    write_heatmap_svg(tax_out + "/heatmap.svg", tax);
    std::cout << "wrote " << tax_out << "/taxonomy.json, " << tax_out << "/heatmap.svg\n";
    return 0;
  }
  if (*all) {
    RunConfig cfg = parse_run_config(all_config);
    if (all_seed_set) cfg.train.base_seed = all_seed;
    if (!all_out.empty()) cfg.out_dir = all_out;
    if (all_workers > 0) cfg.workers = all_workers;
    return run_pipeline(cfg);
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace graphtax
