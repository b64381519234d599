#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "graphbo/bench.hpp"
#include "graphbo/bo.hpp"
#include "graphbo/motif.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace graphbo;

namespace {

struct CommonOpts {
  uint64_t seed = 1;
  int threads = 0;
  std::string base = "dot";
  std::string neighborhood = "in";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "random seed; all randomness flows from it");
  cmd->add_option("--threads", o.threads, "cap on worker threads (0 = default)");
  cmd->add_option("--base", o.base, "base kernel")->check(CLI::IsMember({"dot", "oa"}));
  cmd->add_option("--neighborhood", o.neighborhood, "WL aggregation direction")
      ->check(CLI::IsMember({"in", "out", "both"}));
}

BaseKernel parse_base(const std::string& s) {
  return s == "oa" ? BaseKernel::histogram_intersection : BaseKernel::dot_product;
}

Neighborhood parse_mode(const std::string& s) {
  return s == "out" ? Neighborhood::out_neighbors
         : s == "both" ? Neighborhood::both
                       : Neighborhood::in_neighbors;
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Manifest carries the resolved argv so a run can be replayed bit-exactly.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::vector<std::string>& argv, const json& config,
                    uint64_t seed, const std::string& started,
                    const std::vector<std::string>& artifacts) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = config;
  m["seed"] = seed;
  m["started"] = started;
  m["finished"] = timestamp();
  m["artifacts"] = artifacts;
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

struct SearchOpts {
  CommonOpts common;
  std::string benchmark;
  std::string synthetic = "default";
  bool use_synthetic = false;
  bool noisy = false;
  int budget = 150;
  int batch = 5;
  int pool = 200;
  int n_init = 10;
  int n_parents = 10;
  std::string strategy = "half_half";
  std::string acquisition = "ei";
  double ei_xi = 0.0;
  double ucb_beta0 = 3.0;
  std::string out_dir = "run";
  // transfer-search only
  std::string motifs_path;
  double transfer_quantile = 0.25;
  int transfer_min_count = 10;
};

void add_search_opts(CLI::App* cmd, SearchOpts& o, bool transfer) {
  add_common(cmd, o.common);
  auto* bench = cmd->add_option("--benchmark", o.benchmark, "tabular benchmark (JSON lines)");
  cmd->add_flag("--synthetic-objective", o.use_synthetic,
                "search the built-in synthetic objective instead of a table")
      ->excludes(bench);
  cmd->add_option("--synthetic-instance", o.synthetic, "synthetic instance")
      ->check(CLI::IsMember({"default", "transfer"}));
  cmd->add_flag("--noisy", o.noisy, "draw per-seed noisy validation errors");
  cmd->add_option("--budget", o.budget, "total objective evaluations");
  cmd->add_option("--batch", o.batch, "BO batch size");
  cmd->add_option("--pool", o.pool, "candidate pool size per iteration");
  cmd->add_option("--n-init", o.n_init, "random initial samples");
  cmd->add_option("--n-parents", o.n_parents, "parents for mutation");
  cmd->add_option("--strategy", o.strategy, "pool assembly strategy")
      ->check(CLI::IsMember({"random", "mutate", "half_half"}));
  cmd->add_option("--acquisition", o.acquisition, "acquisition function")
      ->check(CLI::IsMember({"ei", "ucb"}));
  cmd->add_option("--ei-xi", o.ei_xi, "EI exploration offset");
  cmd->add_option("--ucb-beta0", o.ucb_beta0, "initial UCB beta");
  cmd->add_option("--out", o.out_dir, "output directory");
  if (transfer) {
    cmd->add_option("--motifs", o.motifs_path, "motif JSON from a past task")->required();
    cmd->add_option("--transfer-quantile", o.transfer_quantile,
                    "fraction of merged motifs kept as the pruning filter");
    cmd->add_option("--transfer-min-count", o.transfer_min_count,
                    "occurrence floor for current-task motif scores");
  }
}

json search_config(const SearchOpts& o) {
  json c;
  c["benchmark"] = o.benchmark;
  c["synthetic"] = o.use_synthetic ? o.synthetic : "";
  c["noisy"] = o.noisy;
  c["budget"] = o.budget;
  c["batch"] = o.batch;
  c["pool"] = o.pool;
  c["n_init"] = o.n_init;
  c["n_parents"] = o.n_parents;
  c["strategy"] = o.strategy;
  c["acquisition"] = o.acquisition;
  c["base"] = o.common.base;
  c["neighborhood"] = o.common.neighborhood;
  c["motifs"] = o.motifs_path;
  return c;
}

int run_search(const SearchOpts& o, const std::vector<std::string>& argv,
               const std::string& command) {
  apply_threads(o.common.threads);
  const std::string started = timestamp();

  SearchSpaceSpec spec;
  Objective objective;
  std::optional<TabularBenchmark> bench;
  std::vector<LabeledDigraph> universe;
  const std::vector<LabeledDigraph>* universe_ptr = nullptr;
  if (o.use_synthetic || o.benchmark.empty()) {
    spec = SyntheticObjective::search_space();
    SyntheticObjective obj = o.synthetic == "transfer"
                                 ? SyntheticObjective::transfer_instance(o.noisy ? 0.01 : 0.0)
                                 : SyntheticObjective::default_instance(o.noisy ? 0.01 : 0.0);
    objective = make_synthetic_objective(obj);
  } else {
    bench = load_tabular(o.benchmark);
    spec = bench->spec;
    objective = make_benchmark_objective(*bench,
                                         o.noisy ? QueryMode::noisy : QueryMode::deterministic);
    universe = bench->graphs();
    universe_ptr = &universe;
  }

  BOConfig cfg;
  cfg.budget = o.budget;
  cfg.batch = o.batch;
  cfg.n_init = o.n_init;
  cfg.acquisition = o.acquisition == "ucb" ? Acquisition::ucb : Acquisition::ei;
  cfg.ei_xi = o.ei_xi;
  cfg.ucb_beta0 = o.ucb_beta0;
  cfg.pool.pool_size = o.pool;
  cfg.pool.n_parents = o.n_parents;
  cfg.pool.strategy = o.strategy == "random"   ? PoolStrategy::random
                      : o.strategy == "mutate" ? PoolStrategy::mutate
                                               : PoolStrategy::half_half;
  cfg.grid.bases = {parse_base(o.common.base)};
  cfg.grid.neighborhood = parse_mode(o.common.neighborhood);
  cfg.record_wall_time = o.noisy;  // deterministic runs stay byte-reproducible
  cfg.transfer_quantile = o.transfer_quantile;
  cfg.transfer_min_occurrences = o.transfer_min_count;
  if (!o.motifs_path.empty()) {
    std::ifstream in(o.motifs_path);
    if (!in) throw std::runtime_error("cannot open motif file: " + o.motifs_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg.transfer_motifs = motifs_from_json(ss.str());
  }

  Rng rng(o.common.seed);
  SearchHistory history = run_bo(objective, spec, cfg, rng, universe_ptr);

  const fs::path out_dir(o.out_dir);
  write_file(out_dir / "history.csv", history.to_csv());
  // evaluated graphs in benchmark format, so `motifs` can fit on them
  {
    TabularBenchmark observed;
    observed.spec = spec;
    for (const auto& r : history.records) {
      TabularBenchmark::Entry e;
      e.graph = r.graph;
      e.val_errors = {r.val_error};
      e.test_errors = {r.test_error};
      observed.entries.emplace(r.candidate_key, std::move(e));
    }
    save_tabular(observed, (out_dir / "observations.jsonl").string());
  }
  write_manifest(out_dir, command, argv, search_config(o), o.common.seed, started,
                 {(out_dir / "history.csv").string(),
                  (out_dir / "observations.jsonl").string()});
  std::cout << "best val error " << history.best_val() << ", best test error "
            << history.best_test() << " after " << history.records.size()
            << " evaluations\n";
  return 0;
}

struct RegressOpts {
  CommonOpts common;
  std::string benchmark;
  int n_train = 50;
  int n_test = 400;
  int repeats = 20;
  std::string out;
};

int run_regress(const RegressOpts& o) {
  apply_threads(o.common.threads);
  TabularBenchmark bench = load_tabular(o.benchmark);
  std::vector<LabeledDigraph> graphs;
  std::vector<double> errors;
  Rng rng(o.common.seed);
  for (const auto& [key, e] : bench.entries) {
    graphs.push_back(e.graph);
    double s = 0.0;
    for (double v : e.val_errors) s += v;
    errors.push_back(s / e.val_errors.size());
  }
  FitGrid grid;
  grid.bases = {parse_base(o.common.base)};
  grid.neighborhood = parse_mode(o.common.neighborhood);
  RegressionStats stats =
      run_regression_eval(graphs, errors, grid, o.n_train, o.n_test, o.repeats, rng);
  json doc;
  doc["mean_spearman"] = stats.mean;
  doc["stderr"] = stats.stderr_mean;
  doc["per_repeat"] = stats.per_repeat;
  doc["n_train"] = o.n_train;
  doc["n_test"] = o.n_test;
  doc["repeats"] = o.repeats;
  std::string text = doc.dump(2) + "\n";
  if (!o.out.empty()) write_file(o.out, text);
  std::cout << text;
  return 0;
}

struct MotifOpts {
  CommonOpts common;
  std::string benchmark;
  int n_train = 300;
  int min_count = 10;
  double quantile = 0.25;
  std::string out = "motifs.json";
};

int run_motifs(const MotifOpts& o) {
  apply_threads(o.common.threads);
  TabularBenchmark bench = load_tabular(o.benchmark);
  std::vector<LabeledDigraph> all;
  std::vector<double> all_errors;
  for (const auto& [key, e] : bench.entries) {
    all.push_back(e.graph);
    double s = 0.0;
    for (double v : e.val_errors) s += v;
    all_errors.push_back(s / e.val_errors.size());
  }
  if (static_cast<int>(all.size()) < o.n_train)
    throw BenchmarkError("benchmark smaller than --n-train");
  Rng rng(o.common.seed);
  std::vector<int> idx(all.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<LabeledDigraph> graphs;
  std::vector<double> errors;
  for (int i = 0; i < o.n_train; ++i) {
    graphs.push_back(all[idx[i]]);
    errors.push_back(all_errors[idx[i]]);
  }
  FitGrid grid;
  grid.bases = {parse_base(o.common.base)};
  grid.neighborhood = parse_mode(o.common.neighborhood);
  GPModel model = fit(graphs, errors, grid);

  // the export carries every filtered motif; consumers re-take quantiles
  MotifSet set;
  set.H = model.cfg.H;
  set.mode = grid.neighborhood;
  for (auto& ms : motif_scores(model))
    if (ms.occurrences >= o.min_count) set.motifs.push_back(std::move(ms));
  std::sort(set.motifs.begin(), set.motifs.end(),
            [](const MotifScore& a, const MotifScore& b) { return a.score > b.score; });
  write_file(o.out, motifs_to_json(set) + "\n");

  MotifRanking ranking = rank_motifs(model, o.min_count, o.quantile);
  std::cout << "selected H=" << model.cfg.H << ", " << set.motifs.size()
            << " motifs with count >= " << o.min_count << "\n";
  std::cout << "top " << o.quantile << " quantile:\n";
  for (const auto& m : ranking.good)
    std::cout << "  + " << m.decoded << "  score " << m.score << "\n";
  std::cout << "bottom " << o.quantile << " quantile:\n";
  for (const auto& m : ranking.bad)
    std::cout << "  - " << m.decoded << "  score " << m.score << "\n";
  return 0;
}

struct SynthGenOpts {
  CommonOpts common;
  int count = 2000;
  int seeds = 3;
  double noise = 0.0;
  std::string instance = "default";
  std::string out = "synthetic.jsonl";
};

int run_synth_gen(const SynthGenOpts& o) {
  SyntheticObjective obj = o.instance == "transfer"
                               ? SyntheticObjective::transfer_instance(o.noise)
                               : SyntheticObjective::default_instance(o.noise);
  Rng rng(o.common.seed);
  TabularBenchmark bench = generate_synthetic_benchmark(
      obj, SyntheticObjective::search_space(), o.count, o.seeds, rng);
  save_tabular(bench, o.out);
  std::cout << "wrote " << bench.entries.size() << " graphs to " << o.out << "\n";
  return 0;
}

int dispatch(std::vector<std::string> args);

int run_replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json m = json::parse(in);
  std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
  if (!out_override.empty()) {
    for (size_t i = 0; i + 1 < argv.size(); ++i)
      if (argv[i] == "--out") argv[i + 1] = out_override;
  }
  return dispatch(std::move(argv));
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Bayesian optimization over labelled DAGs with a WL-subtree GP surrogate"};
  app.require_subcommand(1);

  SearchOpts search_opts;
  auto* search = app.add_subcommand("search", "run the BO search loop");
  add_search_opts(search, search_opts, false);

  SearchOpts transfer_opts;
  auto* transfer =
      app.add_subcommand("transfer-search", "BO search with motif-based pool pruning");
  add_search_opts(transfer, transfer_opts, true);

  RegressOpts regress_opts;
  auto* regress = app.add_subcommand("regress", "surrogate rank-correlation evaluation");
  add_common(regress, regress_opts.common);
  regress->add_option("--benchmark", regress_opts.benchmark)->required();
  regress->add_option("--n-train", regress_opts.n_train);
  regress->add_option("--n-test", regress_opts.n_test);
  regress->add_option("--repeats", regress_opts.repeats);
  regress->add_option("--out", regress_opts.out, "stats JSON path");

  MotifOpts motif_opts;
  auto* motifs = app.add_subcommand("motifs", "fit a surrogate and export motif scores");
  add_common(motifs, motif_opts.common);
  motifs->add_option("--benchmark", motif_opts.benchmark)->required();
  motifs->add_option("--n-train", motif_opts.n_train);
  motifs->add_option("--min-count", motif_opts.min_count);
  motifs->add_option("--quantile", motif_opts.quantile);
  motifs->add_option("--out", motif_opts.out);

  SynthGenOpts synth_opts;
  auto* synth = app.add_subcommand("synth-gen", "write a synthetic benchmark file");
  add_common(synth, synth_opts.common);
  synth->add_option("--count", synth_opts.count);
  synth->add_option("--seeds", synth_opts.seeds);
  synth->add_option("--noise", synth_opts.noise);
  synth->add_option("--instance", synth_opts.instance)
      ->check(CLI::IsMember({"default", "transfer"}));
  synth->add_option("--out", synth_opts.out);

  std::string replay_manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
  replay->add_option("--manifest", replay_manifest)->required();
  replay->add_option("--out", replay_out, "override output directory");

  // CLI11 parses argv-style reversed vectors
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (search->parsed()) return run_search(search_opts, args, "search");
  if (transfer->parsed()) return run_search(transfer_opts, args, "transfer-search");
  if (regress->parsed()) return run_regress(regress_opts);
  if (motifs->parsed()) return run_motifs(motif_opts);
  if (synth->parsed()) return run_synth_gen(synth_opts);
  if (replay->parsed()) return run_replay(replay_manifest, replay_out);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
