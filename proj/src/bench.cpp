#include "graphbo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "graphbo/candidate.hpp"
#include "json.hpp"

namespace graphbo {

using nlohmann::json;

std::vector<LabeledDigraph> TabularBenchmark::graphs() const {
  std::vector<LabeledDigraph> out;
  out.reserve(entries.size());
  for (const auto& [k, e] : entries) out.push_back(e.graph);
  return out;
}

TabularBenchmark load_tabular(const std::string& path, const SearchSpaceSpec& spec) {
  std::ifstream in(path);
  if (!in) throw BenchmarkError("cannot open benchmark file: " + path);
  TabularBenchmark bench;
  bench.spec = spec;
  bench.name = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      std::ostringstream os;
      os << path << ":" << lineno << ": " << msg;
      throw BenchmarkError(os.str());
    };
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("bad json: ") + e.what());
    }
    TabularBenchmark::Entry entry;
    try {
      entry.graph = parse_graph(rec.at("graph").dump());
    } catch (const GraphError& e) {
      fail(std::string("bad graph: ") + e.what());
    }
    if (!validates_against(entry.graph, spec)) fail("graph violates the search space");
    auto read_errors = [&](const char* field, std::vector<double>& out) {
      if (!rec.contains(field)) fail(std::string("missing ") + field);
      for (const auto& a : rec.at(field)) {
        double acc = a.get<double>();
        if (acc < 0.0 || acc > 1.0) fail(std::string(field) + " out of [0,1]");
        out.push_back(1.0 - acc);
      }
      if (out.empty()) fail(std::string(field) + " is empty");
    };
    read_errors("val_acc", entry.val_errors);
    read_errors("test_acc", entry.test_errors);
    entry.train_time = rec.value("train_time", 0.0);
    std::string key = canonical_key(entry.graph).key;
    if (!bench.entries.emplace(key, std::move(entry)).second) fail("duplicate graph key");
  }
  if (bench.entries.empty()) throw BenchmarkError(path + ": empty benchmark");
  return bench;
}

TabularBenchmark load_tabular(const std::string& path) {
  // permissive first pass to infer the space, then a validating reload
  SearchSpaceSpec wide;
  wide.min_nodes = 2;
  wide.max_nodes = 1 << 20;
  wide.max_edges = 1 << 20;
  wide.require_single_io = false;
  wide.allowed_labels = {"input", "output"};
  SearchSpaceSpec inferred = wide;
  {
    std::ifstream in(path);
    if (!in) throw BenchmarkError("cannot open benchmark file: " + path);
    std::string line;
    int max_nodes = 2, max_edges = 1, min_nodes = 1 << 20;
    bool any = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      LabeledDigraph g = parse_graph(rec.at("graph").dump());
      any = true;
      max_nodes = std::max(max_nodes, g.num_nodes());
      min_nodes = std::min(min_nodes, g.num_nodes());
      max_edges = std::max(max_edges, g.num_edges());
      for (const auto& l : g.node_labels) inferred.allowed_labels.insert(l);
    }
    if (!any) throw BenchmarkError(path + ": empty benchmark");
    inferred.min_nodes = std::max(2, min_nodes);
    inferred.max_nodes = max_nodes;
    inferred.max_edges = std::max(max_edges, max_nodes - 1);
    inferred.require_single_io = true;
  }
  try {
    return load_tabular(path, inferred);
  } catch (const BenchmarkError&) {
    // multi-io spaces (randomly wired cells)
    inferred.require_single_io = false;
    return load_tabular(path, inferred);
  }
}

void save_tabular(const TabularBenchmark& bench, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw BenchmarkError("cannot write benchmark file: " + path);
  for (const auto& [key, e] : bench.entries) {
    json rec;
    rec["graph"] = json::parse(serialize_graph(e.graph));
    auto acc = [](const std::vector<double>& errs) {
      std::vector<double> a;
      for (double e : errs) a.push_back(1.0 - e);
      return a;
    };
    rec["val_acc"] = acc(e.val_errors);
    rec["test_acc"] = acc(e.test_errors);
    rec["train_time"] = e.train_time;
    out << rec.dump() << '\n';
  }
}

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

}  // namespace

std::pair<double, double> query(const TabularBenchmark& bench, const LabeledDigraph& g,
                                QueryMode mode, Rng& rng) {
  auto it = bench.entries.find(canonical_key(g).key);
  if (it == bench.entries.end())
    throw BenchmarkError("unknown architecture key: " + canonical_key(g).key);
  const auto& e = it->second;
  double val = mode == QueryMode::deterministic
                   ? mean_of(e.val_errors)
                   : e.val_errors[std::uniform_int_distribution<size_t>(
                         0, e.val_errors.size() - 1)(rng)];
  return {val, mean_of(e.test_errors)};
}

std::vector<std::string> SyntheticObjective::positive_motifs() const {
  std::vector<std::string> out;
  for (const auto& [s, w] : planted_motifs)
    if (w > 0) out.push_back(s);
  return out;
}

std::vector<std::string> SyntheticObjective::negative_motifs() const {
  std::vector<std::string> out;
  for (const auto& [s, w] : planted_motifs)
    if (w < 0) out.push_back(s);
  return out;
}

SearchSpaceSpec SyntheticObjective::search_space() {
  SearchSpaceSpec spec;
  spec.min_nodes = 3;
  spec.max_nodes = 7;
  spec.max_edges = 14;
  spec.allowed_labels = {"input", "output", "conv3x3", "conv1x1"};
  return spec;
}

SyntheticObjective SyntheticObjective::default_instance(double noise_sd) {
  SyntheticObjective obj;
  // every positive motif is a conditional pattern that is rare under
  // uniform random sampling; all four co-occur on the 7-node witness
  // with labels input,c=conv3x3,a=conv1x1,b=conv1x1,d=conv3x3,
  // q=conv1x1,output and edges 0>c 1>2 0>a 2>3 2>4 3>4 0>d 1>5 4>5
  // 0>q 5>6 1>6 0>6 (indices), the optimum at 0.18 = 0.35 - 0.17
  obj.planted_motifs = {
      {"conv3x3(conv1x1, conv1x1, input)", 0.05},
      {"conv1x1(conv3x3, conv3x3, input)", 0.05},
      {"output(conv1x1, conv3x3, input)", 0.04},
      {"conv1x1(conv3x3, input)", 0.03},
      {"conv1x1(conv1x1, input)", -0.05},
      {"output(conv1x1)", -0.05},
  };
  obj.base_error = 0.35;
  obj.noise_sd = noise_sd;
  obj.H_truth = 1;
  return obj;
}

SyntheticObjective SyntheticObjective::transfer_instance(double noise_sd) {
  SyntheticObjective obj;
  // shares the two rare planted motifs of the default instance, with a
  // shifted base and new bad motifs; any graph holding both shared
  // motifs and no bad one (the default witness qualifies) sits at the
  // optimum 0.28 = 0.40 - 0.12
  obj.planted_motifs = {
      {"conv3x3(conv1x1, conv1x1, input)", 0.06},
      {"conv1x1(conv3x3, conv3x3, input)", 0.06},
      {"conv3x3(conv3x3)", -0.05},
      {"output(conv3x3, input)", -0.05},
  };
  obj.base_error = 0.40;
  obj.noise_sd = noise_sd;
  obj.H_truth = 1;
  return obj;
}

double synthetic_eval(const SyntheticObjective& obj, const LabeledDigraph& g, Rng& rng) {
  FeatureIndex index;
  FeatureVector fv = extract_features(g, obj.H_truth, obj.mode, index);
  std::set<std::string> present;
  for (const auto& [id, c] : fv.counts) present.insert(decode_feature(id, index));
  double error = obj.base_error;
  for (const auto& [motif, w] : obj.planted_motifs)
    if (present.count(motif)) error -= w;
  if (obj.noise_sd > 0.0) error += std::normal_distribution<double>(0.0, obj.noise_sd)(rng);
  return std::clamp(error, 0.0, 1.0);
}

Objective make_synthetic_objective(const SyntheticObjective& obj) {
  SyntheticObjective noiseless = obj;
  noiseless.noise_sd = 0.0;
  return [obj, noiseless](const LabeledDigraph& g, Rng& rng) {
    double val = synthetic_eval(obj, g, rng);
    double test = synthetic_eval(noiseless, g, rng);
    return std::make_pair(val, test);
  };
}

Objective make_benchmark_objective(const TabularBenchmark& bench, QueryMode mode) {
  return [&bench, mode](const LabeledDigraph& g, Rng& rng) {
    return query(bench, g, mode, rng);
  };
}

double spearman(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("spearman: length mismatch");
  const int n = static_cast<int>(predictions.size());
  if (n < 2) throw std::invalid_argument("spearman: need at least 2 points");
  auto ranks = [n](const std::vector<double>& xs) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return xs[a] < xs[b]; });
    std::vector<double> r(n);
    int i = 0;
    while (i < n) {
      int j = i;
      while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
      double avg = 0.5 * (i + j) + 1.0;  // average rank, 1-based
      for (int k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto ra = ranks(predictions), rb = ranks(truths);
  double ma = mean_of(ra), mb = mean_of(rb);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return num / std::sqrt(va * vb);
}

RegressionStats run_regression_eval(const std::vector<LabeledDigraph>& graphs,
                                    const std::vector<double>& val_errors,
                                    const FitGrid& grid, int n_train, int n_test,
                                    int repeats, Rng& rng) {
  const int n = static_cast<int>(graphs.size());
  if (n_train + n_test > n)
    throw BenchmarkError("regression eval: benchmark smaller than n_train + n_test");
  RegressionStats stats;
  for (int rep = 0; rep < repeats; ++rep) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<LabeledDigraph> train_g, test_g;
    std::vector<double> train_y, test_y;
    for (int i = 0; i < n_train; ++i) {
      train_g.push_back(graphs[idx[i]]);
      train_y.push_back(val_errors[idx[i]]);
    }
    for (int i = n_train; i < n_train + n_test; ++i) {
      test_g.push_back(graphs[idx[i]]);
      test_y.push_back(val_errors[idx[i]]);
    }
    GPModel model = fit(train_g, train_y, grid);
    Prediction p = predict(model, test_g);
    stats.per_repeat.push_back(spearman(p.mean_error, test_y));
  }
  stats.mean = mean_of(stats.per_repeat);
  double v = 0.0;
  for (double r : stats.per_repeat) v += (r - stats.mean) * (r - stats.mean);
  stats.stderr_mean = repeats > 1 ? std::sqrt(v / (repeats - 1) / repeats) : 0.0;
  return stats;
}

TabularBenchmark generate_synthetic_benchmark(const SyntheticObjective& obj,
                                              const SearchSpaceSpec& spec, int count,
                                              int seeds, Rng& rng) {
  TabularBenchmark bench;
  bench.spec = spec;
  bench.name = "synthetic";
  SyntheticObjective noiseless = obj;
  noiseless.noise_sd = 0.0;
  int attempts = 0;
  while (static_cast<int>(bench.entries.size()) < count) {
    if (++attempts > 200 * count)
      throw BenchmarkError("synthetic benchmark: search space too small for count");
    LabeledDigraph g = random_graph(spec, rng);
    std::string key = canonical_key(g).key;
    if (bench.entries.count(key)) continue;
    TabularBenchmark::Entry e;
    e.graph = g;
    for (int s = 0; s < seeds; ++s) e.val_errors.push_back(synthetic_eval(obj, g, rng));
    e.test_errors.assign(seeds, synthetic_eval(noiseless, g, rng));
    bench.entries.emplace(key, std::move(e));
  }
  return bench;
}

}  // namespace graphbo
