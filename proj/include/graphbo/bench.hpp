#pragma once

#include <map>
#include <string>
#include <vector>

#include "graphbo/bo.hpp"
#include "graphbo/graph.hpp"

namespace graphbo {

class BenchmarkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precomputed architecture -> per-seed metrics table standing in for
/// network training. Errors are stored as 1 - accuracy.
struct TabularBenchmark {
  struct Entry {
    LabeledDigraph graph;
    std::vector<double> val_errors;   // one per training seed
    std::vector<double> test_errors;  // one per training seed
    double train_time = 0.0;
  };
  std::map<std::string, Entry> entries;  // canonical key -> entry
  SearchSpaceSpec spec;
  std::string name;

  std::vector<LabeledDigraph> graphs() const;
};

enum class QueryMode { deterministic, noisy };

// JSON-lines loader; one record per line:
//   {"graph":{...},"val_acc":[...],"test_acc":[...],"train_time":t}
TabularBenchmark load_tabular(const std::string& path, const SearchSpaceSpec& spec);
// Infers the search space (node/edge bounds, label set) from the file.
TabularBenchmark load_tabular(const std::string& path);
void save_tabular(const TabularBenchmark& bench, const std::string& path);

// deterministic: seed-mean validation error. noisy: one uniformly drawn
// seed. Test error is always the seed mean.
std::pair<double, double> query(const TabularBenchmark& bench, const LabeledDigraph& g,
                                QueryMode mode, Rng& rng);

/// Desk-scale objective with known ground truth: planted subtree
/// indicators with fixed weights on top of a base error.
struct SyntheticObjective {
  std::vector<std::pair<std::string, double>> planted_motifs;  // decoded subtree, weight
  double base_error = 0.35;
  double noise_sd = 0.0;
  int H_truth = 1;
  Neighborhood mode = Neighborhood::in_neighbors;

  std::vector<std::string> positive_motifs() const;
  std::vector<std::string> negative_motifs() const;

  // The standard instance used across tests and the CLI.
  static SyntheticObjective default_instance(double noise_sd = 0.0);
  // A related task sharing the planted good motifs (transfer target).
  static SyntheticObjective transfer_instance(double noise_sd = 0.0);
  // The search space both instances live in.
  static SearchSpaceSpec search_space();
};

double synthetic_eval(const SyntheticObjective& obj, const LabeledDigraph& g, Rng& rng);

// An Objective closure: validation error per the noise mode, test error
// always noiseless.
Objective make_synthetic_objective(const SyntheticObjective& obj);
Objective make_benchmark_objective(const TabularBenchmark& bench, QueryMode mode);

// Spearman rank correlation with average-rank tie handling.
double spearman(const std::vector<double>& predictions, const std::vector<double>& truths);

struct RegressionStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::vector<double> per_repeat;
};

// Disjoint random train/test splits per repeat; fit, predict, Spearman.
RegressionStats run_regression_eval(const std::vector<LabeledDigraph>& graphs,
                                    const std::vector<double>& val_errors,
                                    const FitGrid& grid, int n_train, int n_test,
                                    int repeats, Rng& rng);

// Materializes a synthetic benchmark file: `count` distinct random
// graphs evaluated under `obj` for `seeds` draws each.
TabularBenchmark generate_synthetic_benchmark(const SyntheticObjective& obj,
                                              const SearchSpaceSpec& spec, int count,
                                              int seeds, Rng& rng);

}  // namespace graphbo
