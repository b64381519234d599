#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphbo/candidate.hpp"
#include "graphbo/gp.hpp"
#include "graphbo/motif.hpp"

namespace graphbo {

// (validation error, test error) for a candidate graph.
using Objective = std::function<std::pair<double, double>(const LabeledDigraph&, Rng&)>;

enum class Acquisition { ei, ucb };

struct BOConfig {
  int budget = 150;
  int batch = 5;
  int n_init = 10;
  Acquisition acquisition = Acquisition::ei;
  double ei_xi = 0.0;
  double ucb_beta0 = 3.0;
  PoolConfig pool;
  FitGrid grid;
  // Transfer pruning: past-task motif scores; merged with current-task
  // scores each iteration, top quantile kept as the pool filter.
  std::optional<MotifSet> transfer_motifs;
  double transfer_quantile = 0.25;
  int transfer_min_occurrences = 10;
  bool record_wall_time = false;  // off keeps history byte-reproducible

  void validate() const;
};

struct HistoryRecord {
  int iteration = 0;
  int n_evals = 0;
  LabeledDigraph graph;
  std::string candidate_key;
  double val_error = 0.0;
  double test_error = 0.0;
  double best_val_error = 0.0;
  double best_test_error = 0.0;
  double wall_time_s = 0.0;
};

struct SearchHistory {
  std::vector<HistoryRecord> records;

  std::string to_csv() const;
  double best_val() const;
  double best_test() const;
};

// Closed-form EI under the minimization convention, in transformed-error
// space. sd = 0 degrades to max(incumbent - mean - xi, 0).
double expected_improvement(double mean, double sd, double incumbent_value, double xi);

// -mean + beta_n * sd with beta_n = beta0 * sqrt(0.5 * log(2 (n+1))).
double ucb(double mean, double sd, int n_iteration, double beta0);

// Indices of the top-b pool members by acquisition value, distinct by
// canonical key, ties resolved by pool order.
std::vector<int> select_batch(const std::vector<LabeledDigraph>& pool,
                              const GPModel& model, const BOConfig& cfg,
                              int n_iteration);

// The outer BO loop: n_init random evaluations, then
// fit / generate pool / select batch / evaluate until the budget is
// consumed. Deterministic given the rng stream and a deterministic
// objective. `universe` restricts candidates to a tabular benchmark.
SearchHistory run_bo(const Objective& objective, const SearchSpaceSpec& spec,
                     const BOConfig& cfg, Rng& rng,
                     const std::vector<LabeledDigraph>* universe = nullptr);

// Baseline comparator: budget independent random evaluations.
SearchHistory random_search(const Objective& objective, const SearchSpaceSpec& spec,
                            int budget, Rng& rng,
                            const std::vector<LabeledDigraph>* universe = nullptr);

}  // namespace graphbo
