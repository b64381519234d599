#pragma once

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphbo/graph.hpp"
#include "graphbo/wl.hpp"

namespace graphbo {

using Rng = std::mt19937_64;

struct Observation {
  LabeledDigraph graph;
  double val_error = 0.0;
  double test_error = 0.0;
};

enum class PoolStrategy { random, mutate, half_half };

struct PoolConfig {
  int pool_size = 200;
  PoolStrategy strategy = PoolStrategy::half_half;
  int n_parents = 10;
  bool dedup = true;
  // Transfer pruning: accept only candidates containing at least one of
  // these decoded subtrees, extracted at (motif_H, motif_mode).
  std::optional<std::set<std::string>> motif_filter;
  int motif_H = 1;
  Neighborhood motif_mode = Neighborhood::in_neighbors;
  int filter_attempt_factor = 50;  // attempt cap = factor * pool_size
};

struct PoolResult {
  std::vector<LabeledDigraph> graphs;
  int attempts = 0;
  bool capped = false;
  double acceptance_rate = 1.0;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform spec-valid graph via rejection: random node count, labels and
// acyclic edge set, kept only when pruning leaves an input->output graph.
LabeledDigraph random_graph(const SearchSpaceSpec& spec, Rng& rng);

// Exactly one random edit (relabel an interior node, add an
// acyclicity-preserving edge, or drop an edge), re-drawn until the
// pruned result is spec-valid and differs from the parent.
LabeledDigraph mutate(const LabeledDigraph& parent, const SearchSpaceSpec& spec, Rng& rng);

// Assembles a candidate pool. When `universe` is given (tabular runs),
// random draws come from it and mutants must be members.
PoolResult generate_pool(const SearchSpaceSpec& spec,
                         const std::vector<Observation>& history,
                         const PoolConfig& cfg, Rng& rng,
                         const std::vector<LabeledDigraph>* universe = nullptr);

}  // namespace graphbo
