#include "graphbo/candidate.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "graphbo/motif.hpp"

namespace graphbo {

namespace {

std::vector<std::string> interior_labels(const SearchSpaceSpec& spec) {
  std::vector<std::string> labels;
  for (const auto& l : spec.allowed_labels)
    if (l != spec.input_label && l != spec.output_label) labels.push_back(l);
  return labels;
}

}  // namespace

LabeledDigraph random_graph(const SearchSpaceSpec& spec, Rng& rng) {
  spec.validate();
  const auto ops = interior_labels(spec);
  std::uniform_int_distribution<int> node_count(spec.min_nodes, spec.max_nodes);
  constexpr int kAttempts = 2000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const int n = node_count(rng);
    LabeledDigraph g;
    g.node_labels.resize(n);
    g.node_labels.front() = spec.input_label;
    g.node_labels.back() = spec.output_label;
    for (int i = 1; i + 1 < n; ++i) {
      if (ops.empty()) break;
      g.node_labels[i] = ops[std::uniform_int_distribution<size_t>(0, ops.size() - 1)(rng)];
    }
    if (n > 2 && ops.empty()) continue;  // no interior labels available

    // index order doubles as the topological order
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const int max_m = std::min<int>(spec.max_edges, static_cast<int>(pairs.size()));
    const int m = std::uniform_int_distribution<int>(1, max_m)(rng);
    g.edges.assign(pairs.begin(), pairs.begin() + m);

    auto pruned = prune_disconnected(g, spec);
    if (pruned && validates_against(*pruned, spec)) return *pruned;
  }
  throw GenerationError("random_graph: no valid sample after attempt budget");
}

LabeledDigraph mutate(const LabeledDigraph& parent, const SearchSpaceSpec& spec, Rng& rng) {
  const auto ops = interior_labels(spec);
  const CanonicalKey parent_key = canonical_key(parent);
  const int n = parent.num_nodes();

  // ancestor reachability, for acyclicity-preserving edge additions
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  {
    std::vector<std::vector<int>> out(n);
    for (const auto& [u, v] : parent.edges) out[u].push_back(v);
    auto order = topological_order(parent);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int u = *it;
      reach[u][u] = 1;
      for (int v : out[u])
        for (int w = 0; w < n; ++w) reach[u][w] |= reach[v][w];
    }
  }
  std::set<std::pair<int, int>> existing(parent.edges.begin(), parent.edges.end());
  std::vector<std::pair<int, int>> addable;
  if (parent.num_edges() < spec.max_edges)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v && !existing.count({u, v}) && !reach[v][u]) addable.emplace_back(u, v);

  std::vector<int> relabelable;
  for (int i = 0; i < n; ++i)
    if (parent.node_labels[i] != spec.input_label &&
        parent.node_labels[i] != spec.output_label && ops.size() >= 2)
      relabelable.push_back(i);

  enum class Edit { relabel, add_edge, remove_edge };
  std::vector<Edit> classes;
  if (!relabelable.empty()) classes.push_back(Edit::relabel);
  if (!addable.empty()) classes.push_back(Edit::add_edge);
  if (parent.num_edges() > 0) classes.push_back(Edit::remove_edge);
  if (classes.empty()) throw GenerationError("mutate: no feasible edit class");

  constexpr int kAttempts = 200;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    LabeledDigraph child = parent;
    switch (classes[std::uniform_int_distribution<size_t>(0, classes.size() - 1)(rng)]) {
      case Edit::relabel: {
        int i = relabelable[std::uniform_int_distribution<size_t>(0, relabelable.size() - 1)(rng)];
        std::string next;
        do {
          next = ops[std::uniform_int_distribution<size_t>(0, ops.size() - 1)(rng)];
        } while (next == parent.node_labels[i]);
        child.node_labels[i] = next;
        break;
      }
      case Edit::add_edge:
        child.edges.push_back(
            addable[std::uniform_int_distribution<size_t>(0, addable.size() - 1)(rng)]);
        break;
      case Edit::remove_edge:
        child.edges.erase(child.edges.begin() +
                          std::uniform_int_distribution<size_t>(0, child.edges.size() - 1)(rng));
        break;
    }
    auto pruned = prune_disconnected(child, spec);
    if (!pruned || !validates_against(*pruned, spec)) continue;
    if (canonical_key(*pruned) == parent_key) continue;
    return *pruned;
  }
  throw GenerationError("mutate: no valid single edit found");
}

PoolResult generate_pool(const SearchSpaceSpec& spec,
                         const std::vector<Observation>& history,
                         const PoolConfig& cfg, Rng& rng,
                         const std::vector<LabeledDigraph>* universe) {
  if (cfg.pool_size < 1 || cfg.n_parents < 1)
    throw GenerationError("generate_pool: pool_size and n_parents must be >= 1");
  const bool needs_parents = cfg.strategy != PoolStrategy::random;
  if (needs_parents && history.empty())
    throw GenerationError("generate_pool: mutation strategy needs a non-empty history");

  std::set<std::string> taken;
  if (cfg.dedup)
    for (const auto& obs : history) taken.insert(canonical_key(obs.graph).key);

  // best-by-raw-error parents, ties to earlier observations
  std::vector<LabeledDigraph> parents;
  if (needs_parents) {
    std::vector<int> idx(history.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return history[a].val_error < history[b].val_error;
    });
    for (int i = 0; i < std::min<int>(cfg.n_parents, idx.size()); ++i)
      parents.push_back(history[idx[i]].graph);
  }

  const int n_mutants = cfg.strategy == PoolStrategy::random ? 0
                        : cfg.strategy == PoolStrategy::mutate
                            ? cfg.pool_size
                            : (cfg.pool_size + 1) / 2;

  std::set<std::string> universe_keys;
  if (universe)
    for (const auto& g : *universe) universe_keys.insert(canonical_key(g).key);

  auto draw_random = [&]() -> std::optional<LabeledDigraph> {
    if (universe) {
      const auto& g =
          (*universe)[std::uniform_int_distribution<size_t>(0, universe->size() - 1)(rng)];
      return g;
    }
    return random_graph(spec, rng);
  };
  auto draw_mutant = [&]() -> std::optional<LabeledDigraph> {
    const auto& parent =
        parents[std::uniform_int_distribution<size_t>(0, parents.size() - 1)(rng)];
    try {
      LabeledDigraph child = mutate(parent, spec, rng);
      if (universe && !universe_keys.count(canonical_key(child).key)) return std::nullopt;
      return child;
    } catch (const GenerationError&) {
      return std::nullopt;
    }
  };

  PoolResult result;
  const int cap = cfg.filter_attempt_factor * cfg.pool_size;
  // mutants get a bounded share of the attempts so an exhausted mutation
  // neighborhood cannot starve the random fill
  const int mutant_cap = cfg.filter_attempt_factor * n_mutants;
  int accepted_mutants = 0;
  int mutant_attempts = 0;
  while (static_cast<int>(result.graphs.size()) < cfg.pool_size && result.attempts < cap) {
    ++result.attempts;
    bool want_mutant = accepted_mutants < n_mutants && mutant_attempts < mutant_cap;
    if (want_mutant) ++mutant_attempts;
    auto cand = want_mutant ? draw_mutant() : draw_random();
    if (!cand) continue;
    const std::string key = canonical_key(*cand).key;
    if (cfg.dedup && taken.count(key)) continue;
    if (cfg.motif_filter &&
        motif_match_subtrees(*cand, *cfg.motif_filter, cfg.motif_H, cfg.motif_mode) == 0)
      continue;
    if (cfg.dedup) taken.insert(key);
    result.graphs.push_back(std::move(*cand));
    if (want_mutant) ++accepted_mutants;
  }
  if (result.graphs.empty()) {
    // never hand an empty pool back to the optimizer: allow revisits of
    // already-evaluated graphs, keeping only in-pool uniqueness
    std::set<std::string> in_pool;
    for (int i = 0; i < cap && static_cast<int>(result.graphs.size()) < cfg.pool_size; ++i) {
      ++result.attempts;
      auto cand = draw_random();
      if (!cand) continue;
      if (cfg.motif_filter &&
          motif_match_subtrees(*cand, *cfg.motif_filter, cfg.motif_H, cfg.motif_mode) == 0)
        continue;
      const std::string key = canonical_key(*cand).key;
      if (!in_pool.insert(key).second) continue;
      result.graphs.push_back(std::move(*cand));
    }
  }
  result.acceptance_rate =
      result.attempts ? static_cast<double>(result.graphs.size()) / result.attempts : 1.0;
  if (static_cast<int>(result.graphs.size()) < cfg.pool_size) {
    result.capped = true;
    std::cerr << "generate_pool: attempt cap hit, returning partial pool of "
              << result.graphs.size() << "/" << cfg.pool_size
              << " (acceptance rate " << result.acceptance_rate << ")\n";
  }
  return result;
}

}  // namespace graphbo
