#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "graphbo/gp.hpp"

namespace graphbo {

/// Per-feature attribution record. `ag` is the occurrence-weighted mean
/// derivative of the posterior mean w.r.t. the feature count, in
/// transformed-target units; `score` is re-signed so that positive
/// means accuracy-improving.
struct MotifScore {
  int feature_id = -1;
  std::string decoded;
  int level = 0;
  double ag = 0.0;
  double ev = 0.0;
  int occurrences = 0;
  double score = 0.0;
};

struct MotifSet {
  int H = 0;
  Neighborhood mode = Neighborhood::in_neighbors;
  std::vector<MotifScore> motifs;
};

// Derivative of the posterior mean at g w.r.t. each feature count, for
// every feature present in g or in the training data. Exact linear form
// under the dot-product base; subgradient of min(a,b) under histogram
// intersection (1 below, 0 above, 0.5 at ties).
std::map<int, double> feature_gradients(const GPModel& model, const LabeledDigraph& g);

std::map<int, double> averaged_gradient(const GPModel& model);
std::map<int, double> empirical_variance(const GPModel& model);

// Full AG/EV/occurrence statistics for every training feature.
std::vector<MotifScore> motif_scores(const GPModel& model);

struct MotifRanking {
  std::vector<MotifScore> good;
  std::vector<MotifScore> bad;
};

// Filters to occurrences >= min_occurrences, sorts by score descending
// (ties by feature id) and returns the top and bottom quantiles.
MotifRanking rank_motifs(const GPModel& model, int min_occurrences, double quantile);

// Number of motifs from the set present in g after re-extraction at the
// same H and neighborhood mode.
int motif_match(const LabeledDigraph& g, const std::set<int>& motif_ids,
                const FeatureIndex& index, const KernelConfig& cfg);

// Presence count against decoded subtree strings; index-free, used for
// transfer filters whose source index is a different run.
int motif_match_subtrees(const LabeledDigraph& g, const std::set<std::string>& subtrees,
                         int H, Neighborhood mode);

std::string motifs_to_json(const MotifSet& set);
MotifSet motifs_from_json(const std::string& text);

}  // namespace graphbo
