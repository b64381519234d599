#include "graphbo/motif.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace graphbo {

using nlohmann::json;

namespace {

constexpr double kEvFloor = 1e-12;

double subgradient(int a, int b) {
  if (a < b) return 1.0;
  if (a > b) return 0.0;
  return 0.5;
}

// Gradient of the posterior mean w.r.t. feature j, evaluated at a graph
// with the given count of j.
double gradient_at(const GPModel& model, int feature, int count_at_g) {
  double grad = 0.0;
  for (int i = 0; i < model.n_train(); ++i) {
    int ci = model.features[i].count(feature);
    if (ci == 0) continue;
    if (model.cfg.base == BaseKernel::dot_product)
      grad += static_cast<double>(ci) * model.alpha(i);
    else
      grad += subgradient(count_at_g, ci) * model.alpha(i);
  }
  return grad;
}

}  // namespace

std::map<int, double> feature_gradients(const GPModel& model, const LabeledDigraph& g) {
  if (model.graphs.empty()) throw GPError("feature_gradients: unfitted model");
  FeatureIndex scratch = model.index;
  FeatureVector fg = extract_features(g, model.cfg.H, model.cfg.neighborhood, scratch);
  std::set<int> domain;
  for (const auto& [id, c] : fg.counts) domain.insert(id);
  for (const auto& fv : model.features)
    for (const auto& [id, c] : fv.counts) domain.insert(id);
  std::map<int, double> grads;
  for (int id : domain) grads[id] = gradient_at(model, id, fg.count(id));
  return grads;
}

std::vector<MotifScore> motif_scores(const GPModel& model) {
  if (model.graphs.empty()) throw GPError("motif_scores: unfitted model");
  // Training support per feature.
  std::map<int, std::vector<int>> support;  // feature -> train indices with count > 0
  for (int i = 0; i < model.n_train(); ++i)
    for (const auto& [id, c] : model.features[i].counts) support[id].push_back(i);

  std::vector<MotifScore> out;
  out.reserve(support.size());
  for (const auto& [id, members] : support) {
    const int m = static_cast<int>(members.size());
    // features present in every graph with the same count (input, output,
    // ...) never vary, so they carry no ranking signal; skip them
    if (m == model.n_train()) {
      bool constant = true;
      for (int k = 1; k < m && constant; ++k)
        constant = model.features[members[k]].count(id) ==
                   model.features[members[0]].count(id);
      if (constant) continue;
    }
    std::vector<int> counts(m);
    std::vector<double> grads(m);
    for (int k = 0; k < m; ++k) {
      counts[k] = model.features[members[k]].count(id);
      grads[k] = gradient_at(model, id, counts[k]);
    }
    // Eq.-style count-frequency weights over the support subset.
    std::vector<double> w(m);
    for (int k = 0; k < m; ++k) {
      int same = 0;
      for (int k2 = 0; k2 < m; ++k2)
        if (counts[k] == counts[k2]) ++same;
      w[k] = static_cast<double>(same) / m;
    }
    double wsum = 0.0, s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < m; ++k) {
      wsum += w[k];
      s1 += w[k] * grads[k];
      s2 += w[k] * grads[k] * grads[k];
    }
    MotifScore ms;
    ms.feature_id = id;
    ms.decoded = decode_feature(id, model.index);
    ms.level = model.index.level_of(id);
    ms.ag = s1 / wsum;
    ms.ev = std::max(0.0, s2 / wsum - ms.ag * ms.ag);
    ms.occurrences = m;
    // transformed targets are errors; negate so positive score = better accuracy
    ms.score = -ms.ag / std::sqrt(std::max(ms.ev, kEvFloor));
    out.push_back(std::move(ms));
  }
  return out;
}

std::map<int, double> averaged_gradient(const GPModel& model) {
  std::map<int, double> out;
  for (const auto& ms : motif_scores(model)) out[ms.feature_id] = ms.ag;
  return out;
}

std::map<int, double> empirical_variance(const GPModel& model) {
  std::map<int, double> out;
  for (const auto& ms : motif_scores(model)) out[ms.feature_id] = ms.ev;
  return out;
}

MotifRanking rank_motifs(const GPModel& model, int min_occurrences, double quantile) {
  if (!(quantile > 0.0 && quantile <= 0.5))
    throw std::invalid_argument("rank_motifs: quantile must be in (0, 0.5]");
  std::vector<MotifScore> filtered;
  for (auto& ms : motif_scores(model))
    if (ms.occurrences >= min_occurrences) filtered.push_back(std::move(ms));
  std::sort(filtered.begin(), filtered.end(), [](const MotifScore& a, const MotifScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feature_id < b.feature_id;
  });
  const auto take = static_cast<size_t>(quantile * filtered.size());
  MotifRanking r;
  r.good.assign(filtered.begin(), filtered.begin() + take);
  r.bad.assign(filtered.end() - take, filtered.end());
  std::reverse(r.bad.begin(), r.bad.end());  // worst first
  return r;
}

int motif_match(const LabeledDigraph& g, const std::set<int>& motif_ids,
                const FeatureIndex& index, const KernelConfig& cfg) {
  for (int id : motif_ids)
    if (id < 0 || id >= index.size())
      throw std::out_of_range("motif_match: unknown motif id");
  FeatureIndex scratch = index;
  FeatureVector fv = extract_features(g, cfg.H, cfg.neighborhood, scratch);
  int matched = 0;
  for (int id : motif_ids)
    if (fv.count(id) > 0) ++matched;
  return matched;
}

int motif_match_subtrees(const LabeledDigraph& g, const std::set<std::string>& subtrees,
                         int H, Neighborhood mode) {
  FeatureIndex scratch;
  FeatureVector fv = extract_features(g, H, mode, scratch);
  std::set<std::string> present;
  for (const auto& [id, c] : fv.counts) present.insert(decode_feature(id, scratch));
  int matched = 0;
  for (const auto& s : subtrees)
    if (present.count(s)) ++matched;
  return matched;
}

std::string motifs_to_json(const MotifSet& set) {
  json doc;
  doc["H"] = set.H;
  doc["mode"] = set.mode == Neighborhood::in_neighbors    ? "in"
                : set.mode == Neighborhood::out_neighbors ? "out"
                                                          : "both";
  auto& arr = doc["motifs"] = json::array();
  for (const auto& m : set.motifs)
    arr.push_back({{"id", m.feature_id},
                   {"subtree", m.decoded},
                   {"level", m.level},
                   {"ag", m.ag},
                   {"ev", m.ev},
                   {"occurrences", m.occurrences},
                   {"score", m.score}});
  return doc.dump(2);
}

MotifSet motifs_from_json(const std::string& text) {
  json doc = json::parse(text);
  MotifSet set;
  set.H = doc.at("H").get<int>();
  std::string mode = doc.at("mode").get<std::string>();
  set.mode = mode == "in"    ? Neighborhood::in_neighbors
             : mode == "out" ? Neighborhood::out_neighbors
                             : Neighborhood::both;
  for (const auto& m : doc.at("motifs")) {
    MotifScore ms;
    ms.feature_id = m.at("id").get<int>();
    ms.decoded = m.at("subtree").get<std::string>();
    ms.level = m.value("level", 0);
    ms.ag = m.at("ag").get<double>();
    ms.ev = m.at("ev").get<double>();
    ms.occurrences = m.at("occurrences").get<int>();
    ms.score = m.at("score").get<double>();
    set.motifs.push_back(std::move(ms));
  }
  return set;
}

}  // namespace graphbo
